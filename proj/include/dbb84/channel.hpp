#pragma once

#include <cstdint>
#include <stdexcept>

#include "dbb84/photon_source.hpp"

namespace dbb84 {

struct InvalidCounts : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Depolarizing-style rate model: alpha is the total transmission including
// detector efficiency, p0 the dark-count probability per pulse, s the
// optical misalignment fraction.
struct ChannelModel {
  double alpha = 1.0e-3;
  double p0 = 4.0e-7;
  double s = 0.03;
  IntensityLaw law1 = FixedLaw{0.1};
  IntensityLaw law2 = FixedLaw{0.5};

  void validate() const;
};

// Per-intensity detection rate p and phase-error detection rate s_err
// (identical in the two bases under this model).
struct RatePack {
  double p1 = 0.0, s1 = 0.0;
  double p2 = 0.0, s2 = 0.0;
  double p_vac = 0.0, s_vac = 0.0;
};

struct ObservedCounts {
  std::int64_t Ms = 0;
  std::int64_t M0 = 0;
  std::int64_t M1 = 0;
  std::int64_t M2 = 0;
  std::int64_t M3 = 0;
  std::int64_t M4 = 0;  // carried; only the legacy-estimator comparison uses it

  void validate(std::int64_t N0, std::int64_t N1, std::int64_t N2, std::int64_t Ns) const;
};

// Pulse budgets; Ns is derived from the raw-key length when driven by Ms.
struct PulseBudgets {
  std::int64_t N0 = 0, N1 = 0, N2 = 0, Ns = 0;
};

RatePack expected_rates(const ChannelModel& model);

// Deterministic expectation counts, rounded to nearest integers.
ObservedCounts expected_counts(const ChannelModel& model, const PulseBudgets& budgets,
                               int signal_index);

// Budgets implied by a raw-key length: Ns = Ms / p_signal, N0 = N1 = N2 = Ns/10.
PulseBudgets budgets_from_ms(const ChannelModel& model, double Ms, int signal_index);

// Binomially sampled counts; reproducible given (model, budgets, seed), with
// independent per-count streams.
ObservedCounts sample_counts(const ChannelModel& model, const PulseBudgets& budgets,
                             int signal_index, std::uint64_t seed);

// Deterministic splittable generator (splitmix64 core).
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : state_(seed) {}
  static SplitRng for_stream(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next_u64();
  double next_unit();  // in [0, 1)

 private:
  std::uint64_t state_;
};

// Exact binomial sampling by CDF inversion (mode-anchored walk).
std::int64_t sample_binomial(SplitRng& rng, std::int64_t trials, double p);

}  // namespace dbb84
