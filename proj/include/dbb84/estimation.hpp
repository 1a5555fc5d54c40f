#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dbb84/binomial.hpp"
#include "dbb84/channel.hpp"
#include "dbb84/photon_source.hpp"

namespace dbb84 {

struct AdjustedCountNegative : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConditionViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProtocolParams {
  int beta = 80;               // security exponent: trace norm <= 2^-beta
  IntensityLaw law1 = FixedLaw{0.1};
  IntensityLaw law2 = FixedLaw{0.5};
  int signal_index = 2;        // which intensity generates raw keys
  std::int64_t N0 = 0, N1 = 0, N2 = 0, Ns = 0;
  double eta = 1.1;            // error-correction inefficiency
  std::int64_t code_dim = 0;   // abort sentinel; 0 means "use Ms"

  void validate() const;
  const IntensityLaw& signal_law() const { return signal_index == 1 ? law1 : law2; }
};

enum class Variant { NonImproved, Improved };

// Failure-probability split across the pipeline's estimates. The two
// presets follow the printed schedules; every entry is a power of two.
struct EpsilonSchedule {
  Alpha m0, m1, m2, m3;  // step-1 interval estimations
  Alpha part;            // step-2 percent points and the box
  Alpha j0, j1, r;       // step-4 raw-key quantities

  static EpsilonSchedule non_improved(int beta);
  static EpsilonSchedule improved(int beta);
  static EpsilonSchedule preset(Variant v, int beta);
};

// Closed real interval with outward-rounded arithmetic (interval.hpp).
struct Iv {
  double lo = 0.0, hi = 0.0;
};

// High-probability box for the pulse partition
// (N1^(0), N1^(1), N2^(0), N2^(1), N2^(2)); N1^(2) is the derived slack.
struct PartitionBox {
  Iv n10, n11, n20, n21, n22;
  std::int64_t n1_total = 0;
  Iv n12() const;
};

struct StepOneEstimates {
  double m0 = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0;  // estimated count expectations
};

struct PartitionEstimates {
  double n10 = 0.0, n11 = 0.0, n20 = 0.0, n21 = 0.0, n22 = 0.0;
  double n12(std::int64_t n1_total) const { return double(n1_total) - n10 - n11; }
};

struct ChannelEstimates {
  double q0 = 0.0;  // vacuum detection-rate estimate
  double a1 = 0.0;  // phase-error-free single-photon detection rate
  double b1 = 0.0;  // phase-error single-photon detection rate
};

struct RawKeyEstimates {
  double j0 = 0.0;  // vacuum contribution to the raw keys
  double j1 = 0.0;  // single-photon contribution
  double r1 = 0.5;  // phase-error rate among single-photon detections
};

struct ConditionReport {
  bool pass1 = false, pass2 = false, pass3 = false;
  std::array<double, 3> margins1{};  // lhs - rhs of the three inequalities
  std::array<double, 5> margins2{};  // certified lower bounds of the five quantities
  double margin3 = 0.0;              // 1/8 - certified ratio upper bound
  bool all() const { return pass1 && pass2 && pass3; }
};

struct SacrificeResult {
  double J0 = 0.0, J1 = 0.0, r1 = 0.5;
  double phi2 = 0.0;          // leaked-information estimate in bits
  bool phi2_clamped = false;  // negative value clamped to zero
  std::int64_t S = 0;         // sacrifice bit-length
  ConditionReport conditions;
  bool aborted = false;
  std::string abort_reason;
  ChannelEstimates channel;
  StepOneEstimates step1;
  PartitionEstimates step2;
};

struct PipelineOptions {
  Variant variant = Variant::Improved;
  BoundMethod method = BoundMethod::ChernoffKL;
  bool auto_method = false;  // per-call Exact-vs-ChernoffKL selection
  std::optional<double> vacuum_q;
  // Candidate law pairs when the intensity distribution is known only up to
  // a family; empty means "use the params laws".
  std::vector<std::pair<IntensityLaw, IntensityLaw>> theta_set;
};

// Step (1): interval-estimated expectations of the decoy counts — lower
// limits where the leak estimate decreases in the count, upper otherwise.
StepOneEstimates step1_counts(const ProtocolParams& p, const ObservedCounts& c,
                              const EpsilonSchedule& s, BoundMethod m, bool auto_method = false);

// Step (2): lower percent points of the pulse-partition coordinates.
PartitionEstimates step2_partition(const ProtocolParams& p, const SourceMoments& m1,
                                   const SourceMoments& m2, double w2,
                                   const EpsilonSchedule& s, BoundMethod m,
                                   bool auto_method = false);

// Step (3): channel parameters from the linear system; throws
// ConditionViolated when the partition determinant is not positive.
ChannelEstimates step3_channel(const ProtocolParams& p, const StepOneEstimates& m,
                               const PartitionEstimates& n, double q0);

// Step (4): raw-key partition estimates from the channel parameters.
RawKeyEstimates step4_rawkey(const ProtocolParams& p, const ChannelEstimates& est,
                             const SourceMoments& signal_moments, const EpsilonSchedule& s,
                             BoundMethod m, bool auto_method = false);

// Step (5): leaked-information estimate in bits.
double step5_leak(double Ms, const RawKeyEstimates& r);

// Step (6): sacrifice length; ceil(phi2) + 2 beta + 5 clamped to [0, Ms] on
// success, code_dim on abort.
std::int64_t step6_sacrifice(const ProtocolParams& p, std::int64_t Ms, double phi2,
                             bool conditions_ok);

PartitionBox build_omega1(const ProtocolParams& p, const SourceMoments& m1,
                          const SourceMoments& m2, double w2, const EpsilonSchedule& s,
                          BoundMethod m, bool auto_method = false);

// The three printed inequalities on percent points (already in extremal form).
bool check_condition1(const PartitionBox& box, std::array<double, 3>* margins = nullptr);

// Certified positivity of the five linear-system quantities over the whole
// box, by outward-rounded interval arithmetic.
bool check_condition2(const StepOneEstimates& m, double q0, const PartitionBox& box,
                      std::array<double, 5>* margins = nullptr);

// Certified ratio bound b/(a+b) <= 1/8 over the whole box.
bool check_condition3(const StepOneEstimates& m, double q0, const PartitionBox& box,
                      double* margin = nullptr);

// Vacuum-contamination adjustment of the vacuum detection-rate estimate;
// throws AdjustedCountNegative when M0 cannot cover the contamination
// quantile.
double vacuum_adjust_q0(const ProtocolParams& p, std::int64_t M0, double q,
                        const EpsilonSchedule& s, BoundMethod m, bool auto_method = false);

struct ExistingMethodResult {
  double q1 = 0.0;   // single-photon detection-rate estimate
  double phi = 0.0;  // comparison leaked-information value
};

// Single-photon-rate estimator used by the pre-existing decoy analyses. It
// works from the summed detection counts M1+M3 and M2+M4 (estimated jointly:
// a lower limit for the first, an upper for the second), so its leak
// estimate is never below the proposed one.
double existing_q1(double m13_lower, double m24_upper, double q0,
                   const PartitionEstimates& n, const ProtocolParams& p);
ExistingMethodResult existing_method(const ProtocolParams& p, const ObservedCounts& c,
                                     const PipelineOptions& opt);

SacrificeResult pipeline(const ProtocolParams& p, const ObservedCounts& c,
                         const PipelineOptions& opt);

// Resolve the auto method per call: Exact inside its admissibility envelope,
// ChernoffKL beyond.
BoundMethod resolve_method(BoundMethod requested, bool auto_method, std::int64_t trials,
                           Alpha alpha);

}  // namespace dbb84
