#pragma once

#include <cstdint>
#include <vector>

#include "dbb84/channel.hpp"
#include "dbb84/estimation.hpp"

namespace dbb84 {

// Which intensity's observed error rate feeds the error-correction term.
// The default follows the signal index; the alternative keeps the printed
// decoy-intensity form.
enum class EcRateIndex { Intensity1 = 1, Intensity2 = 2 };

struct KeyRateInputs {
  ChannelModel model;
  double Ms = 1.0e7;  // raw-key length driving the budgets
  int beta = 80;
  double eta = 1.1;
  int signal_index = 2;
  Variant variant = Variant::Improved;
  BoundMethod method = BoundMethod::ChernoffKL;
  bool auto_method = false;
  EcRateIndex ec_index = EcRateIndex::Intensity2;
  // explicit pulse budgets; zero fields fall back to Ns = Ms/p_s, N = Ns/10
  PulseBudgets budgets{};
};

struct KeyRatePoint {
  double mu1 = 0.0, mu2 = 0.0, t = 0.0;
  double Ms = 0.0;
  int beta = 0;
  Variant variant = Variant::Improved;
  std::int64_t S = 0;
  double R = 0.0;        // key rate per transmitted signal pulse, 0 when aborted
  double raw_rate = 0.0; // unclamped (Ms - S - ec)/Ns, may be negative
  bool aborted = false;
};

KeyRatePoint key_rate(const KeyRateInputs& in);

// Epsilon-free limit: every percent point replaced by its mean, every
// interval limit by the observed ratio, and no finite-length overhead.
double asymptotic_rate(const ChannelModel& model, double eta,
                       EcRateIndex ec_index = EcRateIndex::Intensity2);

struct SweepGrid {
  std::vector<double> mu1{};
  std::vector<double> mu2{};
  std::vector<double> t{};
  std::vector<double> Ms{};
};

// Cartesian sweep in deterministic (mu1, mu2, t, Ms) order; aborted and
// invalid (mu2 <= mu1) points are reported with R = 0 rather than skipped.
std::vector<KeyRatePoint> sweep(const KeyRateInputs& base, const SweepGrid& grid,
                                int jobs = 1);

}  // namespace dbb84
