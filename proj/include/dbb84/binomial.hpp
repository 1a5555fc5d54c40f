#pragma once

#include <cstdint>
#include <stdexcept>

namespace dbb84 {

struct MethodOutOfDomain : std::domain_error {
  using std::domain_error::domain_error;
};
struct DivergenceInfinite : std::domain_error {
  using std::domain_error::domain_error;
};

struct BinomialModel {
  std::int64_t trials = 1;     // N >= 1
  double success_prob = 0.0;   // p in [0,1]
};

// One-sided quantile/limit evaluation strategy. Exact walks the tail sums;
// the Chernoff family inverts closed-form bounds and is always on the
// conservative side of Exact.
enum class BoundMethod { Exact, ChernoffKL, ChernoffPinsker, ChernoffInfoGeo };

// Small probabilities are carried as natural logs so that power-of-two
// epsilons like 2^-168 never round through a subnormal parse.
class Alpha {
 public:
  static Alpha from_value(double a);
  static Alpha from_log2_exponent(double e);  // alpha = 2^-e, e > 0
  double log() const { return log_; }
  double value() const;

 private:
  explicit Alpha(double log_alpha) : log_(log_alpha) {}
  double log_;
};

struct Tolerance {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_iter = 200;
};

// log P[X >= k] for X ~ Bin(N, p); exact within a few ulp-scale summation
// errors. k <= 0 gives 0 (= log 1), k > N gives -inf.
double log_binom_tail_upper(std::int64_t trials, double p, std::int64_t k);
// log P[X <= k]; k >= N gives 0, k < 0 gives -inf.
double log_binom_tail_lower(std::int64_t trials, double p, std::int64_t k);

double binom_tail_upper(const BinomialModel& m, std::int64_t k);

// Relative entropy D(q||p) between Bernoulli(q) and Bernoulli(p), in nats.
// Boundaries: D(0||p) = -log(1-p), D(1||p) = -log p, D(q||q) = 0.
// Throws DivergenceInfinite for p in {0,1} with q != p.
double kl_div(double q, double p);

// Lower percent point: Exact returns the largest integer x with
// P[X < x] <= alpha, so Pr{X < result} <= alpha. Bound methods return a
// real value <= the exact one, clamped to [0, N p].
double percent_point_lower(const BinomialModel& m, Alpha alpha, BoundMethod method,
                           const Tolerance& tol = {});
// Upper percent point: Exact returns the smallest integer x with
// P[X > x] <= alpha. Bound methods return a value >= the exact one,
// clamped to [N p, N]. ChernoffInfoGeo throws MethodOutOfDomain when its
// simplified closed form leaves q <= 1/2.
double percent_point_upper(const BinomialModel& m, Alpha alpha, BoundMethod method,
                           const Tolerance& tol = {});

// Real-valued (non-integer trial count) variants of the bound methods, used
// where an estimated trial count feeds a second-stage quantile. Exact
// requires an integer and floors the input.
double percent_point_upper_real(double trials, double p, Alpha alpha, BoundMethod method,
                                const Tolerance& tol = {});

// One-sided lower confidence limit for p after observing k successes:
// Pr{ true p < result } <= alpha. Exact solves P_p[X >= k] = alpha;
// k = 0 gives 0. Bound methods return a value <= the exact limit.
double interval_lower(std::int64_t trials, std::int64_t k, Alpha alpha, BoundMethod method,
                      const Tolerance& tol = {});
// One-sided upper confidence limit: Pr{ true p > result } <= alpha.
// Exact solves P_p[X <= k] = alpha; k = N gives 1. Bound methods return a
// value >= the exact limit.
double interval_upper(std::int64_t trials, std::int64_t k, Alpha alpha, BoundMethod method,
                      const Tolerance& tol = {});

// Binary entropy in bits, h(0) = h(1) = 0.
double binary_entropy(double x);

// Exact evaluation is admissible when the tail sums stay cheap; outside
// this envelope auto-selection falls back to ChernoffKL.
bool exact_admissible(std::int64_t trials, Alpha alpha);

}  // namespace dbb84
