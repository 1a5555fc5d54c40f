#include "dbb84/binomial.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "dbb84/kernels.hpp"

namespace dbb84 {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kBlock = 256;

double log_pmf(std::int64_t n, double log_p, double log_q, std::int64_t i) {
  // extended precision: the lgamma terms grow like n log n and mostly cancel,
  // so double rounding there would cost ~1e-10 of relative tail accuracy
  long double v = std::lgamma((long double)(n) + 1.0L) -
                  std::lgamma((long double)(i) + 1.0L) -
                  std::lgamma((long double)(n - i) + 1.0L);
  if (i > 0) v += (long double)(i) * (long double)log_p;
  if (i < n) v += (long double)(n - i) * (long double)log_q;
  return double(v);
}

// Sum of pmf over an integer range moving away from the mode, done in blocks:
// each block gets an lgamma-fresh base, the in-block relative log terms come
// from a prefix sum over log successor ratios, and the block total is a
// vectorized sum of exponentials. `step` is +1 (ascending from k) or -1
// (descending from k). Returns log of the range sum.
double log_tail_directional(std::int64_t n, double p, std::int64_t k, int step) {
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const auto& ops = kernels::active();

  const double shift = log_pmf(n, log_p, log_q, k);
  double total = 0.0;  // relative to exp(shift)
  std::int64_t i = k;
  double ratio[kBlock];
  double logr[kBlock];
  double rel[kBlock];

  while (true) {
    const std::int64_t remaining = (step > 0) ? (n - i + 1) : (i + 1);
    if (remaining <= 0) break;
    const std::size_t len = std::min<std::int64_t>(kBlock, remaining);

    if (step > 0) {
      for (std::size_t j = 0; j + 1 < len; ++j) {
        const double idx = double(i + std::int64_t(j));
        ratio[j] = (double(n) - idx) / (idx + 1.0) * p / (1.0 - p);
      }
    } else {
      for (std::size_t j = 0; j + 1 < len; ++j) {
        const double idx = double(i - std::int64_t(j));
        ratio[j] = idx * (1.0 - p) / ((double(n) - idx + 1.0) * p);
      }
    }
    if (len > 1) ops.log_n(ratio, logr, len - 1);

    double running = log_pmf(n, log_p, log_q, i) - shift;
    for (std::size_t j = 0; j < len; ++j) {
      rel[j] = running;
      if (j + 1 < len) running += logr[j];
    }
    total += ops.sum_exp(rel, len);

    i += step * std::int64_t(len);
    const std::int64_t left = (step > 0) ? (n - i + 1) : (i + 1);
    if (left <= 0) break;
    // terms decrease away from the mode, so the remainder is at most
    // left * exp(last term)
    if (rel[len - 1] + std::log(double(left)) < std::log(total) - 40.0) break;
  }
  return shift + std::log(total);
}

double log1mexp(double log_x) {
  // log(1 - exp(log_x)) for log_x < 0
  if (log_x >= 0.0) return kNegInf;
  return std::log1p(-std::exp(log_x));
}

// Bisect a monotone predicate to one-ulp brackets (or the iteration budget)
// and return the side on which the predicate certifiably holds (lo side when
// return_hi is false). The caller picks the side whose defining inequality
// is the conservative one, so root error never lands on the unsound side.
double bisect_to_ulp(double lo, double hi, bool return_hi, int max_iter, auto&& lo_side) {
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (lo_side(mid) ? lo : hi) = mid;
  }
  return return_hi ? hi : lo;
}

// q on the requested side of p solving kl_div(q, p) = c; kl is monotone on
// each side of its minimum at q = p.
double kl_inverse_lower(double p, double c, int max_iter) {
  if (c <= 0.0) return p;
  if (kl_div(0.0, p) <= c) return 0.0;
  return bisect_to_ulp(0.0, p, false, max_iter, [&](double q) { return kl_div(q, p) > c; });
}

double kl_inverse_upper(double p, double c, int max_iter) {
  if (c <= 0.0) return p;
  if (p >= 1.0) return 1.0;
  if (kl_div(1.0, p) <= c) return 1.0;
  return bisect_to_ulp(p, 1.0, true, max_iter, [&](double q) { return kl_div(q, p) < c; });
}

}  // namespace

Alpha Alpha::from_value(double a) {
  if (!(a > 0.0) || !(a < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  return Alpha(std::log(a));
}

Alpha Alpha::from_log2_exponent(double e) {
  if (!(e > 0.0)) throw std::invalid_argument("alpha exponent must be positive");
  return Alpha(-e * M_LN2);
}

double Alpha::value() const { return std::exp(log_); }

double log_binom_tail_upper(std::int64_t n, double p, std::int64_t k) {
  assert(n >= 1);
  if (k <= 0) return 0.0;
  if (k > n) return kNegInf;
  if (p <= 0.0) return kNegInf;           // X == 0, k >= 1
  if (p >= 1.0) return 0.0;               // X == n, k <= n
  const std::int64_t mode = std::int64_t((double(n) + 1.0) * p);
  if (k > mode) return log_tail_directional(n, p, k, +1);
  return log1mexp(log_tail_directional(n, p, k - 1, -1));  // k-1 < mode
}

double log_binom_tail_lower(std::int64_t n, double p, std::int64_t k) {
  assert(n >= 1);
  if (k < 0) return kNegInf;
  if (k >= n) return 0.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return kNegInf;
  const std::int64_t mode = std::int64_t((double(n) + 1.0) * p);
  if (k < mode) return log_tail_directional(n, p, k, -1);
  return log1mexp(log_tail_directional(n, p, k + 1, +1));
}

double binom_tail_upper(const BinomialModel& m, std::int64_t k) {
  return std::exp(log_binom_tail_upper(m.trials, m.success_prob, k));
}

double kl_div(double q, double p) {
  if (!(q >= 0.0 && q <= 1.0 && p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("kl_div arguments must lie in [0,1]");
  if (q == p) return 0.0;
  if (p <= 0.0 || p >= 1.0) throw DivergenceInfinite("kl_div: p on the boundary with q != p");
  if (q == 0.0) return -std::log1p(-p);
  if (q == 1.0) return -std::log(p);
  return q * (std::log(q) - std::log(p)) +
         (1.0 - q) * (std::log1p(-q) - std::log1p(-p));
}

namespace {

std::int64_t exact_pp_lower(std::int64_t n, double p, double log_alpha) {
  // largest x in [0, n] with P[X < x] <= alpha
  std::int64_t lo = 0, hi = n;  // predicate true at lo
  if (log_binom_tail_lower(n, p, n - 1) <= log_alpha) return n;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo + 1) / 2;
    if (log_binom_tail_lower(n, p, mid - 1) <= log_alpha)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

std::int64_t exact_pp_upper(std::int64_t n, double p, double log_alpha) {
  // smallest x in [0, n] with P[X > x] <= alpha
  std::int64_t lo = 0, hi = n;  // predicate true at hi
  if (log_binom_tail_upper(n, p, 1) <= log_alpha) return 0;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (log_binom_tail_upper(n, p, mid + 1) <= log_alpha)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

}  // namespace

double percent_point_lower(const BinomialModel& m, Alpha alpha, BoundMethod method,
                           const Tolerance& tol) {
  const std::int64_t n = m.trials;
  const double p = m.success_prob;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return double(n);
  const double c = -alpha.log() / double(n);
  double v;
  switch (method) {
    case BoundMethod::Exact:
      return double(exact_pp_lower(n, p, alpha.log()));
    case BoundMethod::ChernoffKL:
      v = double(n) * kl_inverse_lower(p, c, tol.max_iter);
      break;
    case BoundMethod::ChernoffPinsker:
      v = double(n) * (p - std::sqrt(-alpha.log() / (2.0 * double(n))));
      break;
    case BoundMethod::ChernoffInfoGeo:
      if (p >= 0.5) throw MethodOutOfDomain("info-geo lower percent point needs p < 1/2");
      v = double(n) * (p - std::sqrt(-2.0 * alpha.log() * p * (1.0 - p) / double(n)));
      break;
    default:
      throw std::logic_error("unknown bound method");
  }
  return std::clamp(v, 0.0, double(n) * p);
}

double percent_point_upper_real(double n, double p, Alpha alpha, BoundMethod method,
                                const Tolerance& tol) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return n;
  const double c = -alpha.log() / n;
  double v;
  switch (method) {
    case BoundMethod::Exact: {
      const std::int64_t ni = std::int64_t(n);
      if (ni < 1) return 0.0;
      return double(exact_pp_upper(ni, p, alpha.log()));
    }
    case BoundMethod::ChernoffKL:
      v = n * kl_inverse_upper(p, c, tol.max_iter);
      break;
    case BoundMethod::ChernoffPinsker:
      v = n * (p + std::sqrt(-alpha.log() / (2.0 * n)));
      break;
    case BoundMethod::ChernoffInfoGeo: {
      const double q = (p + 2.0 * c + std::sqrt(p * (1.0 - p) * 2.0 * c)) / (1.0 + 2.0 * c);
      if (q > 0.5) throw MethodOutOfDomain("info-geo upper percent point left q <= 1/2");
      v = n * q;
      break;
    }
    default:
      throw std::logic_error("unknown bound method");
  }
  return std::clamp(v, n * p, n);
}

double percent_point_upper(const BinomialModel& m, Alpha alpha, BoundMethod method,
                           const Tolerance& tol) {
  return percent_point_upper_real(double(m.trials), m.success_prob, alpha, method, tol);
}

double interval_lower(std::int64_t n, std::int64_t k, Alpha alpha, BoundMethod method,
                      const Tolerance& tol) {
  assert(k >= 0 && k <= n);
  if (k == 0) return 0.0;
  const double r = double(k) / double(n);
  const double c = -alpha.log() / double(n);
  switch (method) {
    case BoundMethod::Exact:
      // P_p[X >= k] is increasing in p; the lo side keeps the tail <= alpha
      return bisect_to_ulp(0.0, 1.0, false, tol.max_iter, [&](double p) {
        return log_binom_tail_upper(n, p, k) < alpha.log();
      });
    case BoundMethod::ChernoffKL:
      // p < k/N with D(k/N || p) = c; D decreasing in p on (0, k/N)
      return bisect_to_ulp(0.0, r, false, tol.max_iter,
                           [&](double p) { return kl_div(r, p) > c; });
    case BoundMethod::ChernoffPinsker:
      return std::max(0.0, r - std::sqrt(-alpha.log() / (2.0 * double(n))));
    case BoundMethod::ChernoffInfoGeo:
      if (r >= 0.5) throw MethodOutOfDomain("info-geo lower limit needs k/N < 1/2");
      return std::max(0.0, r - std::sqrt(-2.0 * alpha.log() * r * (1.0 - r) / double(n)));
    default:
      throw std::logic_error("unknown bound method");
  }
}

double interval_upper(std::int64_t n, std::int64_t k, Alpha alpha, BoundMethod method,
                      const Tolerance& tol) {
  assert(k >= 0 && k <= n);
  if (k == n) return 1.0;
  const double r = double(k) / double(n);
  const double c = -alpha.log() / double(n);
  switch (method) {
    case BoundMethod::Exact:
      // P_p[X <= k] is decreasing in p; the hi side keeps the tail <= alpha
      return bisect_to_ulp(0.0, 1.0, true, tol.max_iter, [&](double p) {
        return log_binom_tail_lower(n, p, k) > alpha.log();
      });
    case BoundMethod::ChernoffKL:
      // p > k/N with D(k/N || p) = c; D increasing in p on (k/N, 1)
      return bisect_to_ulp(r, 1.0, true, tol.max_iter,
                           [&](double p) { return kl_div(r, p) < c; });
    case BoundMethod::ChernoffPinsker:
      return std::min(1.0, r + std::sqrt(-alpha.log() / (2.0 * double(n))));
    case BoundMethod::ChernoffInfoGeo: {
      const double v = (r + 2.0 * c + std::sqrt(r * (1.0 - r) * 2.0 * c)) / (1.0 + 2.0 * c);
      if (v > 0.5) throw MethodOutOfDomain("info-geo upper limit left p <= 1/2");
      return v;
    }
    default:
      throw std::logic_error("unknown bound method");
  }
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("binary_entropy needs x in [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -(x * std::log2(x) + (1.0 - x) * std::log2(1.0 - x));
}

bool exact_admissible(std::int64_t trials, Alpha alpha) {
  return alpha.log() >= -40.0 * M_LN2 || trials <= 100000;
}

}  // namespace dbb84
