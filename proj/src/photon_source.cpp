#include "dbb84/photon_source.hpp"

#include <cmath>
#include <limits>

namespace dbb84 {
namespace {

void validate_moments(const SourceMoments& m) {
  if (!(m.m0 > 0.0 && m.m0 <= 1.0) || m.m1 < 0.0 || m.m2 < 0.0)
    throw std::invalid_argument("source moments out of range");
}

}  // namespace

SourceMoments moments(const IntensityLaw& law) {
  if (const auto* f = std::get_if<FixedLaw>(&law)) {
    if (!(f->mu > 0.0)) throw std::invalid_argument("fixed intensity must be positive");
    const double e = std::exp(-f->mu);
    return {e, f->mu * e, f->mu * f->mu * e, "fixed"};
  }
  if (const auto* g = std::get_if<GaussianLaw>(&law)) {
    if (!(g->mean > 0.0) || g->rel_std < 0.0)
      throw std::invalid_argument("gaussian law needs mean > 0 and t >= 0");
    const double var = g->mean * g->rel_std * g->mean * g->rel_std;
    const double shifted_mean = g->mean - var;
    if (shifted_mean <= 0.0)
      throw MomentNegative("gaussian law leaves the physical regime (mean <= variance)");
    const double scale = std::exp(0.5 * (var - 2.0 * g->mean));
    return {scale, scale * shifted_mean, scale * (shifted_mean * shifted_mean + var),
            "gaussian"};
  }
  const auto& m = std::get<SourceMoments>(law);
  validate_moments(m);
  return m;
}

double mean_intensity(const IntensityLaw& law) {
  if (const auto* f = std::get_if<FixedLaw>(&law)) return f->mu;
  if (const auto* g = std::get_if<GaussianLaw>(&law)) return g->mean;
  const auto& m = std::get<SourceMoments>(law);
  return m.m1 / m.m0;
}

double omega2(const SourceMoments& m) {
  validate_moments(m);
  if (m.m2 <= 0.0) throw DegenerateSource("omega2 needs m2 > 0");
  return (1.0 - m.m0 - m.m1) / m.m2;
}

namespace {

// (e^mu - 1 - mu - mu^2/2) / mu^2, evaluated without cancellation
double tail3_over_mu2(double mu) {
  return (std::expm1(mu) - mu - 0.5 * mu * mu) / (mu * mu);
}

}  // namespace

double omega3_fixed(double mu1, double mu2) {
  if (!(mu1 > 0.0 && mu1 < mu2))
    throw IntensityOrderViolation("omega3_fixed needs 0 < mu1 < mu2");
  return tail3_over_mu2(mu2) - tail3_over_mu2(mu1);
}

double weighted_moment(const IntensityLaw& law, int n) {
  if (n < 0) throw std::invalid_argument("moment order must be nonnegative");
  if (const auto* f = std::get_if<FixedLaw>(&law)) {
    return std::pow(f->mu, n) * std::exp(-f->mu);
  }
  if (const auto* g = std::get_if<GaussianLaw>(&law)) {
    const double var = g->mean * g->rel_std * g->mean * g->rel_std;
    const double m = g->mean - var;
    if (m <= 0.0)
      throw MomentNegative("gaussian law leaves the physical regime (mean <= variance)");
    const double scale = std::exp(0.5 * (var - 2.0 * g->mean));
    // raw moments of N(m, var): M_{j+1} = m M_j + j var M_{j-1}
    double prev = 1.0, cur = m;
    if (n == 0) return scale;
    for (int j = 1; j < n; ++j) {
      const double next = m * cur + double(j) * var * prev;
      prev = cur;
      cur = next;
    }
    return scale * cur;
  }
  const auto& m = std::get<SourceMoments>(law);
  validate_moments(m);
  switch (n) {
    case 0: return m.m0;
    case 1: return m.m1;
    case 2: return m.m2;
    default:
      throw std::invalid_argument("bare moments carry only orders 0..2");
  }
}

Omega3Series omega3_moments(const IntensityLaw& law1, const IntensityLaw& law2, int n_max) {
  if (n_max < 3) throw std::invalid_argument("omega3 series needs n_max >= 3");
  const auto dom = decoy_dominance_check(law1, law2, n_max);
  if (!dom.pass)
    throw AssumptionViolated("decoy dominance fails at n = " +
                             std::to_string(dom.first_failing_n));
  const double e1_2 = weighted_moment(law1, 2);
  const double e2_2 = weighted_moment(law2, 2);
  if (e1_2 <= 0.0) throw DegenerateSource("omega3 series needs E1[mu^2 e^-mu] > 0");

  Omega3Series out;
  out.n_max = n_max;
  double fact = 2.0;  // (n-1)! running, starts at 2! for n = 3
  for (int n = 3; n <= n_max; ++n) {
    fact *= double(n);
    out.value += (weighted_moment(law2, n) - weighted_moment(law1, n) * e2_2 / e1_2) / fact;
  }
  // Remainder <= sum_{n > n_max} E2[mu^n e^-mu] / n!: take 40 explicit terms
  // and close with a geometric tail in the observed term ratio.
  double rem = 0.0;
  double last = 0.0;
  for (int n = n_max + 1; n <= n_max + 40; ++n) {
    fact *= double(n);
    last = weighted_moment(law2, n) / fact;
    rem += last;
  }
  const double next = weighted_moment(law2, n_max + 41) / (fact * double(n_max + 41));
  const double ratio = (last > 0.0) ? next / last : 0.0;
  rem += (ratio < 1.0) ? next / (1.0 - ratio) : std::numeric_limits<double>::infinity();
  out.remainder_bound = rem;
  return out;
}

DominanceReport decoy_dominance_check(const IntensityLaw& law1, const IntensityLaw& law2,
                                      int n_max) {
  if (n_max < 3) throw std::invalid_argument("dominance check needs n_max >= 3");
  const double e1_2 = weighted_moment(law1, 2);
  const double e2_2 = weighted_moment(law2, 2);
  for (int n = 3; n <= n_max; ++n) {
    if (weighted_moment(law2, n) * e1_2 < weighted_moment(law1, n) * e2_2)
      return {false, n};
  }
  return {true, -1};
}

}  // namespace dbb84
