#include "dbb84/channel.hpp"

#include <cmath>

#include "dbb84/binomial.hpp"

namespace dbb84 {
namespace {

double detection_rate(const ChannelModel& m, const IntensityLaw& law) {
  // 1 - E[e^{-alpha mu}] + p0; the expectation reuses the source-moment
  // closed forms with the intensity scaled by alpha.
  double e;
  if (const auto* f = std::get_if<FixedLaw>(&law)) {
    e = std::exp(-m.alpha * f->mu);
  } else if (const auto* g = std::get_if<GaussianLaw>(&law)) {
    const double mean = m.alpha * g->mean;
    const double var = mean * g->rel_std * mean * g->rel_std;
    e = std::exp(0.5 * (var - 2.0 * mean));
  } else {
    throw std::invalid_argument("channel rates need a fixed or gaussian law");
  }
  return 1.0 - e + m.p0;
}

std::int64_t round_count(double x) { return std::int64_t(std::llround(x)); }

}  // namespace

void ChannelModel::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0,1]");
  if (!(p0 >= 0.0 && p0 < 1.0)) throw std::invalid_argument("p0 must be in [0,1)");
  if (!(s >= 0.0 && s < 0.5)) throw std::invalid_argument("s must be in [0,1/2)");
  if (!(mean_intensity(law1) < mean_intensity(law2)))
    throw std::invalid_argument("decoy analysis assumes mu1 < mu2");
}

void ObservedCounts::validate(std::int64_t N0, std::int64_t N1, std::int64_t N2,
                              std::int64_t Ns) const {
  if (Ms < 0 || M0 < 0 || M1 < 0 || M2 < 0 || M3 < 0 || M4 < 0)
    throw InvalidCounts("counts must be nonnegative");
  if (M0 > N0) throw InvalidCounts("M0 exceeds N0");
  if (M1 + M3 > N1) throw InvalidCounts("M1 + M3 exceeds N1");
  if (M2 + M4 > N2) throw InvalidCounts("M2 + M4 exceeds N2");
  if (Ms > Ns) throw InvalidCounts("Ms exceeds Ns");
}

RatePack expected_rates(const ChannelModel& model) {
  model.validate();
  RatePack r;
  r.p1 = detection_rate(model, model.law1);
  r.p2 = detection_rate(model, model.law2);
  r.s1 = model.s * (r.p1 - model.p0) + 0.5 * model.p0;
  r.s2 = model.s * (r.p2 - model.p0) + 0.5 * model.p0;
  r.p_vac = model.p0;
  r.s_vac = 0.5 * model.p0;
  return r;
}

PulseBudgets budgets_from_ms(const ChannelModel& model, double Ms, int signal_index) {
  const RatePack r = expected_rates(model);
  const double ps = (signal_index == 1) ? r.p1 : r.p2;
  PulseBudgets b;
  b.Ns = round_count(Ms / ps);
  b.N0 = b.N1 = b.N2 = round_count(double(b.Ns) / 10.0);
  return b;
}

ObservedCounts expected_counts(const ChannelModel& model, const PulseBudgets& budgets,
                               int signal_index) {
  const RatePack r = expected_rates(model);
  ObservedCounts c;
  c.M0 = round_count(model.p0 * double(budgets.N0));
  c.M1 = round_count((r.p1 - r.s1) * double(budgets.N1));
  c.M2 = round_count((r.p2 - r.s2) * double(budgets.N2));
  c.M3 = round_count(r.s1 * double(budgets.N1));
  c.M4 = round_count(r.s2 * double(budgets.N2));
  const double ps = (signal_index == 1) ? r.p1 : r.p2;
  c.Ms = round_count(ps * double(budgets.Ns));
  c.validate(budgets.N0, budgets.N1, budgets.N2, budgets.Ns);
  return c;
}

SplitRng SplitRng::for_stream(std::uint64_t seed, std::uint64_t stream) {
  SplitRng mix(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  mix.next_u64();
  return SplitRng(mix.next_u64());
}

std::uint64_t SplitRng::next_u64() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitRng::next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

std::int64_t sample_binomial(SplitRng& rng, std::int64_t n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - sample_binomial(rng, n, 1.0 - p);

  const double u = rng.next_unit();
  const std::int64_t mode = std::int64_t((double(n) + 1.0) * p);
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  auto pmf_log = [&](std::int64_t i) {
    double v = std::lgamma(double(n) + 1.0) - std::lgamma(double(i) + 1.0) -
               std::lgamma(double(n - i) + 1.0);
    if (i > 0) v += double(i) * log_p;
    if (i < n) v += double(n - i) * log_q;
    return v;
  };
  double cdf_mode = std::exp(log_binom_tail_lower(n, p, mode));
  double term = std::exp(pmf_log(mode));
  if (u < cdf_mode) {
    // walk down from the mode
    double acc = cdf_mode;
    std::int64_t i = mode;
    double t = term;
    while (i > 0 && acc - t >= u) {
      acc -= t;
      t *= double(i) * (1.0 - p) / ((double(n) - double(i) + 1.0) * p);
      --i;
    }
    return i;
  }
  // walk up
  double acc = cdf_mode;
  std::int64_t i = mode;
  double t = term;
  while (i < n) {
    t *= (double(n) - double(i)) / (double(i) + 1.0) * p / (1.0 - p);
    ++i;
    acc += t;
    if (acc >= u) return i;
  }
  return n;
}

ObservedCounts sample_counts(const ChannelModel& model, const PulseBudgets& budgets,
                             int signal_index, std::uint64_t seed) {
  const RatePack r = expected_rates(model);
  ObservedCounts c;
  {
    SplitRng g = SplitRng::for_stream(seed, 0);
    c.M0 = sample_binomial(g, budgets.N0, model.p0);
  }
  {
    // joint (error, correct, none) trinomial keeps M1 + M3 <= N1
    SplitRng g = SplitRng::for_stream(seed, 1);
    c.M3 = sample_binomial(g, budgets.N1, r.s1);
    c.M1 = sample_binomial(g, budgets.N1 - c.M3, (r.p1 - r.s1) / (1.0 - r.s1));
  }
  {
    SplitRng g = SplitRng::for_stream(seed, 2);
    c.M4 = sample_binomial(g, budgets.N2, r.s2);
    c.M2 = sample_binomial(g, budgets.N2 - c.M4, (r.p2 - r.s2) / (1.0 - r.s2));
  }
  {
    SplitRng g = SplitRng::for_stream(seed, 3);
    const double ps = (signal_index == 1) ? r.p1 : r.p2;
    c.Ms = sample_binomial(g, budgets.Ns, ps);
  }
  c.validate(budgets.N0, budgets.N1, budgets.N2, budgets.Ns);
  return c;
}

}  // namespace dbb84
