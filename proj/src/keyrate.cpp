#include "dbb84/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace dbb84 {
namespace {

double law_t(const IntensityLaw& law) {
  if (const auto* g = std::get_if<GaussianLaw>(&law)) return g->rel_std;
  return 0.0;
}

IntensityLaw law_with_mean(const IntensityLaw& tmpl, double mean) {
  if (const auto* g = std::get_if<GaussianLaw>(&tmpl)) return GaussianLaw{mean, g->rel_std};
  return FixedLaw{mean};
}

double ec_ratio(const RatePack& r, EcRateIndex idx) {
  return idx == EcRateIndex::Intensity1 ? r.s1 / r.p1 : r.s2 / r.p2;
}

}  // namespace

KeyRatePoint key_rate(const KeyRateInputs& in) {
  KeyRatePoint pt;
  pt.mu1 = mean_intensity(in.model.law1);
  pt.mu2 = mean_intensity(in.model.law2);
  pt.t = law_t(in.model.law2);
  pt.Ms = in.Ms;
  pt.beta = in.beta;
  pt.variant = in.variant;

  PulseBudgets b = in.budgets;
  if (b.Ns <= 0) b = budgets_from_ms(in.model, in.Ms, in.signal_index);

  ProtocolParams params;
  params.beta = in.beta;
  params.law1 = in.model.law1;
  params.law2 = in.model.law2;
  params.signal_index = in.signal_index;
  params.N0 = b.N0;
  params.N1 = b.N1;
  params.N2 = b.N2;
  params.Ns = b.Ns;
  params.eta = in.eta;

  const ObservedCounts counts = expected_counts(in.model, b, in.signal_index);

  PipelineOptions opt;
  opt.variant = in.variant;
  opt.method = in.method;
  opt.auto_method = in.auto_method;
  const SacrificeResult res = pipeline(params, counts, opt);

  pt.S = res.S;
  pt.aborted = res.aborted;
  const RatePack rates = expected_rates(in.model);
  const double ec = in.eta * binary_entropy(ec_ratio(rates, in.ec_index));
  pt.raw_rate = (double(counts.Ms) - double(res.S) - ec * double(counts.Ms)) / double(b.Ns);
  pt.R = (res.aborted || pt.raw_rate < 0.0) ? 0.0 : pt.raw_rate;
  return pt;
}

double asymptotic_rate(const ChannelModel& model, double eta, EcRateIndex ec_index) {
  const RatePack r = expected_rates(model);
  const SourceMoments m1 = moments(model.law1);
  const SourceMoments m2 = moments(model.law2);
  const double w2 = omega2(m1);

  // partition coefficients at their means, budgets cancel
  const double c10 = m1.m0, c11 = m1.m1;
  const double c20 = m2.m0, c21 = m2.m1, c22 = w2 * m2.m2;
  const double c12 = 1.0 - c10 - c11;
  const double det = c11 * c22 - c21 * c12;
  if (!(det > 0.0)) return 0.0;

  const double q0 = model.p0;
  const double m1_rate = r.p1 - r.s1;  // detected-and-correct rate, intensity 1
  const double m2_rate = r.p2 - r.s2;
  const double a1 =
      std::max((c22 * (m1_rate - 0.5 * q0 * c10) - c12 * (m2_rate - 0.5 * q0 * c20)) / det, 0.0);
  const double b1 = std::max((r.s1 - 0.5 * q0 * c10) / c11, 0.0);
  if (!(a1 + b1 > 0.0)) return 0.0;

  const SourceMoments sig = moments(model.law2);  // signal intensity is mu2
  const double j0 = sig.m0 * q0;
  const double j1 = sig.m1 * (a1 + b1);
  const double ratio = std::min(b1 / (a1 + b1), 0.5);
  const double ec = eta * binary_entropy(ec_ratio(r, ec_index));
  return j0 + j1 * (1.0 - binary_entropy(ratio)) - ec * r.p2;
}

std::vector<KeyRatePoint> sweep(const KeyRateInputs& base, const SweepGrid& grid, int jobs) {
  std::vector<double> mu1s = grid.mu1.empty()
                                 ? std::vector<double>{mean_intensity(base.model.law1)}
                                 : grid.mu1;
  std::vector<double> mu2s = grid.mu2.empty()
                                 ? std::vector<double>{mean_intensity(base.model.law2)}
                                 : grid.mu2;
  std::vector<double> ts = grid.t.empty() ? std::vector<double>{law_t(base.model.law2)}
                                          : grid.t;
  std::vector<double> mss = grid.Ms.empty() ? std::vector<double>{base.Ms} : grid.Ms;

  struct Task {
    double mu1, mu2, t, Ms;
  };
  std::vector<Task> tasks;
  for (double m1 : mu1s)
    for (double m2 : mu2s)
      for (double t : ts)
        for (double ms : mss) tasks.push_back({m1, m2, t, ms});

  std::vector<KeyRatePoint> out(tasks.size());
  auto eval = [&](std::size_t i) {
    const Task& tk = tasks[i];
    KeyRatePoint pt;
    pt.mu1 = tk.mu1;
    pt.mu2 = tk.mu2;
    pt.t = tk.t;
    pt.Ms = tk.Ms;
    pt.beta = base.beta;
    pt.variant = base.variant;
    if (!(tk.mu1 < tk.mu2)) {  // outside the decoy ordering; plottable abort
      pt.aborted = true;
      out[i] = pt;
      return;
    }
    KeyRateInputs in = base;
    in.Ms = tk.Ms;
    in.budgets = {};
    in.model.law1 = (tk.t > 0.0) ? IntensityLaw(GaussianLaw{tk.mu1, tk.t})
                                 : IntensityLaw(FixedLaw{tk.mu1});
    in.model.law2 = (tk.t > 0.0) ? IntensityLaw(GaussianLaw{tk.mu2, tk.t})
                                 : IntensityLaw(FixedLaw{tk.mu2});
    try {
      out[i] = key_rate(in);
    } catch (const std::exception&) {
      pt.aborted = true;
      out[i] = pt;
    }
  };

  jobs = std::max(1, jobs);
  if (jobs == 1 || tasks.size() < 2) {
    for (std::size_t i = 0; i < tasks.size(); ++i) eval(i);
  } else {
    std::vector<std::thread> pool;
    std::size_t stride = std::size_t(jobs);
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = std::size_t(w); i < tasks.size(); i += stride) eval(i);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace dbb84
