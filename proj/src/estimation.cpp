#include "dbb84/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "dbb84/interval.hpp"

namespace dbb84 {
namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

// InfoGeo is only valid on part of the parameter range; estimation-level
// callers fall back to the always-valid KL bound outside it.
double pp_lower(std::int64_t n, double p, Alpha a, BoundMethod m, bool am) {
  const BoundMethod r = resolve_method(m, am, n, a);
  const BinomialModel model{n, clamp01(p)};
  try {
    return percent_point_lower(model, a, r);
  } catch (const MethodOutOfDomain&) {
    return percent_point_lower(model, a, BoundMethod::ChernoffKL);
  }
}

double pp_upper(std::int64_t n, double p, Alpha a, BoundMethod m, bool am) {
  const BoundMethod r = resolve_method(m, am, n, a);
  const BinomialModel model{n, clamp01(p)};
  try {
    return percent_point_upper(model, a, r);
  } catch (const MethodOutOfDomain&) {
    return percent_point_upper(model, a, BoundMethod::ChernoffKL);
  }
}

double est_lower(std::int64_t n, std::int64_t k, Alpha a, BoundMethod m, bool am) {
  const BoundMethod r = resolve_method(m, am, n, a);
  try {
    return interval_lower(n, k, a, r);
  } catch (const MethodOutOfDomain&) {
    return interval_lower(n, k, a, BoundMethod::ChernoffKL);
  }
}

double est_upper(std::int64_t n, std::int64_t k, Alpha a, BoundMethod m, bool am) {
  const BoundMethod r = resolve_method(m, am, n, a);
  try {
    return interval_upper(n, k, a, r);
  } catch (const MethodOutOfDomain&) {
    return interval_upper(n, k, a, BoundMethod::ChernoffKL);
  }
}

// p_per^+ with an estimated (possibly fractional) trial count.
double p_per_upper(double trials, double p, Alpha a, BoundMethod m, bool am) {
  BoundMethod r = resolve_method(m, am, std::int64_t(trials), a);
  const double t = (r == BoundMethod::Exact) ? std::floor(trials) : trials;
  if (!(t >= 1.0)) return 0.5;
  try {
    return percent_point_upper_real(t, clamp01(p), a, r) / t;
  } catch (const MethodOutOfDomain&) {
    return percent_point_upper_real(t, clamp01(p), a, BoundMethod::ChernoffKL) / t;
  }
}

}  // namespace

void ProtocolParams::validate() const {
  if (beta < 1) throw std::invalid_argument("beta must be a positive integer");
  if (N0 <= 0 || N1 <= 0 || N2 <= 0 || Ns <= 0)
    throw std::invalid_argument("pulse budgets must be positive");
  if (!(eta >= 1.0)) throw std::invalid_argument("eta must be >= 1");
  if (signal_index != 1 && signal_index != 2)
    throw std::invalid_argument("signal_index must be 1 or 2");
  if (!(mean_intensity(law1) < mean_intensity(law2)))
    throw std::invalid_argument("decoy analysis assumes mu1 < mu2");
}

EpsilonSchedule EpsilonSchedule::non_improved(int beta) {
  const Alpha all = Alpha::from_log2_exponent(2.0 * beta + 8.0);
  return {all, all, all, all, all, all, all, all};
}

EpsilonSchedule EpsilonSchedule::improved(int beta) {
  const Alpha wide = Alpha::from_log2_exponent(double(beta) + 6.0);
  const Alpha narrow = Alpha::from_log2_exponent(2.0 * beta + 7.0);
  EpsilonSchedule s{wide, narrow, narrow, narrow, wide, wide, wide, narrow};
  return s;
}

EpsilonSchedule EpsilonSchedule::preset(Variant v, int beta) {
  return v == Variant::Improved ? improved(beta) : non_improved(beta);
}

BoundMethod resolve_method(BoundMethod requested, bool auto_method, std::int64_t trials,
                           Alpha alpha) {
  if (!auto_method) return requested;
  return exact_admissible(trials, alpha) ? BoundMethod::Exact : BoundMethod::ChernoffKL;
}

Iv PartitionBox::n12() const {
  return {double(n1_total) - n10.hi - n11.hi, double(n1_total) - n10.lo - n11.lo};
}

StepOneEstimates step1_counts(const ProtocolParams& p, const ObservedCounts& c,
                              const EpsilonSchedule& s, BoundMethod m, bool am) {
  StepOneEstimates e;
  e.m0 = double(p.N0) * est_lower(p.N0, c.M0, s.m0, m, am);
  e.m1 = double(p.N1) * est_lower(p.N1, c.M1, s.m1, m, am);
  e.m2 = double(p.N2) * est_upper(p.N2, c.M2, s.m2, m, am);
  e.m3 = double(p.N1) * est_upper(p.N1, c.M3, s.m3, m, am);
  return e;
}

PartitionEstimates step2_partition(const ProtocolParams& p, const SourceMoments& m1,
                                   const SourceMoments& m2, double w2,
                                   const EpsilonSchedule& s, BoundMethod m, bool am) {
  PartitionEstimates n;
  n.n10 = pp_lower(p.N1, m1.m0, s.part, m, am);
  n.n11 = pp_lower(p.N1, m1.m1, s.part, m, am);
  n.n20 = pp_lower(p.N2, m2.m0, s.part, m, am);
  n.n21 = pp_lower(p.N2, m2.m1, s.part, m, am);
  n.n22 = pp_lower(p.N2, w2 * m2.m2, s.part, m, am);
  return n;
}

ChannelEstimates step3_channel(const ProtocolParams& p, const StepOneEstimates& m,
                               const PartitionEstimates& n, double q0) {
  const double n12 = n.n12(p.N1);
  const double det = n.n11 * n.n22 - n.n21 * n12;
  if (!(det > 0.0))
    throw ConditionViolated("partition determinant is not positive");
  if (!(n.n11 > 0.0))
    throw ConditionViolated("single-photon partition estimate vanished");
  ChannelEstimates est;
  est.q0 = q0;
  const double num =
      n.n22 * (m.m1 - 0.5 * q0 * n.n10) - n12 * (m.m2 - 0.5 * q0 * n.n20);
  est.a1 = std::max(num / det, 0.0);
  est.b1 = std::max((m.m3 - 0.5 * q0 * n.n10) / n.n11, 0.0);
  return est;
}

RawKeyEstimates step4_rawkey(const ProtocolParams& p, const ChannelEstimates& est,
                             const SourceMoments& sig, const EpsilonSchedule& s,
                             BoundMethod m, bool am) {
  RawKeyEstimates r;
  r.j0 = pp_lower(p.Ns, sig.m0 * est.q0, s.j0, m, am);
  const double sum = est.a1 + est.b1;
  if (!(sum > 0.0)) {
    r.j1 = 0.0;
    r.r1 = 0.5;  // worst case when nothing is known about single photons
    return r;
  }
  r.j1 = pp_lower(p.Ns, sig.m1 * sum, s.j1, m, am);
  if (!(r.j1 >= 1.0)) {
    r.r1 = 0.5;
    return r;
  }
  r.r1 = p_per_upper(r.j1, est.b1 / sum, s.r, m, am);
  return r;
}

double step5_leak(double Ms, const RawKeyEstimates& r) {
  return Ms - r.j0 - r.j1 * (1.0 - binary_entropy(std::min(r.r1, 0.5)));
}

std::int64_t step6_sacrifice(const ProtocolParams& p, std::int64_t Ms, double phi2,
                             bool conditions_ok) {
  const std::int64_t sentinel = p.code_dim > 0 ? p.code_dim : Ms;
  if (!conditions_ok) return sentinel;
  const double s = std::ceil(std::max(phi2, 0.0)) + 2.0 * p.beta + 5.0;
  return std::clamp<std::int64_t>(std::int64_t(s), 0, Ms);
}

PartitionBox build_omega1(const ProtocolParams& p, const SourceMoments& m1,
                          const SourceMoments& m2, double w2, const EpsilonSchedule& s,
                          BoundMethod m, bool am) {
  PartitionBox box;
  box.n1_total = p.N1;
  auto coord = [&](std::int64_t n, double coeff) {
    return Iv{pp_lower(n, coeff, s.part, m, am), pp_upper(n, coeff, s.part, m, am)};
  };
  box.n10 = coord(p.N1, m1.m0);
  box.n11 = coord(p.N1, m1.m1);
  box.n20 = coord(p.N2, m2.m0);
  box.n21 = coord(p.N2, m2.m1);
  box.n22 = coord(p.N2, w2 * m2.m2);
  return box;
}

bool check_condition1(const PartitionBox& box, std::array<double, 3>* margins) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::array<double, 3> mg{-kInf, -kInf, -kInf};
  const double slack = double(box.n1_total) - box.n10.lo - box.n11.lo;  // largest N1^(2)
  if (slack > 0.0 && box.n11.lo > 0.0 && box.n10.hi > 0.0) {
    mg[0] = box.n11.lo * box.n22.lo - slack * box.n21.hi;
    mg[1] = box.n22.lo * box.n10.lo - slack * box.n20.hi;
    mg[2] = box.n22.lo / slack + box.n20.lo / box.n10.hi - 2.0 * box.n21.hi / box.n11.lo;
  }
  if (margins) *margins = mg;
  return mg[0] > 0.0 && mg[1] > 0.0 && mg[2] > 0.0;
}

namespace {

struct BoxQuantities {
  Iv det, tnum;  // determinant and the shared numerator
  Iv n12;
  bool det_positive = false;
};

BoxQuantities box_core(const StepOneEstimates& m, double q0, const PartitionBox& box) {
  BoxQuantities q;
  q.n12 = box.n12();
  q.det = iv::sub(iv::mul(box.n11, box.n22), iv::mul(box.n21, q.n12));
  q.det_positive = q.det.lo > 0.0;
  const Iv half_q = iv::point(0.5 * q0);
  const Iv t1 = iv::sub(iv::point(m.m1), iv::mul(half_q, box.n10));
  const Iv t2 = iv::sub(iv::point(m.m2), iv::mul(half_q, box.n20));
  q.tnum = iv::sub(iv::mul(box.n22, t1), iv::mul(q.n12, t2));
  return q;
}

}  // namespace

bool check_condition2(const StepOneEstimates& m, double q0, const PartitionBox& box,
                      std::array<double, 5>* margins) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::array<double, 5> mg{-kInf, -kInf, -kInf, -kInf, -kInf};
  const BoxQuantities q = box_core(m, q0, box);
  const Iv half_q = iv::point(0.5 * q0);
  // B term never needs the determinant
  mg[4] = iv::sub(iv::point(m.m3), iv::mul(half_q, box.n10)).lo;
  if (q.det_positive) {
    const Iv td = iv::div(q.tnum, q.det);
    const Iv a01 = iv::sub(
        iv::sub(iv::point(m.m2), iv::mul(half_q, iv::add(box.n20, box.n22))),
        iv::mul(box.n21, td));
    const Iv a11 = iv::sub(iv::sub(iv::point(m.m2), iv::mul(half_q, box.n20)),
                           iv::mul(iv::add(box.n22, box.n21), td));
    const Iv a12 = iv::mul(q.n12, td);
    const Iv a22 = iv::sub(iv::sub(iv::point(m.m1), iv::mul(half_q, box.n10)),
                           iv::mul(box.n11, td));
    mg[0] = a01.lo;
    mg[1] = a11.lo;
    mg[2] = a12.lo;
    mg[3] = a22.lo;
  }
  if (margins) *margins = mg;
  return mg[0] > 0.0 && mg[1] > 0.0 && mg[2] > 0.0 && mg[3] > 0.0 && mg[4] > 0.0;
}

bool check_condition3(const StepOneEstimates& m, double q0, const PartitionBox& box,
                      double* margin) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const BoxQuantities q = box_core(m, q0, box);
  if (!q.det_positive || !(box.n11.lo > 0.0)) {
    if (margin) *margin = -kInf;
    return false;
  }
  const Iv a = iv::clamp_nonneg(iv::div(q.tnum, q.det));
  const Iv bnum = iv::sub(iv::point(m.m3), iv::mul(iv::point(0.5 * q0), box.n10));
  const Iv b = iv::clamp_nonneg(iv::div(bnum, box.n11));
  if (b.hi == 0.0) {
    if (margin) *margin = 0.125;  // ratio is identically zero
    return true;
  }
  const double denom = iv::down(a.lo + b.hi);
  if (!(denom > 0.0)) {
    if (margin) *margin = -kInf;
    return false;
  }
  const double ratio_hi = iv::up(b.hi / denom);
  if (margin) *margin = 0.125 - ratio_hi;
  return ratio_hi <= 0.125;
}

double vacuum_adjust_q0(const ProtocolParams& p, std::int64_t M0, double q,
                        const EpsilonSchedule& s, BoundMethod m, bool am) {
  if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("contamination q must be in [0,1)");
  const double cut = std::ceil(pp_upper(p.N0, q, s.m0, m, am));
  const auto c = std::int64_t(cut);
  if (M0 < c)
    throw AdjustedCountNegative("observed vacuum count below the contamination quantile");
  if (p.N0 - c < 1)
    throw AdjustedCountNegative("contamination quantile exhausts the vacuum pulses");
  return est_upper(p.N0 - c, M0 - c, s.m0, m, am);
}

double existing_q1(double m13_lower, double m24_upper, double q0,
                   const PartitionEstimates& n, const ProtocolParams& p) {
  const double n12 = n.n12(p.N1);
  const double det = n.n11 * n.n22 - n.n21 * n12;
  if (!(det > 0.0))
    throw ConditionViolated("partition determinant is not positive");
  return (n.n22 * (m13_lower - q0 * n.n10) - n12 * (m24_upper - q0 * n.n20)) / det;
}

ExistingMethodResult existing_method(const ProtocolParams& p, const ObservedCounts& c,
                                     const PipelineOptions& opt) {
  p.validate();
  c.validate(p.N0, p.N1, p.N2, p.Ns);
  const EpsilonSchedule s = EpsilonSchedule::preset(opt.variant, p.beta);
  const SourceMoments mom1 = moments(p.law1);
  const SourceMoments mom2 = moments(p.law2);
  const double w2 = omega2(mom1);
  const StepOneEstimates m = step1_counts(p, c, s, opt.method, opt.auto_method);
  const double q0 = opt.vacuum_q
                        ? vacuum_adjust_q0(p, c.M0, *opt.vacuum_q, s, opt.method, opt.auto_method)
                        : m.m0 / double(p.N0);
  const PartitionEstimates n =
      step2_partition(p, mom1, mom2, w2, s, opt.method, opt.auto_method);
  const ChannelEstimates est = step3_channel(p, m, n, q0);
  const double m13 =
      double(p.N1) * est_lower(p.N1, c.M1 + c.M3, s.m1, opt.method, opt.auto_method);
  const double m24 =
      double(p.N2) * est_upper(p.N2, c.M2 + c.M4, s.m2, opt.method, opt.auto_method);
  ExistingMethodResult out;
  out.q1 = existing_q1(m13, m24, q0, n, p);
  ChannelEstimates legacy;
  legacy.q0 = q0;
  legacy.a1 = std::max(out.q1 - est.b1, 0.0);
  legacy.b1 = est.b1;
  const SourceMoments sig = moments(p.signal_law());
  const RawKeyEstimates raw = step4_rawkey(p, legacy, sig, s, opt.method, opt.auto_method);
  out.phi = step5_leak(double(c.Ms), raw);
  return out;
}

SacrificeResult pipeline(const ProtocolParams& p, const ObservedCounts& c,
                         const PipelineOptions& opt) {
  p.validate();
  c.validate(p.N0, p.N1, p.N2, p.Ns);
  const EpsilonSchedule s = EpsilonSchedule::preset(opt.variant, p.beta);

  SacrificeResult out;
  out.step1 = step1_counts(p, c, s, opt.method, opt.auto_method);

  double q0;
  if (opt.vacuum_q) {
    try {
      q0 = vacuum_adjust_q0(p, c.M0, *opt.vacuum_q, s, opt.method, opt.auto_method);
    } catch (const AdjustedCountNegative& e) {
      out.aborted = true;
      out.abort_reason = e.what();
      out.S = p.code_dim > 0 ? p.code_dim : c.Ms;
      out.phi2 = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
  } else {
    q0 = out.step1.m0 / double(p.N0);
  }
  out.channel.q0 = q0;

  std::vector<std::pair<IntensityLaw, IntensityLaw>> thetas = opt.theta_set;
  if (thetas.empty()) thetas.push_back({p.law1, p.law2});

  constexpr double kInf = std::numeric_limits<double>::infinity();
  bool all_pass = true;
  ConditionReport worst;
  worst.pass1 = worst.pass2 = worst.pass3 = true;
  worst.margins1 = {kInf, kInf, kInf};
  worst.margins2 = {kInf, kInf, kInf, kInf, kInf};
  worst.margin3 = kInf;
  double sup_phi = -kInf;
  bool have_phi = false;

  for (const auto& [law1, law2] : thetas) {
    ProtocolParams pt = p;
    pt.law1 = law1;
    pt.law2 = law2;
    pt.validate();
    const SourceMoments mom1 = moments(law1);
    const SourceMoments mom2 = moments(law2);
    const double w2 = omega2(mom1);

    const PartitionBox box =
        build_omega1(pt, mom1, mom2, w2, s, opt.method, opt.auto_method);
    ConditionReport rep;
    rep.pass1 = check_condition1(box, &rep.margins1);
    rep.pass2 = check_condition2(out.step1, q0, box, &rep.margins2);
    rep.pass3 = check_condition3(out.step1, q0, box, &rep.margin3);
    worst.pass1 &= rep.pass1;
    worst.pass2 &= rep.pass2;
    worst.pass3 &= rep.pass3;
    for (int i = 0; i < 3; ++i) worst.margins1[i] = std::min(worst.margins1[i], rep.margins1[i]);
    for (int i = 0; i < 5; ++i) worst.margins2[i] = std::min(worst.margins2[i], rep.margins2[i]);
    worst.margin3 = std::min(worst.margin3, rep.margin3);
    all_pass &= rep.all();

    const PartitionEstimates n =
        step2_partition(pt, mom1, mom2, w2, s, opt.method, opt.auto_method);
    const double det = n.n11 * n.n22 - n.n21 * n.n12(pt.N1);
    if (det > 0.0 && n.n11 > 0.0) {
      const ChannelEstimates est = step3_channel(pt, out.step1, n, q0);
      const SourceMoments sig = moments(pt.signal_law());
      const RawKeyEstimates raw =
          step4_rawkey(pt, est, sig, s, opt.method, opt.auto_method);
      const double phi = step5_leak(double(c.Ms), raw);
      if (!have_phi || phi > sup_phi) {
        sup_phi = phi;
        out.channel = est;
        out.step2 = n;
        out.J0 = raw.j0;
        out.J1 = raw.j1;
        out.r1 = raw.r1;
        have_phi = true;
      }
    }
  }

  out.conditions = worst;
  out.aborted = !all_pass;
  if (have_phi) {
    out.phi2 = sup_phi;
    out.phi2_clamped = sup_phi < 0.0;
  } else {
    out.phi2 = std::numeric_limits<double>::quiet_NaN();
    out.aborted = true;
    if (out.abort_reason.empty()) out.abort_reason = "channel estimates not computable";
  }
  if (out.aborted && out.abort_reason.empty()) out.abort_reason = "condition check failed";
  out.S = step6_sacrifice(p, c.Ms, have_phi ? sup_phi : 0.0, !out.aborted);
  return out;
}

}  // namespace dbb84
