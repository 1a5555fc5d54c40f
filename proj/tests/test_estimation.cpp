#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dbb84/estimation.hpp"
#include "dbb84/interval.hpp"
#include "oracle.hpp"

using namespace dbb84;

namespace {

ProtocolParams desk_params(std::int64_t n = 1000000, int beta = 80) {
  ProtocolParams p;
  p.beta = beta;
  p.law1 = FixedLaw{0.1};
  p.law2 = FixedLaw{0.5};
  p.signal_index = 2;
  p.N0 = p.N1 = p.N2 = n;
  p.Ns = 10 * n;
  return p;
}

// budgets derived from a 1e7-bit raw key at the reference channel, the
// regime the numerical study runs in
ProtocolParams paper_scale_params(int beta = 80) {
  ChannelModel m;
  const PulseBudgets b = budgets_from_ms(m, 1e7, 2);
  ProtocolParams p;
  p.beta = beta;
  p.law1 = m.law1;
  p.law2 = m.law2;
  p.signal_index = 2;
  p.N0 = b.N0;
  p.N1 = b.N1;
  p.N2 = b.N2;
  p.Ns = b.Ns;
  return p;
}

// counts consistent with the rate model at the paper's channel point
ObservedCounts paper_counts(const ProtocolParams& p, double alpha = 1e-3, double p0 = 4e-7,
                            double s = 0.03) {
  ChannelModel m;
  m.alpha = alpha;
  m.p0 = p0;
  m.s = s;
  m.law1 = p.law1;
  m.law2 = p.law2;
  return expected_counts(m, {p.N0, p.N1, p.N2, p.Ns}, p.signal_index);
}

}  // namespace

TEST_CASE("epsilon schedules follow the printed presets") {
  const EpsilonSchedule ni = EpsilonSchedule::non_improved(80);
  CHECK(ni.m0.log() == doctest::Approx(-168.0 * M_LN2));
  CHECK(ni.part.log() == doctest::Approx(-168.0 * M_LN2));
  CHECK(ni.r.log() == doctest::Approx(-168.0 * M_LN2));
  const EpsilonSchedule im = EpsilonSchedule::improved(80);
  CHECK(im.m0.log() == doctest::Approx(-86.0 * M_LN2));
  CHECK(im.part.log() == doctest::Approx(-86.0 * M_LN2));
  CHECK(im.j0.log() == doctest::Approx(-86.0 * M_LN2));
  CHECK(im.j1.log() == doctest::Approx(-86.0 * M_LN2));
  CHECK(im.m1.log() == doctest::Approx(-167.0 * M_LN2));
  CHECK(im.m2.log() == doctest::Approx(-167.0 * M_LN2));
  CHECK(im.m3.log() == doctest::Approx(-167.0 * M_LN2));
  CHECK(im.r.log() == doctest::Approx(-167.0 * M_LN2));
}

TEST_CASE("step 1: zero counts give zero lower limits; schedules order the estimates") {
  const ProtocolParams p = desk_params();
  ObservedCounts c = paper_counts(p);
  c.M0 = 0;
  const EpsilonSchedule ni = EpsilonSchedule::non_improved(80);
  const StepOneEstimates e = step1_counts(p, c, ni, BoundMethod::ChernoffKL);
  CHECK(e.m0 == 0.0);

  const ObservedCounts full = paper_counts(p);
  const StepOneEstimates a = step1_counts(p, full, ni, BoundMethod::ChernoffKL);
  const StepOneEstimates b =
      step1_counts(p, full, EpsilonSchedule::improved(80), BoundMethod::ChernoffKL);
  CHECK(b.m1 >= a.m1);  // larger epsilon, tighter lower limit
  CHECK(b.m2 <= a.m2);
  CHECK(b.m3 <= a.m3);
  CHECK(b.m0 >= a.m0);
}

TEST_CASE("step 2: fixed coefficients, quantile limits, gaussian degeneracy") {
  ProtocolParams p = desk_params();
  const SourceMoments m1 = moments(p.law1);
  const SourceMoments m2 = moments(p.law2);
  const double w2 = omega2(m1);

  EpsilonSchedule s = EpsilonSchedule::non_improved(80);
  s.part = Alpha::from_value(1e-3);
  const PartitionEstimates n = step2_partition(p, m1, m2, w2, s, BoundMethod::Exact);
  CHECK(n.n10 == 903929.0);  // frozen exact percent point at 1e6, e^-0.1, 1e-3
  CHECK(n.n10 < double(p.N1) * m1.m0);

  // alpha -> 1 pushes the percent point to the central region
  s.part = Alpha::from_value(0.4999);
  const PartitionEstimates c = step2_partition(p, m1, m2, w2, s, BoundMethod::Exact);
  CHECK(std::fabs(c.n10 - double(p.N1) * m1.m0) < 3.0);

  ProtocolParams g = p;
  g.law1 = GaussianLaw{0.1, 0.0};
  g.law2 = GaussianLaw{0.5, 0.0};
  const PartitionEstimates ng = step2_partition(g, moments(g.law1), moments(g.law2),
                                                omega2(moments(g.law1)), s, BoundMethod::Exact);
  CHECK(ng.n10 == c.n10);
  CHECK(ng.n22 == c.n22);
}

TEST_CASE("step 3: consistent linear system recovers the channel exactly") {
  const ProtocolParams p = desk_params();
  PartitionEstimates n;
  n.n10 = 900000.0;
  n.n11 = 90000.0;
  n.n20 = 600000.0;
  n.n21 = 300000.0;
  n.n22 = 80000.0;
  const double q0 = 0.01, a1 = 0.04, a2 = 0.07, b1 = 0.002;
  StepOneEstimates m;
  m.m1 = 0.5 * q0 * n.n10 + a1 * n.n11 + a2 * n.n12(p.N1);
  m.m2 = 0.5 * q0 * n.n20 + a1 * n.n21 + a2 * n.n22;
  m.m3 = 0.5 * q0 * n.n10 + b1 * n.n11;
  const ChannelEstimates est = step3_channel(p, m, n, q0);
  CHECK(est.a1 == doctest::Approx(a1).epsilon(1e-10));
  CHECK(est.b1 == doctest::Approx(b1).epsilon(1e-10));

  // clamp branch: phase-error count below the vacuum share
  StepOneEstimates low = m;
  low.m3 = 0.25 * q0 * n.n10;
  CHECK(step3_channel(p, low, n, q0).b1 == 0.0);

  // nonpositive determinant signals the abort-bound failure
  PartitionEstimates bad = n;
  bad.n11 = 1.0;
  bad.n22 = 1.0;
  CHECK_THROWS_AS(step3_channel(p, m, bad, q0), ConditionViolated);
}

TEST_CASE("step 3 at the reference channel: misalignment dominates the error ratio") {
  const ProtocolParams p = paper_scale_params();
  const ObservedCounts c = paper_counts(p);
  const EpsilonSchedule s = EpsilonSchedule::improved(80);
  const StepOneEstimates m = step1_counts(p, c, s, BoundMethod::ChernoffKL);
  const PartitionEstimates n = step2_partition(p, moments(p.law1), moments(p.law2),
                                               omega2(moments(p.law1)), s,
                                               BoundMethod::ChernoffKL);
  const ChannelEstimates est = step3_channel(p, m, n, m.m0 / double(p.N0));
  CHECK(est.a1 > 0.0);
  CHECK(est.b1 > 0.0);
  const double ratio = est.b1 / (est.a1 + est.b1);
  CHECK(ratio > 0.8 * 0.03);
  CHECK(ratio < 2.5 * 0.03);
}

TEST_CASE("step 4: degenerate channels take the worst-case error rate") {
  const ProtocolParams p = desk_params();
  const SourceMoments sig = moments(p.signal_law());
  const EpsilonSchedule s = EpsilonSchedule::non_improved(20);

  RawKeyEstimates r =
      step4_rawkey(p, ChannelEstimates{0.0, 0.01, 0.0}, sig, s, BoundMethod::ChernoffKL);
  CHECK(r.j0 == 0.0);  // no vacuum detections expected
  CHECK(r.r1 == 0.0);  // zero success probability for phase errors

  r = step4_rawkey(p, ChannelEstimates{1e-6, 0.0, 0.0}, sig, s, BoundMethod::ChernoffKL);
  CHECK(r.j1 == 0.0);
  CHECK(r.r1 == 0.5);
}

TEST_CASE("step 5: leak formula boundary cases") {
  RawKeyEstimates r;
  r.j0 = 1000.0;
  r.j1 = 0.0;
  r.r1 = 0.5;
  CHECK(step5_leak(1000.0, r) == 0.0);  // all-vacuum raw key leaks nothing
  r.j0 = 200.0;
  r.j1 = 300.0;
  r.r1 = 0.7;  // above one half: the single-photon term vanishes
  CHECK(step5_leak(1000.0, r) == doctest::Approx(1000.0 - 200.0).epsilon(1e-12));
}

TEST_CASE("step 6: abort sentinel and arithmetic") {
  ProtocolParams p = desk_params();
  p.code_dim = 777777;
  CHECK(step6_sacrifice(p, 1000000, 123.0, false) == 777777);
  CHECK(step6_sacrifice(p, 1000000, 0.0, true) == 165);  // 2*80 + 5
  CHECK(step6_sacrifice(p, 1000000, 42.4, true) == 43 + 165);
  CHECK(step6_sacrifice(p, 100, 1e9, true) == 100);  // clamped to the raw-key length
  p.code_dim = 0;
  CHECK(step6_sacrifice(p, 1000000, 1.0, false) == 1000000);  // sentinel defaults to Ms
}

TEST_CASE("partition box brackets the means and widens as epsilon shrinks") {
  const ProtocolParams p = desk_params();
  const SourceMoments m1 = moments(p.law1);
  const SourceMoments m2 = moments(p.law2);
  const double w2 = omega2(m1);
  EpsilonSchedule s = EpsilonSchedule::non_improved(80);

  const PartitionBox box = build_omega1(p, m1, m2, w2, s, BoundMethod::ChernoffKL);
  CHECK(box.n10.lo <= double(p.N1) * m1.m0);
  CHECK(box.n10.hi >= double(p.N1) * m1.m0);
  CHECK(box.n22.lo <= double(p.N2) * w2 * m2.m2);
  CHECK(box.n22.hi >= double(p.N2) * w2 * m2.m2);

  EpsilonSchedule tighter = s;
  tighter.part = Alpha::from_log2_exponent(400);
  const PartitionBox wide = build_omega1(p, m1, m2, w2, tighter, BoundMethod::ChernoffKL);
  CHECK(wide.n10.lo <= box.n10.lo);
  CHECK(wide.n10.hi >= box.n10.hi);
  CHECK(wide.n21.lo <= box.n21.lo);
  CHECK(wide.n21.hi >= box.n21.hi);
}

TEST_CASE("condition 1: passes at the paper scale, fails for tiny budgets") {
  const SourceMoments m1 = moments(FixedLaw{0.1});
  const SourceMoments m2 = moments(FixedLaw{0.5});
  const double w2 = omega2(m1);
  const EpsilonSchedule s = EpsilonSchedule::improved(80);

  const ProtocolParams big = desk_params(1000000);
  std::array<double, 3> margins{};
  CHECK(check_condition1(build_omega1(big, m1, m2, w2, s, BoundMethod::ChernoffKL), &margins));
  CHECK(margins[0] > 0.0);
  CHECK(margins[1] > 0.0);
  CHECK(margins[2] > 0.0);

  const ProtocolParams tiny = desk_params(100);
  CHECK_FALSE(
      check_condition1(build_omega1(tiny, m1, m2, w2, s, BoundMethod::ChernoffKL), &margins));
}

TEST_CASE("condition 1: the printed inequalities are strict") {
  PartitionBox box;
  box.n1_total = 6;
  box.n10 = {1.0, 1.0};
  box.n11 = {2.0, 2.0};
  box.n20 = {1.0, 1.0};
  box.n21 = {2.0, 2.0};
  box.n22 = {3.0, 3.0};
  // slack = 6 - 1 - 2 = 3, so the first product comparison lands on equality
  std::array<double, 3> margins{};
  CHECK_FALSE(check_condition1(box, &margins));
  CHECK(margins[0] == 0.0);
}

TEST_CASE("condition 2: sign failures and the degenerate point box") {
  const ProtocolParams p = paper_scale_params();
  const ObservedCounts c = paper_counts(p);
  const EpsilonSchedule s = EpsilonSchedule::improved(80);
  const SourceMoments m1 = moments(p.law1);
  const SourceMoments m2 = moments(p.law2);
  const double w2 = omega2(m1);
  const PartitionBox box = build_omega1(p, m1, m2, w2, s, BoundMethod::ChernoffKL);
  const StepOneEstimates m = step1_counts(p, c, s, BoundMethod::ChernoffKL);
  const double q0 = m.m0 / double(p.N0);
  std::array<double, 5> margins{};
  CHECK(check_condition2(m, q0, box, &margins));
  for (double mg : margins) CHECK(mg > 0.0);

  StepOneEstimates zero3 = m;
  zero3.m3 = 0.0;  // phase-error bound below the vacuum share
  CHECK_FALSE(check_condition2(zero3, 1e-3, box, &margins));
  CHECK(margins[4] < 0.0);

  // a collapsed box reduces the interval check to a point evaluation
  PartitionBox pt = box;
  pt.n10 = {box.n10.lo, box.n10.lo};
  pt.n11 = {box.n11.lo, box.n11.lo};
  pt.n20 = {box.n20.lo, box.n20.lo};
  pt.n21 = {box.n21.lo, box.n21.lo};
  pt.n22 = {box.n22.lo, box.n22.lo};
  std::array<double, 5> pm{};
  CHECK(check_condition2(m, q0, pt, &pm));
  const double n12 = double(p.N1) - box.n10.lo - box.n11.lo;
  const double det = box.n11.lo * box.n22.lo - box.n21.lo * n12;
  const double tnum = box.n22.lo * (m.m1 - 0.5 * q0 * box.n10.lo) -
                      n12 * (m.m2 - 0.5 * q0 * box.n20.lo);
  const double a22 = (m.m1 - 0.5 * q0 * box.n10.lo) - box.n11.lo * tnum / det;
  CHECK(pm[3] == doctest::Approx(a22).epsilon(1e-9));
}

TEST_CASE("condition 3: misalignment decides the ratio certificate") {
  const ProtocolParams p = paper_scale_params();
  const EpsilonSchedule s = EpsilonSchedule::improved(80);
  const SourceMoments m1 = moments(p.law1);
  const SourceMoments m2 = moments(p.law2);
  const double w2 = omega2(m1);
  const PartitionBox box = build_omega1(p, m1, m2, w2, s, BoundMethod::ChernoffKL);

  const ObservedCounts ok = paper_counts(p, 1e-3, 4e-7, 0.03);
  const StepOneEstimates mok = step1_counts(p, ok, s, BoundMethod::ChernoffKL);
  double margin = 0.0;
  CHECK(check_condition3(mok, mok.m0 / double(p.N0), box, &margin));
  CHECK(margin > 0.0);

  const ObservedCounts bad = paper_counts(p, 1e-3, 4e-7, 0.2);
  const StepOneEstimates mbad = step1_counts(p, bad, s, BoundMethod::ChernoffKL);
  CHECK_FALSE(check_condition3(mbad, mbad.m0 / double(p.N0), box, &margin));

  StepOneEstimates quiet = mok;
  quiet.m3 = 0.0;  // phase-error estimate identically zero
  CHECK(check_condition3(quiet, mok.m0 / double(p.N0), box, &margin));
  CHECK(margin == 0.125);
}

TEST_CASE("interval certificates are sound against pointwise enumeration") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int certified = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const double n1t = 1e5 + 9e5 * u(rng);
    PartitionBox box;
    box.n1_total = std::int64_t(n1t);
    auto mk = [&](double center, double width) {
      return Iv{center * (1.0 - width), center * (1.0 + width)};
    };
    // partition fractions of realistic weak coherent intensities
    const double w = 0.0005 + 0.01 * u(rng);
    box.n10 = mk(0.905 * n1t, w);
    box.n11 = mk(0.0905 * n1t, w);
    box.n20 = mk(0.6065 * n1t, w);
    box.n21 = mk(0.3033 * n1t, w);
    box.n22 = mk(0.0784 * n1t, w);
    StepOneEstimates m;
    const double q0 = 1e-6 + 1e-4 * u(rng);
    const double a1 = 2e-4 + 2e-3 * u(rng);
    const double b1 = a1 * (0.01 + 0.08 * u(rng));
    m.m1 = (0.5 * q0 * 0.905 + a1 * 0.0905 + 2.0 * a1 * 0.0045) * n1t;
    m.m2 = (0.5 * q0 * 0.6065 + a1 * 0.3033 + 2.0 * a1 * 0.0784) * n1t;
    m.m3 = (0.5 * q0 * 0.905 + b1 * 0.0905) * n1t;
    std::array<double, 5> margins{};
    const bool pass2 = check_condition2(m, q0, box, &margins);
    double margin3 = 0.0;
    const bool pass3 = check_condition3(m, q0, box, &margin3);
    if (!pass2 && !pass3) continue;
    ++certified;

    // corner + interior sampling must never beat a certificate
    auto at = [&](const Iv& iv, double f) { return iv.lo + f * (iv.hi - iv.lo); };
    for (int pt = 0; pt < 52; ++pt) {
      double f10, f11, f20, f21, f22;
      if (pt < 32) {
        f10 = double(pt & 1);
        f11 = double((pt >> 1) & 1);
        f20 = double((pt >> 2) & 1);
        f21 = double((pt >> 3) & 1);
        f22 = double((pt >> 4) & 1);
      } else {
        f10 = u(rng);
        f11 = u(rng);
        f20 = u(rng);
        f21 = u(rng);
        f22 = u(rng);
      }
      const double n10 = at(box.n10, f10), n11 = at(box.n11, f11);
      const double n20 = at(box.n20, f20), n21 = at(box.n21, f21), n22 = at(box.n22, f22);
      const double n12 = n1t - n10 - n11;
      const double det = n11 * n22 - n21 * n12;
      const double tnum =
          n22 * (m.m1 - 0.5 * q0 * n10) - n12 * (m.m2 - 0.5 * q0 * n20);
      if (pass2) {
        REQUIRE(det > 0.0);
        const double td = tnum / det;
        const double a01 = (m.m2 - 0.5 * q0 * (n20 + n22)) - n21 * td;
        const double a11 = (m.m2 - 0.5 * q0 * n20) - (n22 + n21) * td;
        const double a12 = n12 * td;
        const double a22v = (m.m1 - 0.5 * q0 * n10) - n11 * td;
        const double b11 = m.m3 - 0.5 * q0 * n10;
        REQUIRE(a01 > 0.0);
        REQUIRE(a11 > 0.0);
        REQUIRE(a12 > 0.0);
        REQUIRE(a22v > 0.0);
        REQUIRE(b11 > 0.0);
      }
      if (pass3 && det > 0.0 && n11 > 0.0) {
        const double a = std::max(tnum / det, 0.0);
        const double b = std::max((m.m3 - 0.5 * q0 * n10) / n11, 0.0);
        if (a + b > 0.0) REQUIRE(b / (a + b) <= 0.125 + 1e-12);
      }
    }
  }
  CHECK(certified > 200);  // the experiment has to exercise real certificates
}

TEST_CASE("vacuum adjustment") {
  ProtocolParams p = desk_params();
  const EpsilonSchedule s = EpsilonSchedule::non_improved(80);
  const std::int64_t M0 = 400;

  // q = 0 reduces to the plain upper interval limit
  const double adj = vacuum_adjust_q0(p, M0, 0.0, s, BoundMethod::ChernoffKL);
  CHECK(adj == interval_upper(p.N0, M0, s.m0, BoundMethod::ChernoffKL));
  CHECK(adj >= double(M0) / double(p.N0));

  // explicit composition for q > 0
  const double q = 1e-6;
  const double cut =
      std::ceil(percent_point_upper({p.N0, q}, s.m0, BoundMethod::ChernoffKL));
  const std::int64_t c = std::int64_t(cut);
  const double adj2 = vacuum_adjust_q0(p, M0, q, s, BoundMethod::ChernoffKL);
  CHECK(adj2 == interval_upper(p.N0 - c, M0 - c, s.m0, BoundMethod::ChernoffKL));

  // observed count below the contamination quantile aborts
  CHECK_THROWS_AS(vacuum_adjust_q0(p, 10, 1e-3, s, BoundMethod::ChernoffKL),
                  AdjustedCountNegative);

  // q = 0 with random counts: the adjusted estimate never undercuts the ratio
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t m0 = std::int64_t(rng() % 100000);
    const double a = vacuum_adjust_q0(p, m0, 0.0, s, BoundMethod::ChernoffKL);
    CHECK(a >= double(m0) / double(p.N0));
  }
}

TEST_CASE("existing-method estimator: equality on clean channels") {
  const ProtocolParams p = desk_params();
  PartitionEstimates n;
  n.n10 = 900000.0;
  n.n11 = 90000.0;
  n.n20 = 600000.0;
  n.n21 = 300000.0;
  n.n22 = 80000.0;
  const double q0 = 0.01, a1 = 0.04;
  StepOneEstimates m;
  m.m1 = 0.5 * q0 * n.n10 + a1 * n.n11;  // noiseless: no multi-photon detections
  m.m2 = 0.5 * q0 * n.n20 + a1 * n.n21;
  m.m3 = 0.5 * q0 * n.n10;  // b = 0
  const double m4 = 0.5 * q0 * n.n20;
  const ChannelEstimates est = step3_channel(p, m, n, q0);
  CHECK(est.b1 == 0.0);
  const double q1 = existing_q1(m.m1 + m.m3, m.m2 + m4, q0, n, p);
  CHECK(q1 == doctest::Approx(est.a1 + est.b1).epsilon(1e-10));
}

TEST_CASE("existing-method leak bound is never below the proposed one") {
  ProtocolParams p = paper_scale_params();
  const ObservedCounts c = paper_counts(p);
  PipelineOptions opt;
  opt.variant = Variant::Improved;
  opt.method = BoundMethod::ChernoffKL;
  const SacrificeResult proposed = pipeline(p, c, opt);
  const ExistingMethodResult legacy = existing_method(p, c, opt);
  CHECK_FALSE(proposed.aborted);
  CHECK(legacy.phi >= proposed.phi2);
}

TEST_CASE("pipeline: improved never exceeds non-improved at the paper point") {
  ProtocolParams p = paper_scale_params();
  const ObservedCounts c = paper_counts(p);
  PipelineOptions opt;
  opt.method = BoundMethod::ChernoffKL;
  opt.variant = Variant::Improved;
  const SacrificeResult imp = pipeline(p, c, opt);
  opt.variant = Variant::NonImproved;
  const SacrificeResult non = pipeline(p, c, opt);
  CHECK_FALSE(imp.aborted);
  CHECK_FALSE(non.aborted);
  CHECK(imp.S <= non.S);
  CHECK(imp.phi2 <= non.phi2);
  CHECK(imp.S == 165 + std::int64_t(std::ceil(imp.phi2)));
}

TEST_CASE("pipeline: abort forces the sentinel and flags the conditions") {
  ProtocolParams p = desk_params(100, 80);  // budgets far too small
  p.code_dim = 424242;
  ObservedCounts c;
  c.Ms = 500;
  c.M0 = 0;
  c.M1 = 5;
  c.M2 = 20;
  c.M3 = 1;
  p.Ns = 1000;
  PipelineOptions opt;
  opt.method = BoundMethod::ChernoffKL;
  const SacrificeResult res = pipeline(p, c, opt);
  CHECK(res.aborted);
  CHECK(res.S == 424242);
  CHECK_FALSE(res.conditions.all());
}

TEST_CASE("pipeline: single-candidate theta set reproduces the plain run") {
  ProtocolParams p = paper_scale_params();
  const ObservedCounts c = paper_counts(p);
  PipelineOptions opt;
  opt.method = BoundMethod::ChernoffKL;
  const SacrificeResult plain = pipeline(p, c, opt);
  opt.theta_set = {{p.law1, p.law2}};
  const SacrificeResult single = pipeline(p, c, opt);
  CHECK(plain.S == single.S);
  CHECK(plain.phi2 == single.phi2);

  // a wider candidate family can only raise the sacrifice length
  opt.theta_set = {{p.law1, p.law2},
                   {IntensityLaw(GaussianLaw{0.1, 0.05}), IntensityLaw(GaussianLaw{0.5, 0.05})}};
  const SacrificeResult sup = pipeline(p, c, opt);
  if (!sup.aborted) CHECK(sup.S >= plain.S);
}

TEST_CASE("consistency recovery with centered quantiles") {
  // counts generated from a known channel, epsilons at 1/2, exact quantiles:
  // the recovered parameters sit within the quantile step of the truth
  ProtocolParams p = desk_params(1000000, 80);
  const double q0 = 1e-3, a1 = 2e-3, a2 = 4e-3, b1 = 1e-4;
  const SourceMoments m1 = moments(p.law1);
  const SourceMoments m2 = moments(p.law2);
  const double w2 = omega2(m1);
  const double c10 = m1.m0, c11 = m1.m1, c12 = 1.0 - c10 - c11;
  const double c20 = m2.m0, c21 = m2.m1, c22 = w2 * m2.m2;
  ObservedCounts c;
  c.M0 = std::llround(q0 * double(p.N0));
  c.M1 = std::llround((0.5 * q0 * c10 + a1 * c11 + a2 * c12) * double(p.N1));
  c.M2 = std::llround((0.5 * q0 * c20 + a1 * c21 + a2 * c22) * double(p.N2));
  c.M3 = std::llround((0.5 * q0 * c10 + b1 * c11) * double(p.N1));
  c.Ms = 1000;
  EpsilonSchedule s = EpsilonSchedule::non_improved(80);
  s.m0 = s.m1 = s.m2 = s.m3 = s.part = Alpha::from_value(0.4999);
  const StepOneEstimates m = step1_counts(p, c, s, BoundMethod::Exact);
  const PartitionEstimates n = step2_partition(p, m1, m2, w2, s, BoundMethod::Exact);
  const ChannelEstimates est = step3_channel(p, m, n, m.m0 / double(p.N0));
  CHECK(est.q0 == doctest::Approx(q0).epsilon(5e-3));
  CHECK(est.a1 == doctest::Approx(a1).epsilon(5e-2));
  CHECK(est.b1 == doctest::Approx(b1).epsilon(5e-2));
}

TEST_CASE("auto method resolution honors the admissibility envelope") {
  const Alpha deep = Alpha::from_log2_exponent(168);
  const Alpha mild = Alpha::from_value(1e-3);
  CHECK(resolve_method(BoundMethod::ChernoffKL, true, 2000000000, deep) ==
        BoundMethod::ChernoffKL);
  CHECK(resolve_method(BoundMethod::ChernoffKL, true, 50000, deep) == BoundMethod::Exact);
  CHECK(resolve_method(BoundMethod::ChernoffKL, true, 2000000000, mild) == BoundMethod::Exact);
  CHECK(resolve_method(BoundMethod::ChernoffPinsker, false, 100, mild) ==
        BoundMethod::ChernoffPinsker);
}
