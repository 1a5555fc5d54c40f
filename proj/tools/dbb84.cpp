// dbb84 — batch front end for the decoy-state BB84 finite-key calculator.
// Subcommands: sacrifice, simulate, sweep, coverage, check-conditions.
// Exit codes: 0 success (an aborted protocol is still a success), 2 usage
// or validation error, 3 internal numerical failure.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dbb84/estimation.hpp"
#include "dbb84/keyrate.hpp"

using nlohmann::json;
using namespace dbb84;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  int beta = 80;
  double eta = 1.1;
  int signal_index = 2;
  std::int64_t code_dim = 0;
  std::string variant = "improved";
  std::string method = "auto";
  int ec_rate_index = 2;
  std::optional<double> vacuum_q;
  double ch_alpha = 1.0e-3, ch_p0 = 4.0e-7, ch_s = 0.03;
  double mu1 = 0.1, mu2 = 0.5, t = 0.0;
  double Ms = 1.0e7;
  std::int64_t N0 = 0, N1 = 0, N2 = 0, Ns = 0;  // 0 = derive from Ms
  SweepGrid grid;
  // coverage experiment
  std::int64_t cov_trials = 10000;
  double cov_p = 5.0e-4;
  double cov_alpha = 1.0e-3;
  std::int64_t cov_replicates = 1000000;
  std::uint64_t seed = 20130814;
  int jobs = 1;
  std::string output;
  std::string format = "json";
};

void expect_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw UsageError("unknown config key '" + where + key + "'");
}

std::vector<double> as_grid(const json& j, const std::string& name) {
  if (!j.is_array()) throw UsageError("sweep." + name + " must be an array of numbers");
  std::vector<double> v;
  for (const auto& x : j) v.push_back(x.get<double>());
  return v;
}

void load_config(const std::string& path, Config& c) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError(std::string("config parse error: ") + e.what());
  }
  expect_keys(j, {"beta", "eta", "signal_index", "code_dim", "variant", "method",
                  "ec_rate_index", "vacuum_q", "channel", "intensity", "budgets", "sweep",
                  "coverage", "seed", "jobs", "output", "format"},
              "");
  if (j.contains("beta")) c.beta = j["beta"].get<int>();
  if (j.contains("eta")) c.eta = j["eta"].get<double>();
  if (j.contains("signal_index")) c.signal_index = j["signal_index"].get<int>();
  if (j.contains("code_dim")) c.code_dim = j["code_dim"].get<std::int64_t>();
  if (j.contains("variant")) c.variant = j["variant"].get<std::string>();
  if (j.contains("method")) c.method = j["method"].get<std::string>();
  if (j.contains("ec_rate_index")) c.ec_rate_index = j["ec_rate_index"].get<int>();
  if (j.contains("vacuum_q")) c.vacuum_q = j["vacuum_q"].get<double>();
  if (j.contains("channel")) {
    const json& ch = j["channel"];
    expect_keys(ch, {"alpha", "p0", "s"}, "channel.");
    if (ch.contains("alpha")) c.ch_alpha = ch["alpha"].get<double>();
    if (ch.contains("p0")) c.ch_p0 = ch["p0"].get<double>();
    if (ch.contains("s")) c.ch_s = ch["s"].get<double>();
  }
  if (j.contains("intensity")) {
    const json& it = j["intensity"];
    expect_keys(it, {"mu1", "mu2", "t"}, "intensity.");
    if (it.contains("mu1")) c.mu1 = it["mu1"].get<double>();
    if (it.contains("mu2")) c.mu2 = it["mu2"].get<double>();
    if (it.contains("t")) c.t = it["t"].get<double>();
  }
  if (j.contains("budgets")) {
    const json& b = j["budgets"];
    expect_keys(b, {"Ms", "N0", "N1", "N2", "Ns"}, "budgets.");
    if (b.contains("Ms")) c.Ms = b["Ms"].get<double>();
    if (b.contains("N0")) c.N0 = b["N0"].get<std::int64_t>();
    if (b.contains("N1")) c.N1 = b["N1"].get<std::int64_t>();
    if (b.contains("N2")) c.N2 = b["N2"].get<std::int64_t>();
    if (b.contains("Ns")) c.Ns = b["Ns"].get<std::int64_t>();
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    expect_keys(s, {"mu1", "mu2", "t", "Ms"}, "sweep.");
    if (s.contains("mu1")) c.grid.mu1 = as_grid(s["mu1"], "mu1");
    if (s.contains("mu2")) c.grid.mu2 = as_grid(s["mu2"], "mu2");
    if (s.contains("t")) c.grid.t = as_grid(s["t"], "t");
    if (s.contains("Ms")) c.grid.Ms = as_grid(s["Ms"], "Ms");
  }
  if (j.contains("coverage")) {
    const json& cv = j["coverage"];
    expect_keys(cv, {"trials", "p", "alpha", "replicates"}, "coverage.");
    if (cv.contains("trials")) c.cov_trials = cv["trials"].get<std::int64_t>();
    if (cv.contains("p")) c.cov_p = cv["p"].get<double>();
    if (cv.contains("alpha")) c.cov_alpha = cv["alpha"].get<double>();
    if (cv.contains("replicates")) c.cov_replicates = cv["replicates"].get<std::int64_t>();
  }
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
  if (j.contains("output")) c.output = j["output"].get<std::string>();
  if (j.contains("format")) c.format = j["format"].get<std::string>();
}

json effective_config(const Config& c) {
  json j;
  j["beta"] = c.beta;
  j["eta"] = c.eta;
  j["signal_index"] = c.signal_index;
  j["code_dim"] = c.code_dim;
  j["variant"] = c.variant;
  j["method"] = c.method;
  j["ec_rate_index"] = c.ec_rate_index;
  if (c.vacuum_q) j["vacuum_q"] = *c.vacuum_q;
  j["channel"] = {{"alpha", c.ch_alpha}, {"p0", c.ch_p0}, {"s", c.ch_s}};
  j["intensity"] = {{"mu1", c.mu1}, {"mu2", c.mu2}, {"t", c.t}};
  j["budgets"] = {{"Ms", c.Ms}, {"N0", c.N0}, {"N1", c.N1}, {"N2", c.N2}, {"Ns", c.Ns}};
  j["sweep"] = {{"mu1", c.grid.mu1}, {"mu2", c.grid.mu2}, {"t", c.grid.t}, {"Ms", c.grid.Ms}};
  j["coverage"] = {{"trials", c.cov_trials},
                   {"p", c.cov_p},
                   {"alpha", c.cov_alpha},
                   {"replicates", c.cov_replicates}};
  j["seed"] = c.seed;
  return j;
}

std::string config_hash(const Config& c) {
  const std::string dump = effective_config(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Variant parse_variant(const std::string& v) {
  if (v == "improved") return Variant::Improved;
  if (v == "non-improved") return Variant::NonImproved;
  throw UsageError("variant must be 'improved' or 'non-improved'");
}

struct MethodChoice {
  BoundMethod method = BoundMethod::ChernoffKL;
  bool auto_select = false;
};

MethodChoice parse_method(const std::string& m) {
  if (m == "auto") return {BoundMethod::ChernoffKL, true};
  if (m == "exact") return {BoundMethod::Exact, false};
  if (m == "chernoff-kl") return {BoundMethod::ChernoffKL, false};
  if (m == "pinsker") return {BoundMethod::ChernoffPinsker, false};
  if (m == "info-geo") return {BoundMethod::ChernoffInfoGeo, false};
  throw UsageError("method must be auto|exact|chernoff-kl|pinsker|info-geo");
}

ChannelModel channel_from(const Config& c) {
  ChannelModel m;
  m.alpha = c.ch_alpha;
  m.p0 = c.ch_p0;
  m.s = c.ch_s;
  m.law1 = (c.t > 0.0) ? IntensityLaw(GaussianLaw{c.mu1, c.t}) : IntensityLaw(FixedLaw{c.mu1});
  m.law2 = (c.t > 0.0) ? IntensityLaw(GaussianLaw{c.mu2, c.t}) : IntensityLaw(FixedLaw{c.mu2});
  return m;
}

PulseBudgets budgets_from(const Config& c, const ChannelModel& model) {
  PulseBudgets b;
  if (c.Ns > 0) {
    b.Ns = c.Ns;
    b.N0 = c.N0 > 0 ? c.N0 : c.Ns / 10;
    b.N1 = c.N1 > 0 ? c.N1 : c.Ns / 10;
    b.N2 = c.N2 > 0 ? c.N2 : c.Ns / 10;
    return b;
  }
  b = budgets_from_ms(model, c.Ms, c.signal_index);
  if (c.N0 > 0) b.N0 = c.N0;
  if (c.N1 > 0) b.N1 = c.N1;
  if (c.N2 > 0) b.N2 = c.N2;
  return b;
}

ProtocolParams params_from(const Config& c, const ChannelModel& model,
                           const PulseBudgets& b) {
  ProtocolParams p;
  p.beta = c.beta;
  p.law1 = model.law1;
  p.law2 = model.law2;
  p.signal_index = c.signal_index;
  p.N0 = b.N0;
  p.N1 = b.N1;
  p.N2 = b.N2;
  p.Ns = b.Ns;
  p.eta = c.eta;
  p.code_dim = c.code_dim;
  return p;
}

void write_output(const Config& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(c.output);
  if (!out) throw std::runtime_error("cannot open output file: " + c.output);
  out << text << "\n";
}

json conditions_json(const ConditionReport& r) {
  return json{{"condition1", {{"pass", r.pass1}, {"margins", r.margins1}}},
              {"condition2", {{"pass", r.pass2}, {"margins", r.margins2}}},
              {"condition3", {{"pass", r.pass3}, {"margin", r.margin3}}}};
}

json counts_to_json(const ObservedCounts& counts, const PulseBudgets& b) {
  return json{{"counts",
               {{"Ms", counts.Ms},
                {"M0", counts.M0},
                {"M1", counts.M1},
                {"M2", counts.M2},
                {"M3", counts.M3},
                {"M4", counts.M4}}},
              {"budgets", {{"N0", b.N0}, {"N1", b.N1}, {"N2", b.N2}, {"Ns", b.Ns}}}};
}

void counts_from_json(const json& j, ObservedCounts& counts, PulseBudgets& b) {
  expect_keys(j, {"counts", "budgets", "config_hash", "seed", "expected"}, "counts-file ");
  const json& cj = j.at("counts");
  expect_keys(cj, {"Ms", "M0", "M1", "M2", "M3", "M4"}, "counts.");
  counts.Ms = cj.at("Ms").get<std::int64_t>();
  counts.M0 = cj.at("M0").get<std::int64_t>();
  counts.M1 = cj.at("M1").get<std::int64_t>();
  counts.M2 = cj.at("M2").get<std::int64_t>();
  counts.M3 = cj.at("M3").get<std::int64_t>();
  counts.M4 = cj.contains("M4") ? cj.at("M4").get<std::int64_t>() : 0;
  const json& bj = j.at("budgets");
  expect_keys(bj, {"N0", "N1", "N2", "Ns"}, "budgets.");
  b.N0 = bj.at("N0").get<std::int64_t>();
  b.N1 = bj.at("N1").get<std::int64_t>();
  b.N2 = bj.at("N2").get<std::int64_t>();
  b.Ns = bj.at("Ns").get<std::int64_t>();
}

int cmd_sacrifice(const Config& c, const std::string& counts_path) {
  const ChannelModel model = channel_from(c);
  ObservedCounts counts;
  PulseBudgets b;
  if (!counts_path.empty()) {
    std::ifstream in(counts_path);
    if (!in) throw UsageError("cannot open counts file: " + counts_path);
    json j;
    in >> j;
    counts_from_json(j, counts, b);
  } else {
    b = budgets_from(c, model);
    counts = expected_counts(model, b, c.signal_index);
  }
  const ProtocolParams params = params_from(c, model, b);
  try {
    counts.validate(params.N0, params.N1, params.N2, params.Ns);
  } catch (const InvalidCounts& e) {
    throw UsageError(std::string("invalid counts: ") + e.what());
  }

  PipelineOptions opt;
  opt.variant = parse_variant(c.variant);
  const MethodChoice mc = parse_method(c.method);
  opt.method = mc.method;
  opt.auto_method = mc.auto_select;
  opt.vacuum_q = c.vacuum_q;

  const SacrificeResult res = pipeline(params, counts, opt);
  json out;
  out["config_hash"] = config_hash(c);
  out["variant"] = c.variant;
  out["method"] = c.method;
  out["S"] = res.S;
  out["phi2"] = res.phi2;
  out["phi2_clamped"] = res.phi2_clamped;
  out["J0"] = res.J0;
  out["J1"] = res.J1;
  out["r1"] = res.r1;
  out["channel"] = {{"q0", res.channel.q0}, {"a1", res.channel.a1}, {"b1", res.channel.b1}};
  out["conditions"] = conditions_json(res.conditions);
  out["aborted"] = res.aborted;
  if (res.aborted) out["abort_reason"] = res.abort_reason;
  write_output(c, out.dump(2));
  return 0;
}

int cmd_simulate(const Config& c, bool expected) {
  const ChannelModel model = channel_from(c);
  const PulseBudgets b = budgets_from(c, model);
  const ObservedCounts counts = expected
                                    ? expected_counts(model, b, c.signal_index)
                                    : sample_counts(model, b, c.signal_index, c.seed);
  json out = counts_to_json(counts, b);
  out["config_hash"] = config_hash(c);
  out["expected"] = expected;
  out["seed"] = c.seed;
  write_output(c, out.dump(2));
  return 0;
}

int cmd_sweep(const Config& c) {
  if (c.grid.mu1.empty() && c.grid.mu2.empty() && c.grid.t.empty() && c.grid.Ms.empty())
    throw UsageError("sweep needs a non-empty grid (config key 'sweep')");
  KeyRateInputs base;
  base.model = channel_from(c);
  base.Ms = c.Ms;
  base.beta = c.beta;
  base.eta = c.eta;
  base.signal_index = c.signal_index;
  base.variant = parse_variant(c.variant);
  const MethodChoice mc = parse_method(c.method);
  base.method = mc.method;
  base.auto_method = mc.auto_select;
  base.ec_index = c.ec_rate_index == 1 ? EcRateIndex::Intensity1 : EcRateIndex::Intensity2;

  const std::vector<KeyRatePoint> pts = sweep(base, c.grid, c.jobs);

  if (c.format == "csv") {
    std::ostringstream os;
    auto num = [](double v) {  // shortest round-trip decimal form
      char buf[32];
      const auto r = std::to_chars(buf, buf + sizeof buf, v);
      return std::string(buf, r.ptr);
    };
    os << "mu1,mu2,t,Ms,beta,variant,S,R,aborted";
    for (const auto& p : pts) {
      os << "\n"
         << num(p.mu1) << ',' << num(p.mu2) << ',' << num(p.t) << ',' << num(p.Ms) << ','
         << p.beta << ','
         << (p.variant == Variant::Improved ? "improved" : "non-improved") << ',' << p.S << ','
         << num(p.R) << ',' << (p.aborted ? "true" : "false");
    }
    os << "\n# config_hash=" << config_hash(c);
    write_output(c, os.str());
    return 0;
  }
  if (c.format != "json") throw UsageError("format must be csv or json");
  json rows = json::array();
  std::size_t best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    if (p.R > pts[best].R) best = i;
    rows.push_back({{"mu1", p.mu1},
                    {"mu2", p.mu2},
                    {"t", p.t},
                    {"Ms", p.Ms},
                    {"beta", p.beta},
                    {"variant", p.variant == Variant::Improved ? "improved" : "non-improved"},
                    {"S", p.S},
                    {"R", p.R},
                    {"aborted", p.aborted}});
  }
  json out;
  out["config_hash"] = config_hash(c);
  out["points"] = rows;
  if (!pts.empty())  // grid argmax, handy for picking intensities
    out["best"] = {{"mu1", pts[best].mu1},
                   {"mu2", pts[best].mu2},
                   {"t", pts[best].t},
                   {"Ms", pts[best].Ms},
                   {"R", pts[best].R}};
  write_output(c, out.dump(2));
  return 0;
}

// Violation thresholds reduce each coverage contract to an integer compare,
// so a million replicates cost four comparisons each instead of four
// bisections.
struct CoverageThresholds {
  double ppl = 0.0, ppu = 0.0;
  std::int64_t k_lower = 0;  // X > k_lower violates the lower interval limit
  std::int64_t k_upper = 0;  // X < k_upper violates the upper interval limit
};

CoverageThresholds coverage_thresholds(std::int64_t n, double p, Alpha a, BoundMethod m) {
  CoverageThresholds th;
  th.ppl = percent_point_lower({n, p}, a, m);
  th.ppu = percent_point_upper({n, p}, a, m);
  // largest k with interval_lower(n,k,a) <= p
  std::int64_t lo = 0, hi = n;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo + 1) / 2;
    if (interval_lower(n, mid, a, m) <= p)
      lo = mid;
    else
      hi = mid - 1;
  }
  th.k_lower = lo;
  // smallest k with interval_upper(n,k,a) >= p
  lo = 0;
  hi = n;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (interval_upper(n, mid, a, m) >= p)
      hi = mid;
    else
      lo = mid + 1;
  }
  th.k_upper = lo;
  return th;
}

int cmd_coverage(const Config& c) {
  if (c.cov_replicates <= 0) throw UsageError("coverage needs replicates > 0");
  if (!(c.cov_alpha >= 1.0e-4 && c.cov_alpha < 1.0))
    throw UsageError("coverage alpha must be in [1e-4, 1) (tractable regime)");
  if (c.cov_trials < 1) throw UsageError("coverage trials must be positive");
  const Alpha a = Alpha::from_value(c.cov_alpha);

  const std::pair<std::string, BoundMethod> methods[] = {
      {"exact", BoundMethod::Exact},
      {"chernoff-kl", BoundMethod::ChernoffKL},
      {"pinsker", BoundMethod::ChernoffPinsker},
      {"info-geo", BoundMethod::ChernoffInfoGeo}};

  json report;
  report["config_hash"] = config_hash(c);
  report["trials"] = c.cov_trials;
  report["p"] = c.cov_p;
  report["alpha"] = c.cov_alpha;
  report["replicates"] = c.cov_replicates;
  const double se = std::sqrt(c.cov_alpha * (1.0 - c.cov_alpha) / double(c.cov_replicates));
  report["nominal_se"] = se;

  for (const auto& [name, method] : methods) {
    CoverageThresholds th;
    try {
      th = coverage_thresholds(c.cov_trials, c.cov_p, a, method);
    } catch (const MethodOutOfDomain& e) {
      report["bounds"][name] = {{"skipped", e.what()}};
      continue;
    }
    std::int64_t v_ppl = 0, v_ppu = 0, v_il = 0, v_iu = 0;
    SplitRng rng = SplitRng::for_stream(c.seed, 17);
    for (std::int64_t i = 0; i < c.cov_replicates; ++i) {
      const std::int64_t x = sample_binomial(rng, c.cov_trials, c.cov_p);
      v_ppl += double(x) < th.ppl;
      v_ppu += double(x) > th.ppu;
      v_il += x > th.k_lower;
      v_iu += x < th.k_upper;
    }
    auto entry = [&](std::int64_t v) {
      return json{{"violations", v},
                  {"frequency", double(v) / double(c.cov_replicates)},
                  {"bound", c.cov_alpha + 3.0 * se}};
    };
    report["bounds"][name] = {{"percent_point_lower", entry(v_ppl)},
                              {"percent_point_upper", entry(v_ppu)},
                              {"interval_lower", entry(v_il)},
                              {"interval_upper", entry(v_iu)}};
  }
  write_output(c, report.dump(2));
  return 0;
}

int cmd_check_conditions(const Config& c, const std::string& counts_path) {
  const ChannelModel model = channel_from(c);
  ObservedCounts counts;
  PulseBudgets b;
  if (!counts_path.empty()) {
    std::ifstream in(counts_path);
    if (!in) throw UsageError("cannot open counts file: " + counts_path);
    json j;
    in >> j;
    counts_from_json(j, counts, b);
  } else {
    b = budgets_from(c, model);
    counts = expected_counts(model, b, c.signal_index);
  }
  const ProtocolParams params = params_from(c, model, b);
  const EpsilonSchedule sched = EpsilonSchedule::preset(parse_variant(c.variant), c.beta);
  const MethodChoice mc = parse_method(c.method);

  const SourceMoments m1 = moments(params.law1);
  const SourceMoments m2 = moments(params.law2);
  const double w2 = omega2(m1);
  const PartitionBox box =
      build_omega1(params, m1, m2, w2, sched, mc.method, mc.auto_select);
  const StepOneEstimates est =
      step1_counts(params, counts, sched, mc.method, mc.auto_select);
  const double q0 = c.vacuum_q ? vacuum_adjust_q0(params, counts.M0, *c.vacuum_q, sched,
                                                  mc.method, mc.auto_select)
                               : est.m0 / double(params.N0);

  ConditionReport rep;
  rep.pass1 = check_condition1(box, &rep.margins1);
  rep.pass2 = check_condition2(est, q0, box, &rep.margins2);
  rep.pass3 = check_condition3(est, q0, box, &rep.margin3);

  json out;
  out["config_hash"] = config_hash(c);
  out["conditions"] = conditions_json(rep);
  out["all_pass"] = rep.all();
  write_output(c, out.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decoy-state BB84 finite-key sacrifice-length and key-rate calculator"};
  app.require_subcommand(1);

  std::string config_path, counts_path;
  Config cfg;
  bool expected_mode = false;
  std::optional<std::string> opt_variant, opt_method, opt_output, opt_format;
  std::optional<std::uint64_t> opt_seed;
  std::optional<int> opt_jobs;

  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--variant", opt_variant, "improved|non-improved");
  app.add_option("--method", opt_method, "auto|exact|chernoff-kl|pinsker|info-geo");
  app.add_option("--seed", opt_seed, "RNG seed");
  app.add_option("--jobs", opt_jobs, "worker threads for sweeps");
  app.add_option("--output", opt_output, "output path (default stdout)");
  app.add_option("--format", opt_format, "csv|json");

  auto* sac = app.add_subcommand("sacrifice", "compute the sacrifice bit-length");
  sac->add_option("--counts", counts_path, "counts JSON (from 'simulate')");
  auto* sim = app.add_subcommand("simulate", "generate counts from the channel model");
  sim->add_flag("--expected", expected_mode, "emit expectation counts instead of sampling");
  auto* swp = app.add_subcommand("sweep", "key-rate sweep over a parameter grid");
  auto* cov = app.add_subcommand("coverage", "Monte Carlo coverage report for the bounds");
  auto* chk = app.add_subcommand("check-conditions", "evaluate the abort conditions");
  chk->add_option("--counts", counts_path, "counts JSON (from 'simulate')");
  for (auto* sub : {sac, sim, swp, cov, chk}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) load_config(config_path, cfg);
    if (opt_variant) cfg.variant = *opt_variant;
    if (opt_method) cfg.method = *opt_method;
    if (opt_seed) cfg.seed = *opt_seed;
    if (opt_jobs) cfg.jobs = *opt_jobs;
    if (opt_output) cfg.output = *opt_output;
    if (opt_format) cfg.format = *opt_format;
    parse_variant(cfg.variant);
    parse_method(cfg.method);
    if (cfg.format != "csv" && cfg.format != "json")
      throw UsageError("format must be csv or json");

    if (sac->parsed()) return cmd_sacrifice(cfg, counts_path);
    if (sim->parsed()) return cmd_simulate(cfg, expected_mode);
    if (swp->parsed()) return cmd_sweep(cfg);
    if (cov->parsed()) return cmd_coverage(cfg);
    if (chk->parsed()) return cmd_check_conditions(cfg, counts_path);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidCounts& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
