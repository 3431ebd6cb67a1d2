#include "sgdlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "sgdlab/concentration.hpp"
#include "sgdlab/constructions.hpp"
#include "sgdlab/parallel.hpp"
#include "sgdlab/stochastic.hpp"
#include "sgdlab/trace_io.hpp"

namespace sgdlab {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::pair<std::string, Experiment>>& experiment_table() {
  static const std::vector<std::pair<std::string, Experiment>> table = {
      {"sc-lower", Experiment::kScLower},
      {"lip-lower", Experiment::kLipLower},
      {"lip-monotone", Experiment::kLipMonotone},
      {"suffix-lower", Experiment::kSuffixLower},
      {"lbdelta-last", Experiment::kLbDeltaLast},
      {"lbdelta-suffix", Experiment::kLbDeltaSuffix},
      {"coupling", Experiment::kCoupling},
      {"quadratic-quantiles", Experiment::kQuadraticQuantiles},
      {"recursive-tail", Experiment::kRecursiveTail},
      {"freedman-tail", Experiment::kFreedmanTail},
      {"decomposition", Experiment::kDecomposition},
      {"ytail", Experiment::kYTail},
  };
  return table;
}

std::string experiment_name(Experiment e) {
  for (const auto& [name, exp] : experiment_table()) {
    if (exp == e) return name;
  }
  return "?";
}

ConfigError::ConfigError(const std::vector<std::string>& violations)
    : std::runtime_error([&violations] {
        std::string msg = "invalid config:";
        for (const auto& v : violations) msg += "\n  - " + v;
        return msg;
      }()),
      violations_(violations) {}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  bool have_experiment = false;

  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "experiment") {
        bool found = false;
        for (const auto& [name, exp] : experiment_table()) {
          if (name == val) {
            cfg.experiment = exp;
            have_experiment = true;
            found = true;
            break;
          }
        }
        if (!found) errors.push_back("unknown experiment: " + val);
      } else if (key == "T") {
        cfg.T = std::stoi(val);
        if (cfg.T < 2) errors.push_back("T must be >= 2");
      } else if (key == "c") {
        cfg.c = std::stod(val);
        if (!(cfg.c >= 1.0)) errors.push_back("c must be >= 1");
      } else if (key == "trials") {
        const long long v = std::stoll(val);
        if (v < 1) {
          errors.push_back("trials must be >= 1");
        } else {
          cfg.trials = static_cast<std::uint64_t>(v);
        }
      } else if (key == "delta_grid") {
        cfg.delta_grid.clear();
        for (const std::string& p : split_list(val)) {
          const double d = std::stod(p);
          if (!(d > 0.0) || !(d < 1.0)) {
            errors.push_back("delta_grid entries must lie in (0, 1): " + p);
          } else {
            cfg.delta_grid.push_back(d);
          }
        }
        if (cfg.delta_grid.empty()) errors.push_back("delta_grid must be non-empty");
      } else if (key == "seed") {
        cfg.seed = std::stoull(val);
      } else if (key == "out_dir") {
        cfg.out_dir = val;
      } else if (key == "k_list") {
        cfg.k_list.clear();
        for (const std::string& p : split_list(val)) {
          const int k = std::stoi(p);
          if (k < 1) {
            errors.push_back("k_list entries must be >= 1: " + p);
          } else {
            cfg.k_list.push_back(k);
          }
        }
        if (cfg.k_list.empty()) errors.push_back("k_list must be non-empty");
      } else if (key == "T_list") {
        cfg.T_list.clear();
        for (const std::string& p : split_list(val)) {
          const int t = std::stoi(p);
          if (t < 2) {
            errors.push_back("T_list entries must be >= 2: " + p);
          } else {
            cfg.T_list.push_back(t);
          }
        }
        if (cfg.T_list.empty()) errors.push_back("T_list must be non-empty");
      } else if (key == "alpha") {
        cfg.alpha = std::stod(val);
        if (!(cfg.alpha > 0.0)) errors.push_back("alpha must be > 0");
      } else if (key == "L") {
        cfg.L = std::stod(val);
        if (!(cfg.L > 0.0)) errors.push_back("L must be > 0");
      } else if (key == "threads") {
        cfg.threads = std::stoi(val);
      } else {
        errors.push_back("unknown key: " + key);
      }
    } catch (const std::exception&) {
      errors.push_back("line " + std::to_string(lineno) + ": cannot parse value for " + key);
    }
  }
  if (!have_experiment) errors.push_back("missing required key: experiment");
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

QuantileSummary quantile_summary(int T, const std::vector<double>& levels,
                                 const std::vector<double>& final_samples,
                                 const std::vector<double>& suffix_samples) {
  QuantileSummary s;
  s.T = T;
  s.levels = levels;
  for (double level : levels) {
    s.final_error.push_back(quantile_nearest_rank(final_samples, level));
    s.suffix_error.push_back(quantile_nearest_rank(suffix_samples, level));
  }
  return s;
}

double quantile_nearest_rank(std::vector<double> samples, double level) {
  if (samples.empty()) throw std::invalid_argument("quantile_nearest_rank: empty samples");
  if (!(level > 0.0) || !(level <= 1.0)) {
    throw std::invalid_argument("quantile_nearest_rank: level must lie in (0, 1]");
  }
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return samples[rank - 1];
}

namespace {

struct Emitter {
  explicit Emitter(const ExperimentConfig& cfg) : cfg_(cfg) {
    out_dir_ = cfg.out_dir.empty() ? "out" : cfg.out_dir;
    fs::create_directories(out_dir_);
    fs::create_directories(out_dir_ + "/plotdata");
    start_ = std::chrono::steady_clock::now();
  }

  std::ofstream open(const std::string& rel) const {
    std::ofstream os(out_dir_ + "/" + rel);
    if (!os) throw std::runtime_error("cannot open output file: " + out_dir_ + "/" + rel);
    return os;
  }

  void plot_xy(const std::string& name, const std::string& xcol, const std::string& ycol,
               const std::vector<std::pair<double, double>>& points) const {
    std::ofstream os = open("plotdata/" + name);
    os << xcol << ',' << ycol << '\n';
    for (const auto& [x, y] : points) os << fmt17(x) << ',' << fmt17(y) << '\n';
  }

  void check(std::vector<CheckResult>& checks, const std::string& name, bool pass, double lhs,
             double rhs) const {
    checks.push_back({name, pass, lhs, rhs});
  }

  // summary.json: version, config echo, per-check verdicts, wall time.
  ExperimentResult finish(std::vector<CheckResult> checks, json results) const {
    ExperimentResult r;
    r.checks = std::move(checks);
    r.pass = true;
    for (const CheckResult& c : r.checks) r.pass = r.pass && c.pass;

    json cfg_echo;
    cfg_echo["experiment"] = experiment_name(cfg_.experiment);
    cfg_echo["T"] = cfg_.T;
    cfg_echo["c"] = cfg_.c;
    cfg_echo["trials"] = cfg_.trials;
    cfg_echo["delta_grid"] = cfg_.delta_grid;
    cfg_echo["seed"] = cfg_.seed;
    cfg_echo["out_dir"] = out_dir_;
    cfg_echo["k_list"] = cfg_.k_list;
    cfg_echo["T_list"] = cfg_.T_list;
    cfg_echo["alpha"] = cfg_.alpha;
    cfg_echo["L"] = cfg_.L;
    cfg_echo["threads"] = cfg_.threads;

    json checks_json = json::array();
    for (const CheckResult& c : r.checks) {
      checks_json.push_back({{"name", c.name}, {"pass", c.pass}, {"lhs", c.lhs}, {"rhs", c.rhs}});
    }

    const auto wall =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                              start_)
            .count();
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%FT%TZ", std::gmtime(&tt));

    r.summary = json{{"version", kVersion},
                     {"experiment", experiment_name(cfg_.experiment)},
                     {"config", cfg_echo},
                     {"seed", cfg_.seed},
                     {"timestamp", stamp},
                     {"wall_time_ms", wall},
                     {"results", std::move(results)},
                     {"checks", checks_json},
                     {"pass", r.pass}};
    std::ofstream os = open("summary.json");
    os << r.summary.dump(2) << '\n';
    return r;
  }

  const ExperimentConfig& cfg_;
  std::string out_dir_;
  std::chrono::steady_clock::time_point start_;
};

void write_tail_csv(std::ofstream os, const std::vector<TailReport>& reports) {
  os << "delta,threshold,empirical,ci_low,ci_high,bound,trials\n";
  for (const TailReport& r : reports) {
    os << fmt17(r.delta) << ',' << fmt17(r.threshold) << ',' << fmt17(r.empirical) << ','
       << fmt17(r.ci_low) << ',' << fmt17(r.ci_high) << ',' << fmt17(r.bound) << ',' << r.trials
       << '\n';
  }
}

// Deterministic lower-bound runs, streamed so T can equal the dimension
// without storing the trace.
struct LowerRunStats {
  double max_dev = 0.0;
  std::vector<double> fvals;  // f(x_t), t = 1..T+1
  std::vector<double> norms;
};

LowerRunStats stream_sc_lower(int T) {
  StronglyConvexInstance inst(T);
  LowerRunStats s;
  s.fvals.resize(static_cast<std::size_t>(T) + 1);
  s.norms.resize(static_cast<std::size_t>(T) + 1);
  sgd_run_streaming(inst.oracle_fn(), inst.domain(), Vec(static_cast<std::size_t>(T), 0.0),
                    StepSchedule::inverse_t(), T, ReplicaRng(0, 0),
                    [&](int t, const Vec& x, const Vec*, double fx, const OracleResponse*) {
                      s.max_dev = std::max(s.max_dev, linf_dist(x, inst.predicted_iterate(t)));
                      s.fvals[static_cast<std::size_t>(t) - 1] = fx;
                      s.norms[static_cast<std::size_t>(t) - 1] = norm(x);
                    });
  return s;
}

LowerRunStats stream_lip_lower(int T, double c) {
  LipschitzInstance inst(T, c);
  LowerRunStats s;
  s.fvals.resize(static_cast<std::size_t>(T) + 1);
  s.norms.resize(static_cast<std::size_t>(T) + 1);
  sgd_run_streaming(inst.oracle_fn(), inst.domain(), Vec(static_cast<std::size_t>(T), 0.0),
                    StepSchedule::c_inverse_sqrt_t(c), T, ReplicaRng(0, 0),
                    [&](int t, const Vec& x, const Vec*, double fx, const OracleResponse*) {
                      s.max_dev = std::max(s.max_dev, linf_dist(x, inst.predicted_iterate(t)));
                      s.fvals[static_cast<std::size_t>(t) - 1] = fx;
                      s.norms[static_cast<std::size_t>(t) - 1] = norm(x);
                    });
  return s;
}

void write_lower_trace_csv(const Emitter& em, const LowerRunStats& s, const StepSchedule& sched) {
  std::ofstream os = em.open("trace.csv");
  os << "t,fx,norm_x,step\n";
  for (std::size_t i = 0; i < s.fvals.size(); ++i) {
    os << (i + 1) << ',' << fmt17(s.fvals[i]) << ',' << fmt17(s.norms[i]) << ','
       << fmt17(sched.value(static_cast<int>(i) + 1)) << '\n';
  }
}

ExperimentResult run_sc_lower(const ExperimentConfig& cfg, const Emitter& em) {
  const LowerRunStats s = stream_sc_lower(cfg.T);
  const double f_final = s.fvals.back();
  const double bound = sc_lower_bound(cfg.T);
  write_lower_trace_csv(em, s, StepSchedule::inverse_t());
  if (cfg.T <= 64) {  // full-vector dump only at sizes where it stays small
    StronglyConvexInstance inst(cfg.T);
    const RunTrace trace = sgd_run(inst.oracle_fn(), inst.domain(),
                                   Vec(static_cast<std::size_t>(cfg.T), 0.0),
                                   StepSchedule::inverse_t(), cfg.T, ReplicaRng(0, 0));
    std::ofstream vos = em.open("vectors.txt");
    write_trace_vectors(vos, trace);
  }

  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < s.fvals.size(); ++i) {
    pts.emplace_back(static_cast<double>(i + 1), s.fvals[i]);
  }
  em.plot_xy("fx_vs_t.csv", "t", "fx", pts);

  std::vector<CheckResult> checks;
  em.check(checks, "iterate_identity_max_dev", s.max_dev <= 1e-9, s.max_dev, 1e-9);
  em.check(checks, "final_value_bound", f_final > bound, f_final, bound);

  json results;
  results["max_identity_deviation"] = s.max_dev;
  results["f_final"] = f_final;
  results["lower_bound"] = bound;
  results["ratio_f_4T_over_lnT"] = f_final * 4.0 * cfg.T / std::log(static_cast<double>(cfg.T));
  {
    std::ofstream os = em.open("certificates.csv");
    write_cert_csv(os, {{"iterate_identity_max_dev", cfg.T, s.max_dev, 1e-9, s.max_dev <= 1e-9},
                        {"final_value_bound", cfg.T, f_final, bound, f_final > bound}});
  }
  return em.finish(std::move(checks), std::move(results));
}

ExperimentResult run_lip_lower(const ExperimentConfig& cfg, const Emitter& em) {
  const LowerRunStats s = stream_lip_lower(cfg.T, cfg.c);
  const double f_final = s.fvals.back();
  const double bound = lip_lower_bound(cfg.T, cfg.c);
  write_lower_trace_csv(em, s, StepSchedule::c_inverse_sqrt_t(cfg.c));
  if (cfg.T <= 64) {
    LipschitzInstance inst(cfg.T, cfg.c);
    const RunTrace trace = sgd_run(inst.oracle_fn(), inst.domain(),
                                   Vec(static_cast<std::size_t>(cfg.T), 0.0),
                                   StepSchedule::c_inverse_sqrt_t(cfg.c), cfg.T, ReplicaRng(0, 0));
    std::ofstream vos = em.open("vectors.txt");
    write_trace_vectors(vos, trace);
  }

  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < s.fvals.size(); ++i) {
    pts.emplace_back(static_cast<double>(i + 1), s.fvals[i]);
  }
  em.plot_xy("fx_vs_t.csv", "t", "fx", pts);

  std::vector<CheckResult> checks;
  em.check(checks, "iterate_identity_max_dev", s.max_dev <= 1e-9, s.max_dev, 1e-9);
  em.check(checks, "final_value_bound", f_final > bound, f_final, bound);

  json results;
  results["max_identity_deviation"] = s.max_dev;
  results["f_final"] = f_final;
  results["lower_bound"] = bound;
  {
    std::ofstream os = em.open("certificates.csv");
    write_cert_csv(os, {{"iterate_identity_max_dev", cfg.T, s.max_dev, 1e-9, s.max_dev <= 1e-9},
                        {"final_value_bound", cfg.T, f_final, bound, f_final > bound}});
  }
  return em.finish(std::move(checks), std::move(results));
}

ExperimentResult run_lip_monotone(const ExperimentConfig& cfg, const Emitter& em) {
  const LowerRunStats s = stream_lip_lower(cfg.T, cfg.c);
  const double sqrtT = std::sqrt(static_cast<double>(cfg.T));

  std::vector<CertRow> rows;
  std::vector<std::pair<double, double>> pts;
  bool all_pass = true;
  double min_margin = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= cfg.T; ++i) {
    const double gap = s.fvals[static_cast<std::size_t>(i)] - s.fvals[static_cast<std::size_t>(i) - 1];
    const double required = 1.0 / (32.0 * cfg.c * sqrtT * static_cast<double>(cfg.T - i + 1));
    const bool pass = gap >= required;
    all_pass = all_pass && pass;
    min_margin = std::min(min_margin, gap - required);
    rows.push_back({"monotone_step", i, gap, required, pass});
    pts.emplace_back(static_cast<double>(i), gap);
  }
  {
    std::ofstream os = em.open("monotonicity.csv");
    write_cert_csv(os, rows);
  }
  em.plot_xy("gap_vs_i.csv", "i", "gap", pts);

  std::vector<CheckResult> checks;
  em.check(checks, "monotonicity_all_steps", all_pass, min_margin, 0.0);
  em.check(checks, "iterate_identity_max_dev", s.max_dev <= 1e-9, s.max_dev, 1e-9);

  json results;
  results["min_gap_minus_required"] = min_margin;
  results["max_identity_deviation"] = s.max_dev;
  return em.finish(std::move(checks), std::move(results));
}

ExperimentResult run_suffix_lower(const ExperimentConfig& cfg, const Emitter& em) {
  std::vector<int> ks;
  for (int k : cfg.k_list) {
    if (k >= 1 && k <= cfg.T) ks.push_back(k);
  }
  if (ks.empty()) throw ConfigError({"k_list has no entries in [1, T]"});
  const int combos = 20;

  const std::vector<CertRow> sc_rows = certify_sc(cfg.T, ks, combos, cfg.seed);
  const std::vector<CertRow> lip_rows = certify_lip(cfg.T, cfg.c, ks, combos, cfg.seed);

  std::vector<CertRow> all;
  std::vector<std::pair<double, double>> sc_pts, lip_pts;
  for (const CertRow& r : sc_rows) {
    all.push_back({"sc_" + r.check, r.index, r.lhs, r.rhs, r.pass});
    if (r.check == "suffix_bound") sc_pts.emplace_back(r.index, r.lhs);
  }
  for (const CertRow& r : lip_rows) {
    all.push_back({"lip_" + r.check, r.index, r.lhs, r.rhs, r.pass});
    if (r.check == "suffix_bound") lip_pts.emplace_back(r.index, r.lhs);
  }
  {
    std::ofstream os = em.open("certificates.csv");
    write_cert_csv(os, all);
  }
  em.plot_xy("sc_suffix_value_vs_k.csv", "k", "f_worst", sc_pts);
  em.plot_xy("lip_suffix_value_vs_k.csv", "k", "f_worst", lip_pts);

  std::vector<CheckResult> checks;
  bool all_pass = true;
  for (const CertRow& r : all) all_pass = all_pass && r.pass;
  em.check(checks, "all_suffix_certificates", all_pass, all_pass ? 1.0 : 0.0, 1.0);

  json results;
  results["checked_k"] = ks;
  results["rows"] = all.size();
  return em.finish(std::move(checks), std::move(results));
}

ExperimentResult run_lbdelta_last(const ExperimentConfig& cfg, const Emitter& em) {
  const NoiseModel noise = NoiseModel::rademacher_1d();
  const StepSchedule sched = StepSchedule::inverse_t();
  const std::vector<double> finals =
      parallel_collect(cfg.trials, cfg.threads, [&](std::uint64_t r) {
        return quadratic_1d_run(cfg.T, noise, sched, cfg.seed, r).x_final;
      });

  std::vector<TailReport> reports;
  std::vector<CheckResult> checks;
  for (double delta : cfg.delta_grid) {
    const double log1d = std::log(1.0 / delta);
    const double threshold = log1d / (2.0 * cfg.T);  // on f(x_{T+1}) = x^2/2
    std::uint64_t hits = 0;
    for (double x : finals) hits += (0.5 * x * x >= threshold) ? 1 : 0;
    const double rev_chernoff = std::exp(-9.0 * log1d / 2.0);
    TailReport rep = make_tail_report(hits, cfg.trials, threshold, rev_chernoff, delta);
    reports.push_back(rep);
    const double margin = (rep.ci_high - rep.ci_low) / 2.0;
    em.check(checks, "tail_above_reverse_chernoff_delta=" + fmt17(delta),
             rep.empirical >= rep.bound - margin, rep.empirical, rep.bound - margin);
  }
  write_tail_csv(em.open("tailreports.csv"), reports);
  std::vector<std::pair<double, double>> pts;
  for (const TailReport& r : reports) pts.emplace_back(r.delta, r.empirical);
  em.plot_xy("tail_vs_delta.csv", "delta", "empirical", pts);

  json results;
  results["reports"] = reports.size();
  return em.finish(std::move(checks), std::move(results));
}

ExperimentResult run_lbdelta_suffix(const ExperimentConfig& cfg, const Emitter& em) {
  if (cfg.T % 4 != 0) throw ConfigError({"lbdelta-suffix requires T to be a multiple of 4"});
  std::ofstream os = em.open("identity.csv");
  os << "replica,lhs,rhs,absdiff\n";
  double max_diff = 0.0;
  std::vector<std::pair<double, double>> pts;
  for (std::uint64_t r = 0; r < cfg.trials; ++r) {
    std::vector<int> signs(static_cast<std::size_t>(cfg.T));
    StepRng rng(cfg.seed, r, 0);
    for (int& s : signs) s = rng.next_sign() > 0 ? 1 : -1;
    const SuffixIdentity id = suffix_average_identity(signs, cfg.T);
    const double diff = std::fabs(id.lhs - id.rhs);
    max_diff = std::max(max_diff, diff);
    os << r << ',' << fmt17(id.lhs) << ',' << fmt17(id.rhs) << ',' << fmt17(diff) << '\n';
    pts.emplace_back(id.lhs, id.rhs);
  }
  em.plot_xy("lhs_vs_rhs.csv", "lhs", "rhs", pts);

  std::vector<CheckResult> checks;
  em.check(checks, "suffix_identity_max_absdiff", max_diff <= 1e-12, max_diff, 1e-12);
  json results;
  results["max_absdiff"] = max_diff;
  return em.finish(std::move(checks), std::move(results));
}

ExperimentResult run_coupling(const ExperimentConfig& cfg, const Emitter& em) {
  const RescaledScInstance f(cfg.T, cfg.alpha, cfg.L);
  const CouplingResult res =
      couple_runs(f.oracle_fn(), cfg.alpha, cfg.L, f.domain(),
                  Vec(static_cast<std::size_t>(cfg.T), 0.0), cfg.T);

  const double ratio = cfg.alpha / cfg.L;
  std::vector<std::pair<double, double>> pts;
  for (int t = 1; t <= cfg.T + 1; ++t) {
    pts.emplace_back(static_cast<double>(t),
                     linf_dist(res.trace_g.x_at(t), scaled(res.trace_f.x_at(t), ratio)));
  }
  em.plot_xy("deviation_vs_t.csv", "t", "linf_deviation", pts);

  std::vector<CheckResult> checks;
  em.check(checks, "coupling_max_deviation", res.max_deviation <= 1e-10, res.max_deviation, 1e-10);

  json results;
  results["max_deviation"] = res.max_deviation;
  results["alpha"] = cfg.alpha;
  results["L"] = cfg.L;
  return em.finish(std::move(checks), std::move(results));
}

ExperimentResult run_quadratic_quantiles(const ExperimentConfig& cfg, const Emitter& em) {
  const NoiseModel noise = NoiseModel::rademacher_1d();
  const StepSchedule sched = StepSchedule::inverse_t();

  std::ofstream os = em.open("quantiles.csv");
  os << "T,delta,level,final_q,final_q_T,final_q_T_over_lnT,suffix_q,suffix_q_T\n";

  // per delta: scaled final/suffix quantile series across T
  std::vector<std::vector<double>> final_scaled(cfg.delta_grid.size());
  std::vector<std::vector<double>> suffix_scaled(cfg.delta_grid.size());

  std::vector<double> levels;
  for (double delta : cfg.delta_grid) levels.push_back(1.0 - delta);

  for (int T : cfg.T_list) {
    std::vector<double> err_final(cfg.trials), err_suffix(cfg.trials);
    parallel_for(cfg.trials, cfg.threads, [&](std::uint64_t r) {
      const Quadratic1dResult q = quadratic_1d_run(T, noise, sched, cfg.seed, r);
      err_final[static_cast<std::size_t>(r)] = 0.5 * q.x_final * q.x_final;
      err_suffix[static_cast<std::size_t>(r)] = 0.5 * q.suffix_avg * q.suffix_avg;
    });
    const QuantileSummary summary = quantile_summary(T, levels, err_final, err_suffix);

    for (std::size_t di = 0; di < cfg.delta_grid.size(); ++di) {
      const double qf = summary.final_error[di];
      const double qs = summary.suffix_error[di];
      const double lnT = std::log(static_cast<double>(T));
      os << T << ',' << fmt17(cfg.delta_grid[di]) << ',' << fmt17(levels[di]) << ',' << fmt17(qf)
         << ',' << fmt17(qf * T) << ',' << fmt17(qf * T / lnT) << ',' << fmt17(qs) << ','
         << fmt17(qs * T) << '\n';
      final_scaled[di].push_back(qf * T / lnT);
      suffix_scaled[di].push_back(qs * T);
    }
  }

  // Growth verdicts for the first delta in the grid.
  std::vector<CheckResult> checks;
  const std::vector<double>& fs = final_scaled.front();
  const std::vector<double>& ss = suffix_scaled.front();
  em.check(checks, "suffix_error_times_T_bounded", ss.back() <= 2.0 * ss.front(), ss.back(),
           2.0 * ss.front());
  em.check(checks, "final_error_times_T_over_lnT_bounded", fs.back() <= 2.0 * fs.front(),
           fs.back(), 2.0 * fs.front());

  std::vector<std::pair<double, double>> pf, ps;
  for (std::size_t i = 0; i < cfg.T_list.size(); ++i) {
    pf.emplace_back(static_cast<double>(cfg.T_list[i]), fs[i]);
    ps.emplace_back(static_cast<double>(cfg.T_list[i]), ss[i]);
  }
  em.plot_xy("final_scaled_vs_T.csv", "T", "final_q_T_over_lnT", pf);
  em.plot_xy("suffix_scaled_vs_T.csv", "T", "suffix_q_T", ps);

  json results;
  results["final_scaled_first_delta"] = fs;
  results["suffix_scaled_first_delta"] = ss;
  return em.finish(std::move(checks), std::move(results));
}

ExperimentResult run_recursive_tail(const ExperimentConfig& cfg, const Emitter& em) {
  const RecursiveProcessSpec spec = RecursiveProcessSpec::toy_k8(cfg.T);
  const double K = recursive_K(spec);
  const std::vector<double> finals =
      parallel_collect(cfg.trials, cfg.threads, [&](std::uint64_t r) {
        return simulate_recursive(spec, cfg.seed, r).back();
      });

  std::vector<TailReport> reports;
  std::vector<CheckResult> checks;
  for (double delta : cfg.delta_grid) {
    const TailBound tb = recursive_tail_bound(K, delta);
    std::uint64_t hits = 0;
    for (double x : finals) hits += (x >= tb.threshold) ? 1 : 0;
    TailReport rep = make_tail_report(hits, cfg.trials, tb.threshold, tb.bound, delta);
    reports.push_back(rep);
    em.check(checks, "recursive_tail_delta=" + fmt17(delta), rep.ci_high <= rep.bound + 0.005,
             rep.ci_high, rep.bound + 0.005);
  }
  write_tail_csv(em.open("tailreports.csv"), reports);
  std::vector<std::pair<double, double>> pts;
  for (const TailReport& r : reports) pts.emplace_back(r.delta, r.empirical);
  em.plot_xy("tail_vs_delta.csv", "delta", "empirical", pts);

  json results;
  results["K"] = K;
  return em.finish(std::move(checks), std::move(results));
}

// The two martingale families of the generalized-Freedman sweep. Both use
// Rademacher signs w_i and v_{i-1} = b_i^2 (Hoeffding's lemma makes b_i^2 a
// valid sub-Gaussian proxy for d_i = w_i b_i).
MartingaleFamily fixed_b_family(int n, std::uint64_t seed) {
  return [n, seed](std::uint64_t replica) {
    MartingaleTrace trace;
    for (int i = 1; i <= n; ++i) {
      StepRng rng(seed, replica, static_cast<std::uint64_t>(i));
      trace.push(rng.next_sign(), 1.0);
    }
    return trace;
  };
}

// b_{i+1}^2 = clamp(1 + S_i / 16, 1/4, 4): the conditional variance is a
// clamped affine function of the running martingale ("chicken and egg").
MartingaleFamily chicken_egg_family(int n, std::uint64_t seed) {
  return [n, seed](std::uint64_t replica) {
    MartingaleTrace trace;
    double b_sq = 1.0;
    for (int i = 1; i <= n; ++i) {
      StepRng rng(seed, replica, static_cast<std::uint64_t>(i));
      const double b = std::sqrt(b_sq);
      trace.push(rng.next_sign() * b, b_sq);
      b_sq = std::clamp(1.0 + trace.S.back() / 16.0, 0.25, 4.0);
    }
    return trace;
  };
}

std::vector<double> chicken_alpha_weights(int n) {
  // matches the unclamped identity V_n = n + sum_i ((n-i)/16) d_i
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  for (int i = 1; i <= n; ++i) w[static_cast<std::size_t>(i) - 1] = static_cast<double>(n - i) / 16.0;
  return w;
}

ExperimentResult run_freedman_tail(const ExperimentConfig& cfg, const Emitter& em) {
  const int n = cfg.T;
  struct Setting {
    const char* family;
    double x;
    double beta;
  };
  const Setting settings[] = {
      {"fixed", 16.0, 64.0},   {"fixed", 24.0, 64.0},   {"fixed", 32.0, 48.0},
      {"chicken", 16.0, 64.0}, {"chicken", 24.0, 64.0}, {"chicken", 32.0, 64.0},
  };

  std::ofstream os = em.open("freedman.csv");
  os << "family,x,beta,empirical,ci_low,ci_high,bound,trials\n";
  std::vector<CheckResult> checks;
  std::vector<std::pair<double, double>> pts;
  for (const Setting& st : settings) {
    const bool chicken = std::string(st.family) == "chicken";
    const MartingaleFamily fam =
        chicken ? chicken_egg_family(n, cfg.seed) : fixed_b_family(n, cfg.seed);
    const std::vector<double> weights =
        chicken ? chicken_alpha_weights(n) : std::vector<double>();
    const TailReport rep =
        freedman_event_estimate(fam, st.x, st.beta, weights, cfg.trials, cfg.threads);
    os << st.family << ',' << fmt17(st.x) << ',' << fmt17(st.beta) << ',' << fmt17(rep.empirical)
       << ',' << fmt17(rep.ci_low) << ',' << fmt17(rep.ci_high) << ',' << fmt17(rep.bound) << ','
       << rep.trials << '\n';
    em.check(checks,
             std::string("freedman_") + st.family + "_x=" + fmt17(st.x) + "_beta=" + fmt17(st.beta),
             rep.ci_high <= rep.bound + 0.005, rep.ci_high, rep.bound + 0.005);
    pts.emplace_back(st.x, rep.empirical);
  }
  em.plot_xy("event_prob_vs_x.csv", "x", "empirical", pts);

  json results;
  results["n"] = n;
  return em.finish(std::move(checks), std::move(results));
}

ExperimentResult run_decomposition(const ExperimentConfig& cfg, const Emitter& em) {
  const QuadraticInstance inst = QuadraticInstance::box_1d();
  const NoiseModel noise = NoiseModel::rademacher_1d();

  double min_slack_sc = std::numeric_limits<double>::infinity();
  double min_slack_lip = std::numeric_limits<double>::infinity();
  std::ofstream sc_os = em.open("decomposition_sc.csv");
  std::ofstream lip_os = em.open("decomposition_lip.csv");
  sc_os << "replica,f_last,suffix,middle,noise,slack\n";
  lip_os << "replica,f_last,suffix,middle,noise,slack\n";
  for (std::uint64_t r = 0; r < cfg.trials; ++r) {
    {
      const RunTrace trace = sgd_run(inst.oracle_fn(noise), inst.domain(), Vec{0.0},
                                     StepSchedule::inverse_t(), cfg.T, ReplicaRng(cfg.seed, r));
      const DecompositionReport rep = decomposition_check(trace, true);
      min_slack_sc = std::min(min_slack_sc, rep.slack);
      sc_os << r << ',' << fmt17(rep.f_last) << ',' << fmt17(rep.suffix_term) << ','
            << fmt17(rep.middle_term) << ',' << fmt17(rep.noise_term) << ',' << fmt17(rep.slack)
            << '\n';
    }
    {
      const RunTrace trace =
          sgd_run(inst.oracle_fn(noise), inst.domain(), Vec{0.0}, StepSchedule::inverse_sqrt_t(),
                  cfg.T, ReplicaRng(cfg.seed ^ 0x9e3779b9u, r));
      const DecompositionReport rep = decomposition_check(trace, false);
      min_slack_lip = std::min(min_slack_lip, rep.slack);
      lip_os << r << ',' << fmt17(rep.f_last) << ',' << fmt17(rep.suffix_term) << ','
             << fmt17(rep.middle_term) << ',' << fmt17(rep.noise_term) << ',' << fmt17(rep.slack)
             << '\n';
    }
  }

  std::vector<CheckResult> checks;
  em.check(checks, "decomposition_slack_sc", min_slack_sc >= -1e-9, min_slack_sc, -1e-9);
  em.check(checks, "decomposition_slack_lip", min_slack_lip >= -1e-9, min_slack_lip, -1e-9);

  json results;
  results["min_slack_sc"] = min_slack_sc;
  results["min_slack_lip"] = min_slack_lip;
  return em.finish(std::move(checks), std::move(results));
}

ExperimentResult run_ytail(const ExperimentConfig& cfg, const Emitter& em) {
  const NoiseModel noise = NoiseModel::rademacher_1d();
  const StepSchedule sched = StepSchedule::inverse_t();
  const int t = cfg.T;  // Y_t = t * x_{t+1}^2 from a run of length t
  const auto sampler = [&](std::uint64_t r) {
    const double x = quadratic_1d_run(t, noise, sched, cfg.seed, r).x_final;
    return static_cast<double>(t) * x * x;
  };
  const std::vector<TailReport> reports =
      ytail_check(sampler, cfg.delta_grid, cfg.trials, cfg.threads);

  std::vector<CheckResult> checks;
  for (const TailReport& rep : reports) {
    em.check(checks, "ytail_delta=" + fmt17(rep.delta), rep.ci_high <= rep.bound + 0.005,
             rep.ci_high, rep.bound + 0.005);
  }
  write_tail_csv(em.open("tailreports.csv"), reports);
  std::vector<std::pair<double, double>> pts;
  for (const TailReport& r : reports) pts.emplace_back(r.delta, r.empirical);
  em.plot_xy("tail_vs_delta.csv", "delta", "empirical", pts);

  json results;
  results["t"] = t;
  return em.finish(std::move(checks), std::move(results));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  Emitter em(cfg);
  switch (cfg.experiment) {
    case Experiment::kScLower:
      return run_sc_lower(cfg, em);
    case Experiment::kLipLower:
      return run_lip_lower(cfg, em);
    case Experiment::kLipMonotone:
      return run_lip_monotone(cfg, em);
    case Experiment::kSuffixLower:
      return run_suffix_lower(cfg, em);
    case Experiment::kLbDeltaLast:
      return run_lbdelta_last(cfg, em);
    case Experiment::kLbDeltaSuffix:
      return run_lbdelta_suffix(cfg, em);
    case Experiment::kCoupling:
      return run_coupling(cfg, em);
    case Experiment::kQuadraticQuantiles:
      return run_quadratic_quantiles(cfg, em);
    case Experiment::kRecursiveTail:
      return run_recursive_tail(cfg, em);
    case Experiment::kFreedmanTail:
      return run_freedman_tail(cfg, em);
    case Experiment::kDecomposition:
      return run_decomposition(cfg, em);
    case Experiment::kYTail:
      return run_ytail(cfg, em);
  }
  throw std::logic_error("run_experiment: unreachable");
}

}  // namespace sgdlab
