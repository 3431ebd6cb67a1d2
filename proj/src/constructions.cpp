#include "sgdlab/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sgdlab {

namespace {

constexpr double kIdentityTol = 1e-9;

// Smallest index whose hyperplane value is within tau of the maximum,
// tau = 1e-12 * (1 + |max|). The analytic tie set at the predicted iterates
// is {t,...,T+1}; tau absorbs rounding so the intended minimum is selected.
double tie_tolerance(double max_value) { return 1e-12 * (1.0 + std::fabs(max_value)); }

}  // namespace

StronglyConvexInstance::StronglyConvexInstance(int T) : T_(T) {
  if (T < 1) throw std::invalid_argument("StronglyConvexInstance: T must be >= 1");
  a_.resize(static_cast<std::size_t>(T));
  for (int j = 1; j <= T; ++j) a_[j - 1] = 1.0 / (2.0 * static_cast<double>(T + 1 - j));
  // ||h_i||^2 = sum_{j<i} a_j^2 + 1 for i <= T; + 0 for i = T+1. The 1-Lipschitz
  // certificate for the rows is ||h_i||^2 < 3/2 (f itself is 3-Lipschitz).
  double prefix = 0.0;
  for (int i = 1; i <= T_ + 1; ++i) {
    const double row = prefix + (i <= T_ ? 1.0 : 0.0);
    max_row_norm_sq_ = std::max(max_row_norm_sq_, row);
    if (i <= T_) prefix += a_[i - 1] * a_[i - 1];
  }
  if (!(max_row_norm_sq_ < 1.5)) {
    throw std::logic_error("StronglyConvexInstance: row norm certificate violated");
  }
}

double StronglyConvexInstance::a(int j) const {
  if (j < 1 || j > T_) throw std::out_of_range("StronglyConvexInstance::a: j outside [T]");
  return a_[j - 1];
}

EvalResult StronglyConvexInstance::eval(const Vec& x) const {
  if (static_cast<int>(x.size()) != T_) {
    throw std::invalid_argument("StronglyConvexInstance::eval: dimension mismatch");
  }
  const double q = 0.5 * norm_sq(x);
  // H_i(x) = P_i - x_i + q for i <= T and P_{T+1} + q for i = T+1, where
  // P_i = sum_{j<i} a_j x_j. Two passes with identical rounding: max, then
  // the smallest index within the tie tolerance.
  double best = -std::numeric_limits<double>::infinity();
  double prefix = 0.0;
  for (int i = 1; i <= T_ + 1; ++i) {
    const double hi = prefix + (i <= T_ ? -x[i - 1] : 0.0) + q;
    if (hi > best) best = hi;
    if (i <= T_) prefix += a_[i - 1] * x[i - 1];
  }
  const double tau = tie_tolerance(best);
  prefix = 0.0;
  for (int i = 1; i <= T_ + 1; ++i) {
    const double hi = prefix + (i <= T_ ? -x[i - 1] : 0.0) + q;
    if (hi >= best - tau) return {best, i};
    prefix += a_[i - 1] * x[i - 1];
  }
  throw std::logic_error("StronglyConvexInstance::eval: no maximizer");
}

OracleResponse StronglyConvexInstance::oracle(const Vec& x) const {
  const EvalResult r = eval(x);
  OracleResponse resp;
  resp.ghat.assign(static_cast<std::size_t>(T_), 0.0);
  for (int j = 1; j < r.active_index; ++j) resp.ghat[j - 1] = a_[j - 1];
  if (r.active_index <= T_) resp.ghat[r.active_index - 1] = -1.0;
  axpy_inplace(resp.ghat, 1.0, x);  // subgradient h_{i'} + x
  resp.zhat.assign(static_cast<std::size_t>(T_), 0.0);
  resp.fx = r.value;
  resp.branch = r.active_index;
  return resp;
}

Oracle StronglyConvexInstance::oracle_fn() const {
  return [inst = *this](const Vec& x, int, StepRng&) { return inst.oracle(x); };
}

Vec StronglyConvexInstance::h_row(int i) const {
  if (i < 1 || i > T_ + 1) throw std::out_of_range("StronglyConvexInstance::h_row");
  Vec h(static_cast<std::size_t>(T_), 0.0);
  for (int j = 1; j < i && j <= T_; ++j) h[j - 1] = a_[j - 1];
  if (i <= T_) h[i - 1] = -1.0;
  return h;
}

Vec StronglyConvexInstance::predicted_iterate(int t) const {
  if (t < 1 || t > T_ + 1) throw std::out_of_range("StronglyConvexInstance::predicted_iterate");
  Vec z(static_cast<std::size_t>(T_), 0.0);
  if (t == 1) return z;
  const double denom = static_cast<double>(t - 1);
  for (int j = 1; j < t; ++j) {
    z[j - 1] = (1.0 - static_cast<double>(t - j - 1) * a_[j - 1]) / denom;
  }
  return z;
}

Domain StronglyConvexInstance::domain() const { return Domain::euclidean_ball(T_, 1.0); }

LipschitzInstance::LipschitzInstance(int T, double c) : T_(T), c_(c) {
  if (T < 1) throw std::invalid_argument("LipschitzInstance: T must be >= 1");
  if (!(c >= 1.0)) throw std::invalid_argument("LipschitzInstance: c must be >= 1");
  a_.resize(static_cast<std::size_t>(T));
  b_.resize(static_cast<std::size_t>(T));
  const double sqrtT = std::sqrt(static_cast<double>(T));
  for (int i = 1; i <= T; ++i) {
    a_[i - 1] = 1.0 / (8.0 * c * static_cast<double>(T - i + 1));
    b_[i - 1] = std::sqrt(static_cast<double>(i)) / (2.0 * c * sqrtT);
  }
  inv_sqrt_cumsum_.resize(static_cast<std::size_t>(T) + 1, 0.0);
  for (int m = 1; m <= T; ++m) {
    inv_sqrt_cumsum_[m] = inv_sqrt_cumsum_[m - 1] + 1.0 / std::sqrt(static_cast<double>(m));
  }
  double prefix = 0.0;
  for (int i = 1; i <= T_ + 1; ++i) {
    const double row = prefix + (i <= T_ ? b_[i - 1] * b_[i - 1] : 0.0);
    max_row_norm_sq_ = std::max(max_row_norm_sq_, row);
    if (i <= T_) prefix += a_[i - 1] * a_[i - 1];
  }
  if (!(max_row_norm_sq_ < 0.5)) {
    throw std::logic_error("LipschitzInstance: row norm certificate violated");
  }
}

double LipschitzInstance::a(int i) const {
  if (i < 1 || i > T_) throw std::out_of_range("LipschitzInstance::a");
  return a_[i - 1];
}

double LipschitzInstance::b(int i) const {
  if (i < 1 || i > T_) throw std::out_of_range("LipschitzInstance::b");
  return b_[i - 1];
}

EvalResult LipschitzInstance::eval(const Vec& x) const {
  if (static_cast<int>(x.size()) != T_) {
    throw std::invalid_argument("LipschitzInstance::eval: dimension mismatch");
  }
  double best = -std::numeric_limits<double>::infinity();
  double prefix = 0.0;
  for (int i = 1; i <= T_ + 1; ++i) {
    const double hi = prefix + (i <= T_ ? -b_[i - 1] * x[i - 1] : 0.0);
    if (hi > best) best = hi;
    if (i <= T_) prefix += a_[i - 1] * x[i - 1];
  }
  const double tau = tie_tolerance(best);
  prefix = 0.0;
  for (int i = 1; i <= T_ + 1; ++i) {
    const double hi = prefix + (i <= T_ ? -b_[i - 1] * x[i - 1] : 0.0);
    if (hi >= best - tau) return {best, i};
    prefix += a_[i - 1] * x[i - 1];
  }
  throw std::logic_error("LipschitzInstance::eval: no maximizer");
}

OracleResponse LipschitzInstance::oracle(const Vec& x) const {
  const EvalResult r = eval(x);
  OracleResponse resp;
  resp.ghat.assign(static_cast<std::size_t>(T_), 0.0);
  for (int j = 1; j < r.active_index; ++j) resp.ghat[j - 1] = a_[j - 1];
  if (r.active_index <= T_) resp.ghat[r.active_index - 1] = -b_[r.active_index - 1];
  resp.zhat.assign(static_cast<std::size_t>(T_), 0.0);
  resp.fx = r.value;
  resp.branch = r.active_index;
  return resp;
}

Oracle LipschitzInstance::oracle_fn() const {
  return [inst = *this](const Vec& x, int, StepRng&) { return inst.oracle(x); };
}

Vec LipschitzInstance::h_row(int i) const {
  if (i < 1 || i > T_ + 1) throw std::out_of_range("LipschitzInstance::h_row");
  Vec h(static_cast<std::size_t>(T_), 0.0);
  for (int j = 1; j < i && j <= T_; ++j) h[j - 1] = a_[j - 1];
  if (i <= T_) h[i - 1] = -b_[i - 1];
  return h;
}

Vec LipschitzInstance::predicted_iterate(int t) const {
  if (t < 1 || t > T_ + 1) throw std::out_of_range("LipschitzInstance::predicted_iterate");
  Vec z(static_cast<std::size_t>(T_), 0.0);
  if (t == 1) return z;
  for (int j = 1; j < t; ++j) {
    // sum_{k=j+1}^{t-1} 1/sqrt(k) via the cumulative table
    const double tail = inv_sqrt_cumsum_[t - 1] - inv_sqrt_cumsum_[j];
    z[j - 1] = c_ * (b_[j - 1] / std::sqrt(static_cast<double>(j)) - a_[j - 1] * tail);
  }
  return z;
}

Domain LipschitzInstance::domain() const { return Domain::euclidean_ball(T_, 1.0); }

double sc_lower_bound(int T) {
  if (T < 2) throw std::invalid_argument("sc_lower_bound: T must be >= 2");
  return std::log(static_cast<double>(T)) / (4.0 * static_cast<double>(T));
}

double lip_lower_bound(int T, double c) {
  if (T < 2) throw std::invalid_argument("lip_lower_bound: T must be >= 2");
  if (!(c >= 1.0)) throw std::invalid_argument("lip_lower_bound: c must be >= 1");
  return std::log(static_cast<double>(T)) / (32.0 * c * std::sqrt(static_cast<double>(T)));
}

double sc_suffix_lower_bound(int T, int k) {
  if (T < 2) throw std::invalid_argument("sc_suffix_lower_bound: T must be >= 2");
  if (k < 1 || k > T) throw std::out_of_range("sc_suffix_lower_bound: k must be in [1, T]");
  return (std::log(static_cast<double>(T)) - std::log(static_cast<double>(k))) /
         (4.0 * static_cast<double>(T));
}

double lip_suffix_lower_bound(int T, int k, double c) {
  if (T < 2) throw std::invalid_argument("lip_suffix_lower_bound: T must be >= 2");
  if (k < 1 || k > T) throw std::out_of_range("lip_suffix_lower_bound: k must be in [1, T]");
  if (!(c >= 1.0)) throw std::invalid_argument("lip_suffix_lower_bound: c must be >= 1");
  return (std::log(static_cast<double>(T)) - std::log(static_cast<double>(k + 1))) /
         (32.0 * c * std::sqrt(static_cast<double>(T)));
}

std::vector<MonotonicityRow> monotonicity_certificate(const RunTrace& trace,
                                                      const LipschitzInstance& inst) {
  if (trace.T != inst.T() || trace.dimension() != inst.dimension()) {
    throw std::invalid_argument("monotonicity_certificate: trace/instance mismatch");
  }
  const bool sqrt_schedule =
      trace.schedule.kind() == ScheduleKind::kCInverseSqrtT ||
      (trace.schedule.kind() == ScheduleKind::kInverseSqrtT && inst.c() == 1.0);
  if (!sqrt_schedule ||
      (trace.schedule.kind() == ScheduleKind::kCInverseSqrtT && trace.schedule.c() != inst.c())) {
    throw std::invalid_argument("monotonicity_certificate: schedule does not match c/sqrt(t)");
  }
  const int T = inst.T();
  const double sqrtT = std::sqrt(static_cast<double>(T));
  std::vector<MonotonicityRow> rows;
  rows.reserve(static_cast<std::size_t>(T));
  for (int i = 1; i <= T; ++i) {
    MonotonicityRow row;
    row.i = i;
    row.gap = trace.f_at(i + 1) - trace.f_at(i);
    row.required = 1.0 / (32.0 * inst.c() * sqrtT * static_cast<double>(T - i + 1));
    row.pass = row.gap >= row.required;
    rows.push_back(row);
  }
  return rows;
}

CouplingResult couple_runs(const Oracle& f_oracle, double alpha, double L, const Domain& domain,
                           const Vec& x1, int T) {
  if (!(alpha > 0.0) || !(L > 0.0)) {
    throw std::invalid_argument("couple_runs: alpha and L must be > 0");
  }
  if (static_cast<int>(x1.size()) != domain.dimension()) {
    throw std::invalid_argument("couple_runs: mismatched dimensions");
  }
  CouplingResult result;
  result.trace_f =
      sgd_run(f_oracle, domain, x1, StepSchedule::inverse_alpha_t(alpha), T, ReplicaRng(0, 0));

  const double s = alpha / L;
  const double value_scale = alpha / (L * L);
  const RunTrace& tf = result.trace_f;
  // The g-run replays the f-run's oracle outputs scaled by 1/L; this is the
  // coupling that makes g's oracle valid for g(x) = (alpha/L^2) f((L/alpha) x).
  Oracle replay = [&tf, L, value_scale](const Vec&, int t, StepRng&) {
    OracleResponse resp;
    if (t <= tf.T) {
      const OracleResponse& src = tf.response_at(t);
      resp.ghat = scaled(src.ghat, 1.0 / L);
      resp.zhat = scaled(src.zhat, 1.0 / L);
      resp.fx = value_scale * src.fx;
      resp.branch = src.branch;
    } else {
      resp.ghat.assign(tf.x.front().size(), 0.0);
      resp.zhat.assign(tf.x.front().size(), 0.0);
      resp.fx = value_scale * tf.f_at(t);
    }
    return resp;
  };
  result.trace_g = sgd_run(replay, domain.scaled(s), scaled(x1, s), StepSchedule::inverse_t(), T,
                           ReplicaRng(0, 0));

  double dev = 0.0;
  for (int t = 1; t <= T + 1; ++t) {
    dev = std::max(dev, linf_dist(result.trace_g.x_at(t), scaled(result.trace_f.x_at(t), s)));
  }
  result.max_deviation = dev;
  return result;
}

RescaledScInstance::RescaledScInstance(int T, double alpha, double L)
    : inst_(T), r_(3.0 * alpha / L), s_(L * L / (9.0 * alpha)), alpha_(alpha), L_(L) {
  if (!(alpha > 0.0) || !(L > 0.0)) {
    throw std::invalid_argument("RescaledScInstance: alpha and L must be > 0");
  }
}

Oracle RescaledScInstance::oracle_fn() const {
  const StronglyConvexInstance inst = inst_;
  const double r = r_;
  const double s = s_;
  return [inst, r, s](const Vec& x, int, StepRng&) {
    OracleResponse inner = inst.oracle(scaled(x, r));
    OracleResponse resp;
    resp.ghat = scaled(inner.ghat, s * r);
    resp.zhat.assign(x.size(), 0.0);
    resp.fx = s * inner.fx;
    resp.branch = inner.branch;
    return resp;
  };
}

Domain RescaledScInstance::domain() const {
  return Domain::euclidean_ball(inst_.dimension(), 1.0 / r_);
}

std::string write_descriptor(const InstanceDescriptor& d) {
  std::ostringstream os;
  os << "family=" << d.family << "\n";
  os << "T=" << d.T << "\n";
  os << "c=" << fmt17(d.c) << "\n";
  return os.str();
}

InstanceDescriptor parse_descriptor(const std::string& text) {
  InstanceDescriptor d;
  bool have_family = false, have_T = false;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("parse_descriptor: expected key=value, got: " + line);
    }
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "family") {
      d.family = val;
      have_family = true;
    } else if (key == "T") {
      d.T = std::stoi(val);
      have_T = true;
    } else if (key == "c") {
      d.c = std::stod(val);
    } else {
      throw std::invalid_argument("parse_descriptor: unknown key: " + key);
    }
  }
  if (!have_family || (d.family != "sc" && d.family != "lip")) {
    throw std::invalid_argument("parse_descriptor: family must be sc or lip");
  }
  if (!have_T || d.T < 1) throw std::invalid_argument("parse_descriptor: T must be >= 1");
  if (d.family == "lip" && !(d.c >= 1.0)) {
    throw std::invalid_argument("parse_descriptor: c must be >= 1");
  }
  return d;
}

namespace {

// Convex weights for the suffix certificates: uniform for combo 0, otherwise
// normalized uniforms from the (seed, k, combo) stream.
std::vector<double> combo_weights(int k, int combo, std::uint64_t seed) {
  std::vector<double> w(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
  if (combo == 0) return w;
  StepRng rng(seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(combo));
  double sum = 0.0;
  for (double& v : w) {
    v = rng.next_uniform01();
    sum += v;
  }
  if (sum <= 0.0) return std::vector<double>(static_cast<std::size_t>(k), 1.0 / k);
  for (double& v : w) v /= sum;
  return w;
}

// Window of the last `size` iterates, indexed by the paper's t.
struct IterateWindow {
  explicit IterateWindow(int size) : size_(size), slots_(static_cast<std::size_t>(size)) {}
  void push(int t, const Vec& x) {
    slots_[static_cast<std::size_t>(t % size_)] = x;
    last_t_ = t;
  }
  const Vec& at(int t) const {
    if (t > last_t_ || t <= last_t_ - size_) throw std::out_of_range("IterateWindow::at");
    return slots_[static_cast<std::size_t>(t % size_)];
  }
  int size_;
  std::vector<Vec> slots_;
  int last_t_ = 0;
};

}  // namespace

std::vector<CertRow> certify_sc(int T, const std::vector<int>& k_list, int random_combos,
                                std::uint64_t seed, double* max_identity_dev,
                                double* final_value) {
  StronglyConvexInstance inst(T);
  int max_k = 1;
  for (int k : k_list) {
    if (k < 1 || k > T) throw std::out_of_range("certify_sc: k must be in [1, T]");
    max_k = std::max(max_k, k);
  }
  IterateWindow window(max_k + 1);
  double max_dev = 0.0;
  double f_final = 0.0;
  sgd_run_streaming(inst.oracle_fn(), inst.domain(), Vec(static_cast<std::size_t>(T), 0.0),
                    StepSchedule::inverse_t(), T, ReplicaRng(0, 0),
                    [&](int t, const Vec& x, const Vec*, double fx, const OracleResponse*) {
                      max_dev = std::max(max_dev, linf_dist(x, inst.predicted_iterate(t)));
                      window.push(t, x);
                      if (t == T + 1) f_final = fx;
                    });
  if (max_identity_dev != nullptr) *max_identity_dev = max_dev;
  if (final_value != nullptr) *final_value = f_final;

  std::vector<CertRow> rows;
  rows.push_back({"iterate_identity_max_dev", T, max_dev, kIdentityTol, max_dev <= kIdentityTol});
  rows.push_back({"final_value_bound", T, f_final, sc_lower_bound(T), f_final > sc_lower_bound(T)});
  for (int k : k_list) {
    double worst = std::numeric_limits<double>::infinity();
    for (int combo = 0; combo <= random_combos; ++combo) {
      const std::vector<double> w = combo_weights(k, combo, seed);
      Vec xbar(static_cast<std::size_t>(T), 0.0);
      // last k iterates: x_{T-k+2} .. x_{T+1}
      for (int idx = 0; idx < k; ++idx) {
        axpy_inplace(xbar, w[static_cast<std::size_t>(idx)], window.at(T - k + 2 + idx));
      }
      worst = std::min(worst, inst.eval(xbar).value);
    }
    const double bound = sc_suffix_lower_bound(T, k);
    rows.push_back({"suffix_bound", k, worst, bound, worst > bound});
  }
  return rows;
}

std::vector<CertRow> certify_lip(int T, double c, const std::vector<int>& k_list,
                                 int random_combos, std::uint64_t seed, double* max_identity_dev,
                                 double* final_value) {
  LipschitzInstance inst(T, c);
  int max_k = 1;
  for (int k : k_list) {
    if (k < 1 || k > T) throw std::out_of_range("certify_lip: k must be in [1, T]");
    max_k = std::max(max_k, k);
  }
  IterateWindow window(max_k + 2);
  double max_dev = 0.0;
  double f_final = 0.0;
  std::vector<double> fvals(static_cast<std::size_t>(T) + 1, 0.0);
  sgd_run_streaming(inst.oracle_fn(), inst.domain(), Vec(static_cast<std::size_t>(T), 0.0),
                    StepSchedule::c_inverse_sqrt_t(c), T, ReplicaRng(0, 0),
                    [&](int t, const Vec& x, const Vec*, double fx, const OracleResponse*) {
                      max_dev = std::max(max_dev, linf_dist(x, inst.predicted_iterate(t)));
                      window.push(t, x);
                      fvals[static_cast<std::size_t>(t) - 1] = fx;
                    });
  f_final = fvals[static_cast<std::size_t>(T)];
  if (max_identity_dev != nullptr) *max_identity_dev = max_dev;
  if (final_value != nullptr) *final_value = f_final;

  std::vector<CertRow> rows;
  rows.push_back({"iterate_identity_max_dev", T, max_dev, kIdentityTol, max_dev <= kIdentityTol});
  rows.push_back(
      {"final_value_bound", T, f_final, lip_lower_bound(T, c), f_final > lip_lower_bound(T, c)});
  for (int k : k_list) {
    double worst = std::numeric_limits<double>::infinity();
    for (int combo = 0; combo <= random_combos; ++combo) {
      const std::vector<double> w = combo_weights(k, combo, seed);
      Vec xbar(static_cast<std::size_t>(T), 0.0);
      // last k iterates within x_1..x_T here: x_{T-k+1} .. x_T
      for (int idx = 0; idx < k; ++idx) {
        axpy_inplace(xbar, w[static_cast<std::size_t>(idx)], window.at(T - k + 1 + idx));
      }
      worst = std::min(worst, inst.eval(xbar).value);
    }
    const double bound = lip_suffix_lower_bound(T, k, c);
    rows.push_back({"suffix_bound", k, worst, bound, worst > bound});
  }
  // Strict per-step increase, reported as the worst gap/required ratio.
  double worst_ratio = std::numeric_limits<double>::infinity();
  const double sqrtT = std::sqrt(static_cast<double>(T));
  for (int i = 1; i <= T; ++i) {
    const double gap = fvals[static_cast<std::size_t>(i)] - fvals[static_cast<std::size_t>(i) - 1];
    const double required = 1.0 / (32.0 * c * sqrtT * static_cast<double>(T - i + 1));
    worst_ratio = std::min(worst_ratio, gap / required);
  }
  rows.push_back({"monotonicity_min_ratio", T, worst_ratio, 1.0, worst_ratio >= 1.0});
  return rows;
}

}  // namespace sgdlab
