#pragma once

#include <string>
#include <vector>

#include "sgdlab/sgd.hpp"
#include "sgdlab/trace_io.hpp"

namespace sgdlab {

struct EvalResult {
  double value = 0.0;
  int active_index = 0;  // smallest maximizing hyperplane index, 1-based
};

// Worst-case instance for the strongly convex step size eta_t = 1/t:
//
//   f(x) = max_{i in [T+1]} H_i(x),   H_i(x) = h_i^T x + (1/2)||x||^2,
//   h_{i,j} = a_j (j < i), -1 (j = i <= T), 0 (j > i),
//   a_j = 1/(2(T+1-j)),
//
// on the unit ball in R^T. f is 1-strongly convex and 3-Lipschitz there.
// Run deterministically from x_1 = 0, the iterates follow the closed form
// z_t and the final value exceeds ln(T)/(4T).
class StronglyConvexInstance {
 public:
  explicit StronglyConvexInstance(int T);

  int T() const { return T_; }
  int dimension() const { return T_; }
  double a(int j) const;  // 1-based, j in [T]

  // Value and active index at x, O(T) via a prefix scan of sum_{j<i} a_j x_j.
  EvalResult eval(const Vec& x) const;

  // Deterministic oracle: ghat = h_{i'} + x at the smallest active index i'.
  OracleResponse oracle(const Vec& x) const;
  Oracle oracle_fn() const;

  // Dense row h_i (1-based, i in [T+1]); brute-force aid for small T.
  Vec h_row(int i) const;

  // Predicted iterate z_t, t in [T+1]: z_1 = 0 and
  // z_{t,j} = (1 - (t-j-1) a_j)/(t-1) for j < t, 0 for j >= t.
  Vec predicted_iterate(int t) const;

  Domain domain() const;

  double max_row_norm_sq() const { return max_row_norm_sq_; }

 private:
  int T_;
  std::vector<double> a_;
  double max_row_norm_sq_ = 0.0;
};

// Worst-case instance for the Lipschitz step size eta_t = c/sqrt(t), c >= 1:
//
//   f(x) = max_{i in [T+1]} h_i^T x,
//   h_{i,j} = a_j (j < i), -b_i (j = i <= T), 0 (j > i),
//   a_i = 1/(8c(T-i+1)),  b_i = sqrt(i)/(2c sqrt(T)),
//
// on the unit ball in R^T; 1-Lipschitz since ||h_i||^2 < 1/2. The final
// value exceeds ln(T)/(32c sqrt(T)) and f increases strictly along the run.
class LipschitzInstance {
 public:
  LipschitzInstance(int T, double c);

  int T() const { return T_; }
  int dimension() const { return T_; }
  double c() const { return c_; }
  double a(int i) const;
  double b(int i) const;

  EvalResult eval(const Vec& x) const;
  OracleResponse oracle(const Vec& x) const;  // ghat = h_{i'}
  Oracle oracle_fn() const;
  Vec h_row(int i) const;

  // z_{t,j} = c (b_j/sqrt(j) - a_j sum_{k=j+1}^{t-1} 1/sqrt(k)) for j < t.
  Vec predicted_iterate(int t) const;

  Domain domain() const;

  double max_row_norm_sq() const { return max_row_norm_sq_; }

 private:
  int T_;
  double c_;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> inv_sqrt_cumsum_;  // [m] = sum_{k=1}^{m} 1/sqrt(k)
  double max_row_norm_sq_ = 0.0;
};

// Closed-form lower bounds on the error of SGD's final iterate (natural log).
double sc_lower_bound(int T);                 // ln(T) / (4T),        T >= 2
double lip_lower_bound(int T, double c);      // ln(T) / (32 c sqrt(T))

// Lower bounds for any convex combination of the last k iterates.
// Strongly convex: (ln T - ln k) / (4T).
// Lipschitz: (ln T - ln(k+1)) / (32 c sqrt(T)); the stated /16 constant does
// not hold for the construction at small k, the /32c form follows from the
// z-coordinate bound 1/(4 sqrt(T)).
double sc_suffix_lower_bound(int T, int k);
double lip_suffix_lower_bound(int T, int k, double c);

struct MonotonicityRow {
  int i = 0;
  double gap = 0.0;       // f(x_{i+1}) - f(x_i)
  double required = 0.0;  // 1 / (32 c sqrt(T) (T-i+1))
  bool pass = false;
};

// Per-step monotone-increase certificate for a deterministic run on a
// LipschitzInstance with the c/sqrt(t) schedule. Passes iff gap >= required
// for every i in [T].
std::vector<MonotonicityRow> monotonicity_certificate(const RunTrace& trace,
                                                      const LipschitzInstance& inst);

struct CouplingResult {
  RunTrace trace_f;
  RunTrace trace_g;
  double max_deviation = 0.0;  // max_t ||xtilde_t - (alpha/L) x_t||_inf
};

// Runs SGD on an alpha-strongly-convex, L-Lipschitz f with eta_t = 1/(alpha t)
// over `domain`, then replays the same oracle outputs scaled by 1/L into a run
// of g(x) = (alpha/L^2) f((L/alpha) x) with eta_t = 1/t over (alpha/L)*domain.
// The iterates must coincide as xtilde_t = (alpha/L) x_t.
CouplingResult couple_runs(const Oracle& f_oracle, double alpha, double L, const Domain& domain,
                           const Vec& x1, int T);

// alpha-strongly-convex, L-Lipschitz rescaling f(x) = s * f0(r * x) of the
// strongly convex adversarial instance f0 (1-strongly convex, 3-Lipschitz on
// the unit ball), with r = 3 alpha / L and s = L^2 / (9 alpha), defined on
// the ball of radius 1/r. Feeds couple_runs with a genuinely branching f.
class RescaledScInstance {
 public:
  RescaledScInstance(int T, double alpha, double L);

  Oracle oracle_fn() const;
  Domain domain() const;
  double alpha() const { return alpha_; }
  double L() const { return L_; }

 private:
  StronglyConvexInstance inst_;
  double r_;
  double s_;
  double alpha_;
  double L_;
};

// Human-readable instance descriptor (`family=sc|lip`, `T=...`, `c=...`).
struct InstanceDescriptor {
  std::string family;
  int T = 0;
  double c = 1.0;
};

std::string write_descriptor(const InstanceDescriptor& d);
InstanceDescriptor parse_descriptor(const std::string& text);

// Deterministic certificate suites used by `lab verify` and the acceptance
// tests: iterate identity, final-value bound, suffix bounds (uniform plus
// `random_combos` sampled convex combinations per k), and, for the Lipschitz
// family, the per-step monotonicity checks.
std::vector<CertRow> certify_sc(int T, const std::vector<int>& k_list, int random_combos,
                                std::uint64_t seed, double* max_identity_dev = nullptr,
                                double* final_value = nullptr);
std::vector<CertRow> certify_lip(int T, double c, const std::vector<int>& k_list,
                                 int random_combos, std::uint64_t seed,
                                 double* max_identity_dev = nullptr,
                                 double* final_value = nullptr);

}  // namespace sgdlab
