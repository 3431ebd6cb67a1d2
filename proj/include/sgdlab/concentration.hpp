#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sgdlab/sgd.hpp"

namespace sgdlab {

// Martingale difference sequence d_i with conditional-variance proxies
// v_{i-1} and their prefix sums S_t, V_t.
struct MartingaleTrace {
  std::vector<double> d;
  std::vector<double> v;
  std::vector<double> S;
  std::vector<double> V;

  void push(double di, double vi);
  std::size_t size() const { return d.size(); }
};

// Coefficients of the recursion X_{s+1} <= alpha_s X_s + beta_s w_s sqrt(X_s)
// + gamma_s; entry s-1 of each list drives the transition X_s -> X_{s+1},
// s = 1..T-1. Requires alpha_s in [0,1), beta_s >= 0, gamma_s >= 0.
struct RecursiveProcessSpec {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> gamma;

  int T() const { return static_cast<int>(alpha.size()) + 1; }
  void validate() const;

  // The family with K = 8 arising from SGD on a 1-strongly-convex,
  // 1-Lipschitz function: per transition s, alpha = (s-1)/s, beta = 2/sqrt(s),
  // gamma = 4/(s+1).
  static RecursiveProcessSpec toy_k8(int T);
};

// K = max_s max( 2 gamma_s / (1 - alpha_s), 2 beta_s^2 / (1 - alpha_s) ).
double recursive_K(const RecursiveProcessSpec& spec);

// Equality-with-clamp simulation X_{s+1} = max(0, alpha_s X_s + beta_s w_s
// sqrt(X_s) + gamma_s) from X_1 = 0, with w_s uniform on {-1,+1}. Returns
// X_1..X_T.
std::vector<double> simulate_recursive(const RecursiveProcessSpec& spec, std::uint64_t seed,
                                       std::uint64_t replica);

struct TailBound {
  double threshold = 0.0;  // K ln(1/delta)
  double bound = 0.0;      // e * delta
};

TailBound recursive_tail_bound(double K, double delta);

// Weighted form: P( sum_t sigma_t X_t >= K ln(1/delta) sum_t sigma_t ) <= e*delta,
// for any sigma_t >= 0. Returns the scaled threshold and the same bound.
TailBound recursive_tail_bound_weighted(double K, double delta, double sigma_sum);

// exp( -x / (4 alpha + 8 beta / x) ), the generalized Freedman tail value.
double freedman_bound(double x, double alpha_max, double beta);

// Empirical tail probability with a 95% Wilson score interval.
struct TailReport {
  double delta = 0.0;
  double threshold = 0.0;
  double empirical = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double bound = 0.0;
  std::uint64_t trials = 0;
};

struct WilsonInterval {
  double low = 0.0;
  double high = 0.0;
};

WilsonInterval wilson95(std::uint64_t successes, std::uint64_t trials);

TailReport make_tail_report(std::uint64_t hits, std::uint64_t trials, double threshold,
                            double bound, double delta = 0.0);

// Produces one martingale trace per replica (closing over its own stream).
using MartingaleFamily = std::function<MartingaleTrace(std::uint64_t replica)>;

// Empirical probability of the event
//   union over t of { S_t >= x  and  V_t <= sum_{i<=t} alpha_i d_i + beta },
// compared against freedman_bound(x, max_i alpha_i, beta). Missing trailing
// alpha weights are treated as zero.
TailReport freedman_event_estimate(const MartingaleFamily& family, double x, double beta,
                                   const std::vector<double>& alpha_weights, std::uint64_t trials,
                                   int threads = 1);

// Noise term of the last-iterate decomposition,
//   Z_T = sum_{k=1}^{floor(T/2)} 1/(k(k+1)) sum_{t=T-k}^{T} <zhat_t, x_t - x_{T-k}>,
// computed directly in O(T^2) inner products.
double compute_ZT(const RunTrace& trace);

// Same quantity by the reordered sum Z_T = sum_t <zhat_t, w_t> with
// w_t = sum_{j=T/2}^{t-1} alpha_j (x_t - x_j); cross-check route.
double compute_ZT_reordered(const RunTrace& trace);

// alpha_j = 1/((T-j)(T-j+1)) and its telescoped partial sum
// sum_{j=a}^{b} alpha_j = 1/(T-b) - 1/(T-a+1), for a < b < T.
double alpha_weight(int T, int j);
double alpha_weight_sum(int T, int a, int b);

struct DecompositionReport {
  double f_last = 0.0;      // f(x_T)
  double suffix_term = 0.0; // (1/(floor(T/2)+1)) sum_{t=floor(T/2)}^{T} f(x_t)
  double middle_term = 0.0; // sum_k 1/(2k(k+1)) sum_{t=T-k}^{T} eta_t ||ghat_t||^2
  double noise_term = 0.0;  // Z_T
  double slack = 0.0;       // suffix + middle + noise - f_last
};

// Exact last-iterate decomposition check: f(x_T) <= suffix + middle + Z_T.
// `strongly_convex` selects the eta_t = 1/t chain; otherwise eta_t = 1/sqrt(t).
DecompositionReport decomposition_check(const RunTrace& trace, bool strongly_convex);

// Tail reports for Y = t ||x_{t+1} - x*||^2 against the K = 8 target:
// empirical P(Y >= 8 ln(1/delta)) vs e*delta per delta. `y_sampler` returns
// one realization of Y per replica (e.g. from quadratic SGD runs).
std::vector<TailReport> ytail_check(const std::function<double(std::uint64_t)>& y_sampler,
                                    const std::vector<double>& delta_grid, std::uint64_t trials,
                                    int threads = 1);

}  // namespace sgdlab
