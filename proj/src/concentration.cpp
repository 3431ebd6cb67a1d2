#include "sgdlab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sgdlab/parallel.hpp"
#include "sgdlab/rng.hpp"

namespace sgdlab {

void MartingaleTrace::push(double di, double vi) {
  if (!(vi >= 0.0)) throw std::invalid_argument("MartingaleTrace: v entries must be >= 0");
  d.push_back(di);
  v.push_back(vi);
  S.push_back((S.empty() ? 0.0 : S.back()) + di);
  V.push_back((V.empty() ? 0.0 : V.back()) + vi);
}

void RecursiveProcessSpec::validate() const {
  if (alpha.size() != beta.size() || alpha.size() != gamma.size()) {
    throw std::invalid_argument("RecursiveProcessSpec: coefficient lists must have equal length");
  }
  if (alpha.empty()) throw std::invalid_argument("RecursiveProcessSpec: no transitions");
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] >= 0.0) || alpha[i] >= 1.0) {
      throw std::invalid_argument("RecursiveProcessSpec: alpha must lie in [0, 1)");
    }
    if (!(beta[i] >= 0.0) || !(gamma[i] >= 0.0)) {
      throw std::invalid_argument("RecursiveProcessSpec: beta and gamma must be >= 0");
    }
  }
}

RecursiveProcessSpec RecursiveProcessSpec::toy_k8(int T) {
  if (T < 2) throw std::invalid_argument("toy_k8: T must be >= 2");
  RecursiveProcessSpec spec;
  spec.alpha.reserve(static_cast<std::size_t>(T) - 1);
  for (int s = 1; s <= T - 1; ++s) {
    const double sd = static_cast<double>(s);
    spec.alpha.push_back((sd - 1.0) / sd);
    spec.beta.push_back(2.0 / std::sqrt(sd));
    spec.gamma.push_back(4.0 / (sd + 1.0));
  }
  return spec;
}

double recursive_K(const RecursiveProcessSpec& spec) {
  spec.validate();
  double K = 0.0;
  for (std::size_t i = 0; i < spec.alpha.size(); ++i) {
    const double denom = 1.0 - spec.alpha[i];
    K = std::max(K, 2.0 * spec.gamma[i] / denom);
    K = std::max(K, 2.0 * spec.beta[i] * spec.beta[i] / denom);
  }
  return K;
}

std::vector<double> simulate_recursive(const RecursiveProcessSpec& spec, std::uint64_t seed,
                                       std::uint64_t replica) {
  spec.validate();
  const int T = spec.T();
  std::vector<double> X(static_cast<std::size_t>(T), 0.0);
  for (int s = 1; s <= T - 1; ++s) {
    StepRng rng(seed, replica, static_cast<std::uint64_t>(s));
    const double w = rng.next_sign();
    const double xs = X[static_cast<std::size_t>(s) - 1];
    const double next = spec.alpha[static_cast<std::size_t>(s) - 1] * xs +
                        spec.beta[static_cast<std::size_t>(s) - 1] * w * std::sqrt(xs) +
                        spec.gamma[static_cast<std::size_t>(s) - 1];
    X[static_cast<std::size_t>(s)] = std::max(0.0, next);
  }
  return X;
}

TailBound recursive_tail_bound(double K, double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("recursive_tail_bound: delta must lie in (0, 1)");
  }
  TailBound b;
  b.threshold = K * std::log(1.0 / delta);
  b.bound = std::exp(1.0) * delta;
  return b;
}

TailBound recursive_tail_bound_weighted(double K, double delta, double sigma_sum) {
  if (!(sigma_sum >= 0.0)) {
    throw std::invalid_argument("recursive_tail_bound_weighted: sigma_sum must be >= 0");
  }
  TailBound b = recursive_tail_bound(K, delta);
  b.threshold *= sigma_sum;
  return b;
}

double freedman_bound(double x, double alpha_max, double beta) {
  if (!(x > 0.0)) throw std::invalid_argument("freedman_bound: x must be > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("freedman_bound: beta must be > 0");
  if (!(alpha_max >= 0.0)) throw std::invalid_argument("freedman_bound: alpha must be >= 0");
  return std::exp(-x / (4.0 * alpha_max + 8.0 * beta / x));
}

WilsonInterval wilson95(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("wilson95: trials must be > 0");
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2n = z * z / n;
  const double denom = 1.0 + z2n;
  const double center = (p + z2n / 2.0) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / denom;
  // rounding must not push the interval off the point estimate
  const double low = std::min(p, std::max(0.0, center - half));
  const double high = std::max(p, std::min(1.0, center + half));
  return {low, high};
}

TailReport make_tail_report(std::uint64_t hits, std::uint64_t trials, double threshold,
                            double bound, double delta) {
  TailReport r;
  r.delta = delta;
  r.threshold = threshold;
  r.trials = trials;
  r.empirical = static_cast<double>(hits) / static_cast<double>(trials);
  const WilsonInterval ci = wilson95(hits, trials);
  r.ci_low = ci.low;
  r.ci_high = ci.high;
  r.bound = bound;
  return r;
}

TailReport freedman_event_estimate(const MartingaleFamily& family, double x, double beta,
                                   const std::vector<double>& alpha_weights, std::uint64_t trials,
                                   int threads) {
  double alpha_max = 0.0;
  for (double a : alpha_weights) {
    if (!(a >= 0.0)) throw std::invalid_argument("freedman_event_estimate: alpha weights >= 0");
    alpha_max = std::max(alpha_max, a);
  }
  const std::uint64_t hits = parallel_count(trials, threads, [&](std::uint64_t replica) {
    const MartingaleTrace trace = family(replica);
    double weighted = 0.0;
    for (std::size_t t = 0; t < trace.size(); ++t) {
      const double at = t < alpha_weights.size() ? alpha_weights[t] : 0.0;
      weighted += at * trace.d[t];
      if (trace.S[t] >= x && trace.V[t] <= weighted + beta) return true;
    }
    return false;
  });
  return make_tail_report(hits, trials, x, freedman_bound(x, alpha_max, beta));
}

namespace {

void require_zhat(const RunTrace& trace) {
  for (int t = 1; t <= trace.T; ++t) {
    if (static_cast<int>(trace.response_at(t).zhat.size()) != trace.dimension()) {
      throw std::invalid_argument("compute_ZT: trace is missing zhat records");
    }
  }
}

}  // namespace

double compute_ZT(const RunTrace& trace) {
  require_zhat(trace);
  const int T = trace.T;
  if (T < 2) throw std::invalid_argument("compute_ZT: T must be >= 2");
  double Z = 0.0;
  for (int k = 1; k <= T / 2; ++k) {
    double inner = 0.0;
    const Vec& anchor = trace.x_at(T - k);
    for (int t = T - k; t <= T; ++t) {
      inner += dot(trace.response_at(t).zhat, sub(trace.x_at(t), anchor));
    }
    Z += inner / (static_cast<double>(k) * static_cast<double>(k + 1));
  }
  return Z;
}

double compute_ZT_reordered(const RunTrace& trace) {
  require_zhat(trace);
  const int T = trace.T;
  if (T < 2) throw std::invalid_argument("compute_ZT_reordered: T must be >= 2");
  const int lo = T - T / 2;  // smallest anchor index T-k
  double Z = 0.0;
  for (int t = lo; t <= T; ++t) {
    Vec w(static_cast<std::size_t>(trace.dimension()), 0.0);
    for (int j = lo; j <= t - 1; ++j) {
      axpy_inplace(w, alpha_weight(T, j), sub(trace.x_at(t), trace.x_at(j)));
    }
    Z += dot(trace.response_at(t).zhat, w);
  }
  return Z;
}

double alpha_weight(int T, int j) {
  if (j < 1 || j >= T) throw std::out_of_range("alpha_weight: need 1 <= j < T");
  return 1.0 / (static_cast<double>(T - j) * static_cast<double>(T - j + 1));
}

double alpha_weight_sum(int T, int a, int b) {
  if (!(1 <= a && a < b && b < T)) throw std::out_of_range("alpha_weight_sum: need 1 <= a < b < T");
  return 1.0 / static_cast<double>(T - b) - 1.0 / static_cast<double>(T - a + 1);
}

DecompositionReport decomposition_check(const RunTrace& trace, bool strongly_convex) {
  const ScheduleKind kind = trace.schedule.kind();
  if (strongly_convex) {
    if (kind != ScheduleKind::kInverseT &&
        !(kind == ScheduleKind::kInverseAlphaT && trace.schedule.alpha() == 1.0)) {
      throw std::invalid_argument("decomposition_check: strongly convex chain needs eta_t = 1/t");
    }
  } else {
    if (kind != ScheduleKind::kInverseSqrtT &&
        !(kind == ScheduleKind::kCInverseSqrtT && trace.schedule.c() == 1.0)) {
      throw std::invalid_argument("decomposition_check: Lipschitz chain needs eta_t = 1/sqrt(t)");
    }
  }
  const int T = trace.T;
  if (T < 2) throw std::invalid_argument("decomposition_check: T must be >= 2");
  const int half = T / 2;

  DecompositionReport rep;
  rep.f_last = trace.f_at(T);
  // S_{floor(T/2)} of the induction: mean of f over t = T - floor(T/2) .. T,
  // which is t = T/2 .. T when T is even.
  double suffix = 0.0;
  for (int t = T - half; t <= T; ++t) suffix += trace.f_at(t);
  rep.suffix_term = suffix / static_cast<double>(half + 1);

  double middle = 0.0;
  for (int k = 1; k <= half; ++k) {
    double inner = 0.0;
    for (int t = T - k; t <= T; ++t) {
      inner += trace.schedule.value(t) * norm_sq(trace.response_at(t).ghat);
    }
    middle += inner / (2.0 * static_cast<double>(k) * static_cast<double>(k + 1));
  }
  rep.middle_term = middle;
  rep.noise_term = compute_ZT(trace);
  rep.slack = rep.suffix_term + rep.middle_term + rep.noise_term - rep.f_last;
  return rep;
}

std::vector<TailReport> ytail_check(const std::function<double(std::uint64_t)>& y_sampler,
                                    const std::vector<double>& delta_grid, std::uint64_t trials,
                                    int threads) {
  const std::vector<double> samples = parallel_collect(trials, threads, y_sampler);
  std::vector<TailReport> reports;
  reports.reserve(delta_grid.size());
  for (double delta : delta_grid) {
    const TailBound tb = recursive_tail_bound(8.0, delta);
    std::uint64_t hits = 0;
    for (double y : samples) hits += (y >= tb.threshold) ? 1 : 0;
    reports.push_back(make_tail_report(hits, trials, tb.threshold, tb.bound, delta));
  }
  return reports;
}

}  // namespace sgdlab
