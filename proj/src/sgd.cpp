#include "sgdlab/sgd.hpp"

#include <stdexcept>
#include <string>

namespace sgdlab {

namespace {

void check_range(int t, int lo, int hi, const char* what) {
  if (t < lo || t > hi) {
    throw std::out_of_range(std::string(what) + ": index " + std::to_string(t) +
                            " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

}  // namespace

const Vec& RunTrace::x_at(int t) const {
  check_range(t, 1, T + 1, "RunTrace::x_at");
  return x[static_cast<std::size_t>(t) - 1];
}

const Vec& RunTrace::y_at(int t) const {
  check_range(t, 2, T + 1, "RunTrace::y_at");
  return y[static_cast<std::size_t>(t) - 2];
}

const OracleResponse& RunTrace::response_at(int t) const {
  check_range(t, 1, T, "RunTrace::response_at");
  return responses[static_cast<std::size_t>(t) - 1];
}

double RunTrace::f_at(int t) const {
  check_range(t, 1, T + 1, "RunTrace::f_at");
  return fvals[static_cast<std::size_t>(t) - 1];
}

void sgd_run_streaming(const Oracle& oracle, const Domain& domain, const Vec& x1,
                       const StepSchedule& schedule, int T, ReplicaRng rng,
                       const IterateObserver& observe) {
  if (T < 1) throw std::invalid_argument("sgd_run: T must be >= 1");
  if (static_cast<int>(x1.size()) != domain.dimension()) {
    throw std::invalid_argument("sgd_run: x1 dimension does not match domain");
  }
  if (!domain.contains(x1)) throw std::invalid_argument("sgd_run: x1 outside the domain");

  Vec x = x1;
  Vec ywork;
  for (int t = 1; t <= T; ++t) {
    StepRng step_rng = rng.at_step(static_cast<std::uint64_t>(t));
    OracleResponse resp = oracle(x, t, step_rng);
    if (static_cast<int>(resp.ghat.size()) != domain.dimension()) {
      throw std::runtime_error("sgd_run: oracle subgradient has wrong dimension at step " +
                               std::to_string(t));
    }
    if (!all_finite(resp.ghat) || !std::isfinite(resp.fx) || !all_finite(resp.zhat)) {
      throw std::runtime_error("sgd_run: non-finite oracle response at step " + std::to_string(t));
    }
    observe(t, x, t == 1 ? nullptr : &ywork, resp.fx, &resp);

    const double eta = schedule.value(t);
    Vec y = x;
    axpy_inplace(y, -eta, resp.ghat);
    x = domain.project(y);
    ywork = std::move(y);
  }
  // Final iterate: one more oracle call for f(x_{T+1}); no step is taken.
  StepRng final_rng = rng.at_step(static_cast<std::uint64_t>(T) + 1);
  OracleResponse last = oracle(x, T + 1, final_rng);
  if (!std::isfinite(last.fx)) {
    throw std::runtime_error("sgd_run: non-finite oracle response at step " + std::to_string(T + 1));
  }
  observe(T + 1, x, &ywork, last.fx, nullptr);
}

RunTrace sgd_run(const Oracle& oracle, const Domain& domain, const Vec& x1,
                 const StepSchedule& schedule, int T, ReplicaRng rng) {
  RunTrace trace;
  trace.T = T;
  trace.schedule = schedule;
  trace.x.reserve(static_cast<std::size_t>(T) + 1);
  trace.y.reserve(static_cast<std::size_t>(T));
  trace.responses.reserve(static_cast<std::size_t>(T));
  trace.fvals.reserve(static_cast<std::size_t>(T) + 1);
  sgd_run_streaming(oracle, domain, x1, schedule, T, rng,
                    [&trace](int t, const Vec& x, const Vec* y, double fx,
                             const OracleResponse* resp) {
                      (void)t;
                      trace.x.push_back(x);
                      if (y != nullptr) trace.y.push_back(*y);
                      trace.fvals.push_back(fx);
                      if (resp != nullptr) trace.responses.push_back(*resp);
                    });
  return trace;
}

Vec suffix_average(const RunTrace& trace, int k) {
  if (k < 1 || k > trace.T + 1) {
    throw std::out_of_range("suffix_average: k must be in [1, T+1]");
  }
  Vec avg(trace.x.front().size(), 0.0);
  for (int t = trace.T - k + 2; t <= trace.T + 1; ++t) {
    axpy_inplace(avg, 1.0, trace.x_at(t));
  }
  for (double& v : avg) v /= static_cast<double>(k);
  return avg;
}

Vec uniform_average(const RunTrace& trace) {
  if (trace.x.empty()) throw std::invalid_argument("uniform_average: empty trace");
  return suffix_average(trace, trace.T + 1);
}

}  // namespace sgdlab
