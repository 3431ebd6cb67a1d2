#pragma once

#include <functional>
#include <vector>

#include "sgdlab/domain.hpp"
#include "sgdlab/rng.hpp"
#include "sgdlab/schedule.hpp"
#include "sgdlab/vec.hpp"

namespace sgdlab {

// One oracle answer: ghat is the stochastic subgradient actually returned,
// zhat the noise it subtracted (so the true subgradient is ghat + zhat),
// fx the function value at the queried point, and branch an optional tag
// identifying which hyperplane the oracle selected (0 if not applicable).
struct OracleResponse {
  Vec ghat;
  Vec zhat;
  double fx = 0.0;
  int branch = 0;
};

// Subgradient oracle callback: (x, step index t, per-step random stream).
using Oracle = std::function<OracleResponse(const Vec& x, int t, StepRng& rng)>;

// Full record of one SGD execution. Public accessors use the 1-based
// indices x_1..x_{T+1}; storage is 0-based.
struct RunTrace {
  int T = 0;
  StepSchedule schedule = StepSchedule::inverse_t();
  std::vector<Vec> x;                     // x[t-1] = x_t, t = 1..T+1
  std::vector<Vec> y;                     // y[t-2] = y_t, t = 2..T+1 (pre-projection)
  std::vector<OracleResponse> responses;  // responses[t-1], t = 1..T
  std::vector<double> fvals;              // fvals[t-1] = f(x_t), t = 1..T+1

  const Vec& x_at(int t) const;
  const Vec& y_at(int t) const;
  const OracleResponse& response_at(int t) const;
  double f_at(int t) const;
  int dimension() const { return x.empty() ? 0 : static_cast<int>(x.front().size()); }
};

// Called once per iterate, t = 1..T+1. `y` is the pre-projection point that
// produced x_t (null at t = 1); `resp` is the oracle response queried at x_t
// (null at t = T+1, where the oracle is consulted for the function value only).
using IterateObserver =
    std::function<void(int t, const Vec& x, const Vec* y, double fx, const OracleResponse* resp)>;

// Projected stochastic subgradient descent:
//   y_{t+1} = x_t - eta_t * ghat_t,  x_{t+1} = project(y_{t+1}).
// Deterministic given (oracle, x1, schedule, T, rng). The streaming form
// keeps O(dim) state and is the one to use when T equals the dimension and
// storing the full trace would be wasteful.
void sgd_run_streaming(const Oracle& oracle, const Domain& domain, const Vec& x1,
                       const StepSchedule& schedule, int T, ReplicaRng rng,
                       const IterateObserver& observe);

RunTrace sgd_run(const Oracle& oracle, const Domain& domain, const Vec& x1,
                 const StepSchedule& schedule, int T, ReplicaRng rng);

// Unweighted mean of the last k iterates x_{T-k+2}..x_{T+1}, 1 <= k <= T+1.
Vec suffix_average(const RunTrace& trace, int k);

// Mean of x_1..x_{T+1}.
Vec uniform_average(const RunTrace& trace);

}  // namespace sgdlab
