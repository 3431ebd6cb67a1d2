#pragma once

#include <istream>
#include <vector>

#include "sgdlab/sgd.hpp"

namespace sgdlab {

enum class NoiseKind { kNone, kRademacher1d, kUniformSphere, kSuffixPattern };

// Stateless noise samplers over an injected stream. Every draw is symmetric
// (zhat and -zhat equally likely) and satisfies ||zhat|| <= 1.
class NoiseModel {
 public:
  static NoiseModel none(int dimension);
  static NoiseModel rademacher_1d();
  static NoiseModel uniform_sphere(int dimension);
  // zhat_t = 0 for t < T/2 or t > 3T/4, otherwise +-1/(4 A_t) where
  // A_t = sum_{i=t}^{T} 1/i. Requires T to be a multiple of 4 so that
  // A_t >= 1/4 on the support.
  static NoiseModel suffix_pattern(int T);

  Vec draw(int t, StepRng& rng) const;
  NoiseKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  int T() const { return T_; }

 private:
  NoiseModel(NoiseKind kind, int dimension, int T) : kind_(kind), dimension_(dimension), T_(T) {}

  NoiseKind kind_;
  int dimension_;
  int T_ = 0;
  std::vector<double> inv4A_;  // suffix pattern magnitudes, indexed by t-1
};

// f(x) = 0.5 ||x||^2 with gradient x; 1-strongly convex and 1-Lipschitz on
// the unit ball. The oracle returns ghat = x - zhat.
class QuadraticInstance {
 public:
  static QuadraticInstance ball(int dimension);
  static QuadraticInstance box_1d();  // domain [-1, 1]

  const Domain& domain() const { return domain_; }
  int dimension() const { return domain_.dimension(); }

  Oracle oracle_fn(NoiseModel noise) const;
  // Replays a fixed noise sequence: zhat_t = given[t-1] (1-D only).
  Oracle replay_oracle(std::vector<double> zhat_by_step) const;

 private:
  explicit QuadraticInstance(Domain domain) : domain_(std::move(domain)) {}
  Domain domain_;
};

// Closed form for the 1-D quadratic run with eta_t = 1/t from x_1 = 0:
// x_{t+1} = (1/t) sum_{i<=t} zhat_i. Input entries must be +-1; returns
// x_2..x_{T+1}.
std::vector<double> lbdelta_closed_form(const std::vector<int>& signs);

// Harmonic tail A_t = sum_{i=t}^{T} 1/i, 1 <= t <= T.
double suffix_A(int T, int t);

struct SuffixIdentity {
  double lhs = 0.0;  // suffix average of the closed-form iterates
  double rhs = 0.0;  // (1/(T/2+1)) sum_{t=T/2}^{3T/4} A_t zhat_t
};

// Both sides of the suffix-average identity under the suffix-pattern noise,
// with zhat_t = signs[t-1] / (4 A_t) on the support and 0 elsewhere.
SuffixIdentity suffix_average_identity(const std::vector<int>& signs, int T);

// One +-1 per line; blank lines and '#' comments ignored.
std::vector<int> load_signs(std::istream& is);

// Scalar fast path for Monte-Carlo sweeps over the 1-D quadratic on [-1, 1]:
// identical step arithmetic to the engine (y = x - eta*(x - zhat), clamp),
// identical draw schedule. Engine equivalence is pinned by tests.
struct Quadratic1dResult {
  double x_final = 0.0;    // x_{T+1}
  double suffix_avg = 0.0; // mean of x_{T/2+1}..x_{T+1}
};

Quadratic1dResult quadratic_1d_run(int T, const NoiseModel& noise, const StepSchedule& schedule,
                                   std::uint64_t seed, std::uint64_t replica);

}  // namespace sgdlab
