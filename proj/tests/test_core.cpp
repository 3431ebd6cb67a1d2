#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "sgdlab/domain.hpp"
#include "sgdlab/rng.hpp"
#include "sgdlab/schedule.hpp"
#include "sgdlab/sgd.hpp"
#include "sgdlab/stochastic.hpp"
#include "sgdlab/trace_io.hpp"

using namespace sgdlab;

TEST_CASE("ball projection: radial scaling and interior points") {
  const Domain ball = Domain::euclidean_ball(2, 1.0);
  const Vec out = ball.project(Vec{2.0, 0.0});
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(out[1] == 0.0);

  const Vec inside = ball.project(Vec{0.3, 0.4});
  CHECK(inside[0] == 0.3);
  CHECK(inside[1] == 0.4);
}

TEST_CASE("box projection clamps coordinate-wise") {
  const Domain box = Domain::box(1, -1.0, 1.0);
  CHECK(box.project(Vec{1.7})[0] == 1.0);
  CHECK(box.project(Vec{-2.5})[0] == -1.0);
  CHECK(box.project(Vec{0.25})[0] == 0.25);
}

TEST_CASE("projection rejects dimension mismatch") {
  const Domain ball = Domain::euclidean_ball(3, 1.0);
  CHECK_THROWS_AS(ball.project(Vec{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("projection is idempotent and nonexpansive") {
  StepRng rng(42, 0, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const int dim = 1 + static_cast<int>(rng.next_u64() % 5);
    const Domain dom = (trial % 2 == 0) ? Domain::euclidean_ball(dim, 1.0 + rng.next_uniform01())
                                        : Domain::box(dim, -1.0 - rng.next_uniform01(), 0.5);
    Vec y(dim), xin(dim);
    for (double& v : y) v = 6.0 * (rng.next_uniform01() - 0.5);
    for (double& v : xin) v = 6.0 * (rng.next_uniform01() - 0.5);
    const Vec x = dom.project(xin);  // a point of the domain
    const Vec py = dom.project(y);
    CHECK(dom.contains(py));
    CHECK(dom.project(py) == py);  // exact idempotence
    const double lhs = norm(sub(py, x));
    const double rhs = norm(sub(y, x));
    CHECK(lhs <= rhs * (1.0 + 1e-12) + 1e-15);
  }
}

TEST_CASE("schedule values") {
  CHECK(StepSchedule::inverse_t().value(4) == 0.25);
  CHECK(StepSchedule::inverse_alpha_t(2.0).value(5) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(StepSchedule::c_inverse_sqrt_t(1.0).value(16) == 0.25);
  CHECK(StepSchedule::inverse_sqrt_t().value(4) == 0.5);
  CHECK_THROWS_AS(StepSchedule::inverse_t().value(0), std::invalid_argument);
  CHECK_THROWS_AS(StepSchedule::inverse_alpha_t(0.0), std::invalid_argument);
  CHECK_THROWS_AS(StepSchedule::c_inverse_sqrt_t(0.5), std::invalid_argument);
}

TEST_CASE("schedules are positive and non-increasing") {
  const StepSchedule scheds[] = {StepSchedule::inverse_t(), StepSchedule::inverse_alpha_t(2.5),
                                 StepSchedule::inverse_sqrt_t(), StepSchedule::c_inverse_sqrt_t(3.0)};
  for (const auto& s : scheds) {
    double prev = s.value(1);
    CHECK(prev > 0.0);
    for (int t = 2; t <= 200; ++t) {
      const double v = s.value(t);
      CHECK(v > 0.0);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("noiseless quadratic started at the minimizer stays there") {
  const QuadraticInstance inst = QuadraticInstance::box_1d();
  const RunTrace trace = sgd_run(inst.oracle_fn(NoiseModel::none(1)), inst.domain(), Vec{0.0},
                                 StepSchedule::inverse_t(), 10, ReplicaRng(1, 0));
  for (int t = 1; t <= 11; ++t) CHECK(trace.x_at(t)[0] == 0.0);
  CHECK(trace.f_at(11) == 0.0);
}

TEST_CASE("sgd_run is deterministic given the seed") {
  const QuadraticInstance inst = QuadraticInstance::box_1d();
  const Oracle oracle = inst.oracle_fn(NoiseModel::rademacher_1d());
  const RunTrace a = sgd_run(oracle, inst.domain(), Vec{0.0}, StepSchedule::inverse_t(), 60,
                             ReplicaRng(7, 3));
  const RunTrace b = sgd_run(oracle, inst.domain(), Vec{0.0}, StepSchedule::inverse_t(), 60,
                             ReplicaRng(7, 3));
  for (int t = 1; t <= 61; ++t) {
    CHECK(a.x_at(t) == b.x_at(t));  // bitwise
    CHECK(a.f_at(t) == b.f_at(t));
  }
  for (int t = 1; t <= 60; ++t) CHECK(a.response_at(t).zhat == b.response_at(t).zhat);
}

TEST_CASE("sgd_run enforces the trace recurrence") {
  const QuadraticInstance inst = QuadraticInstance::box_1d();
  const RunTrace trace = sgd_run(inst.oracle_fn(NoiseModel::rademacher_1d()), inst.domain(),
                                 Vec{0.0}, StepSchedule::inverse_t(), 40, ReplicaRng(11, 0));
  const Domain dom = inst.domain();
  for (int t = 1; t <= 40; ++t) {
    Vec y = trace.x_at(t);
    axpy_inplace(y, -trace.schedule.value(t), trace.response_at(t).ghat);
    CHECK(y == trace.y_at(t + 1));
    CHECK(dom.project(y) == trace.x_at(t + 1));
    CHECK(dom.contains(trace.x_at(t)));
  }
}

TEST_CASE("sgd_run rejects a non-finite oracle and mentions the step") {
  const Domain dom = Domain::box(1, -1.0, 1.0);
  const Oracle bad = [](const Vec& x, int t, StepRng&) {
    OracleResponse r;
    r.ghat = Vec{t == 5 ? std::numeric_limits<double>::quiet_NaN() : x[0]};
    r.zhat = Vec{0.0};
    r.fx = 0.5 * x[0] * x[0];
    return r;
  };
  try {
    sgd_run(bad, dom, Vec{0.5}, StepSchedule::inverse_t(), 10, ReplicaRng(0, 0));
    FAIL("expected sgd_run to throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("step 5") != std::string::npos);
  }
}

TEST_CASE("sgd_run rejects an initial point outside the domain") {
  const QuadraticInstance inst = QuadraticInstance::box_1d();
  CHECK_THROWS_AS(sgd_run(inst.oracle_fn(NoiseModel::none(1)), inst.domain(), Vec{1.5},
                          StepSchedule::inverse_t(), 5, ReplicaRng(0, 0)),
                  std::invalid_argument);
}

TEST_CASE("suffix average edge cases") {
  const QuadraticInstance inst = QuadraticInstance::box_1d();
  const RunTrace trace = sgd_run(inst.oracle_fn(NoiseModel::rademacher_1d()), inst.domain(),
                                 Vec{0.0}, StepSchedule::inverse_t(), 15, ReplicaRng(3, 1));
  // k = 1: the final iterate, exactly
  CHECK(suffix_average(trace, 1) == trace.x_at(16));
  // k = T+1 coincides with the uniform average
  CHECK(suffix_average(trace, 16) == uniform_average(trace));
  CHECK_THROWS_AS(suffix_average(trace, 0), std::out_of_range);
  CHECK_THROWS_AS(suffix_average(trace, 17), std::out_of_range);
}

TEST_CASE("suffix average of a constant trace is that constant") {
  const Domain dom = Domain::box(1, -1.0, 1.0);
  const Oracle zero_grad = [](const Vec& x, int, StepRng&) {
    OracleResponse r;
    r.ghat = Vec{0.0};
    r.zhat = Vec{0.0};
    r.fx = x[0];
    return r;
  };
  const RunTrace trace = sgd_run(zero_grad, dom, Vec{0.75}, StepSchedule::inverse_t(), 9,
                                 ReplicaRng(0, 0));
  for (int k = 1; k <= 10; ++k) CHECK(suffix_average(trace, k)[0] == 0.75);
}

TEST_CASE("uniform average: T=1 two-point mean") {
  const Domain dom = Domain::box(1, -4.0, 4.0);
  const Oracle oracle = [](const Vec& x, int, StepRng&) {
    OracleResponse r;
    r.ghat = Vec{-2.0};  // y_2 = 0 - 1*(-2) = 2
    r.zhat = Vec{0.0};
    r.fx = x[0];
    return r;
  };
  const RunTrace trace = sgd_run(oracle, dom, Vec{0.0}, StepSchedule::inverse_t(), 1,
                                 ReplicaRng(0, 0));
  CHECK(trace.x_at(2)[0] == 2.0);
  CHECK(uniform_average(trace)[0] == 1.0);
}

TEST_CASE("uniform average matches closed-form summation on a replayed run") {
  // Independent route: average the closed-form iterates x_{t+1} = S_t / t.
  const std::vector<int> signs = {1, -1, 1, 1, -1, 1, -1, -1, 1, 1};
  const int T = static_cast<int>(signs.size());
  const std::vector<double> closed = lbdelta_closed_form(signs);
  double expect = 0.0;  // x_1 = 0 contributes nothing
  for (double v : closed) expect += v;
  expect /= static_cast<double>(T + 1);

  const QuadraticInstance inst = QuadraticInstance::box_1d();
  std::vector<double> zhat(signs.begin(), signs.end());
  const RunTrace trace = sgd_run(inst.replay_oracle(zhat), inst.domain(), Vec{0.0},
                                 StepSchedule::inverse_t(), T, ReplicaRng(0, 0));
  CHECK(uniform_average(trace)[0] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("trace csv export has the pinned shape and 17-digit reals") {
  const QuadraticInstance inst = QuadraticInstance::box_1d();
  const RunTrace trace = sgd_run(inst.oracle_fn(NoiseModel::rademacher_1d()), inst.domain(),
                                 Vec{0.0}, StepSchedule::inverse_t(), 4, ReplicaRng(5, 0));
  std::ostringstream os;
  write_trace_csv(os, trace);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,fx,norm_x,step");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 5);

  // fmt17 round-trips doubles exactly
  const double v = 0.1234567890123456789;
  CHECK(std::stod(fmt17(v)) == v);
  CHECK(std::stod(fmt17(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("vector dump emits one line per iterate") {
  const QuadraticInstance inst = QuadraticInstance::box_1d();
  const RunTrace trace = sgd_run(inst.oracle_fn(NoiseModel::none(1)), inst.domain(), Vec{0.5},
                                 StepSchedule::inverse_t(), 3, ReplicaRng(0, 0));
  std::ostringstream os;
  write_trace_vectors(os, trace);
  std::istringstream is(os.str());
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("counter rng is reproducible and order independent") {
  StepRng a(9, 4, 17);
  StepRng b(9, 4, 17);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  // different step index gives a different stream
  StepRng c(9, 4, 18);
  CHECK(StepRng(9, 4, 17).next_u64() != c.next_u64());
  // uniform01 in [0, 1)
  StepRng d(1, 2, 3);
  for (int i = 0; i < 1000; ++i) {
    const double u = d.next_uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}
