#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "sgdlab/constructions.hpp"
#include "sgdlab/rng.hpp"

using namespace sgdlab;

namespace {

// Brute-force oracle for the tests: evaluate every hyperplane from its dense
// row. Independent of the prefix-scan path used by the instances.
template <typename Inst>
double brute_force_value(const Inst& inst, const Vec& x, bool add_quadratic) {
  double best = -1e300;
  for (int i = 1; i <= inst.T() + 1; ++i) {
    double v = dot(inst.h_row(i), x);
    if (add_quadratic) v += 0.5 * norm_sq(x);
    best = std::max(best, v);
  }
  return best;
}

Vec random_ball_point(int dim, StepRng& rng, double radius = 1.0) {
  Vec x(static_cast<std::size_t>(dim));
  for (double& v : x) v = 2.0 * rng.next_uniform01() - 1.0;
  const double n = norm(x);
  const double target = radius * rng.next_uniform01();
  if (n > 0.0) {
    for (double& v : x) v *= target / n;
  }
  return x;
}

}  // namespace

TEST_CASE("sc coefficients and predicted iterates match the closed forms") {
  StronglyConvexInstance inst(4);
  CHECK(inst.a(1) == doctest::Approx(0.125).epsilon(1e-16));  // 1/(2*(4+1-1))
  CHECK(inst.a(4) == 0.5);

  // z_1 = 0, z_2 = e_1
  CHECK(inst.predicted_iterate(1) == Vec{0.0, 0.0, 0.0, 0.0});
  CHECK(inst.predicted_iterate(2) == Vec{1.0, 0.0, 0.0, 0.0});
  // T=4, t=3, j=1: a_1 = 1/8, z_{3,1} = (1 - 1/8)/2 = 7/16
  CHECK(inst.predicted_iterate(3)[0] == doctest::Approx(0.4375).epsilon(1e-16));
}

TEST_CASE("sc_eval at zero and at the predicted iterates") {
  StronglyConvexInstance inst(6);
  const EvalResult at0 = inst.eval(Vec(6, 0.0));
  CHECK(at0.value == 0.0);
  CHECK(at0.active_index == 1);

  for (int t = 1; t <= 7; ++t) {
    const Vec z = inst.predicted_iterate(t);
    const EvalResult r = inst.eval(z);
    CHECK(r.active_index == t);  // smallest index of the analytic tie set {t..T+1}
  }
}

TEST_CASE("sc_eval equals brute force over explicit hyperplanes") {
  StronglyConvexInstance inst(6);
  StepRng rng(101, 0, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec x = random_ball_point(6, rng);
    const double expect = brute_force_value(inst, x, true);
    CHECK(inst.eval(x).value == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("sc oracle returns h_1 at the origin and h_t + z_t at z_t") {
  StronglyConvexInstance inst(5);
  const OracleResponse at0 = inst.oracle(Vec(5, 0.0));
  CHECK(at0.ghat == Vec{-1.0, 0.0, 0.0, 0.0, 0.0});  // h_1 + 0

  for (int t = 2; t <= 6; ++t) {
    const Vec z = inst.predicted_iterate(t);
    const OracleResponse r = inst.oracle(z);
    Vec expect = inst.h_row(t);
    axpy_inplace(expect, 1.0, z);
    CHECK(linf_dist(r.ghat, expect) == 0.0);
    CHECK(r.branch == t);
  }
}

TEST_CASE("sc oracle subgradient minus x is always an explicit row") {
  StronglyConvexInstance inst(16);
  StepRng rng(55, 0, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec x = random_ball_point(16, rng);
    const OracleResponse r = inst.oracle(x);
    const Vec h = sub(r.ghat, x);  // (h + x) - x, recovers the row up to rounding
    bool found = false;
    for (int i = 1; i <= 17 && !found; ++i) found = linf_dist(h, inst.h_row(i)) <= 1e-15;
    CHECK(found);
  }
}

TEST_CASE("active set at z_t is exactly {t..T+1}") {
  StronglyConvexInstance inst(16);
  for (int t = 1; t <= 17; ++t) {
    const Vec z = inst.predicted_iterate(t);
    const double q = 0.5 * norm_sq(z);
    double best = -1e300;
    std::vector<double> H(18);
    for (int i = 1; i <= 17; ++i) {
      H[static_cast<std::size_t>(i)] = dot(inst.h_row(i), z) + q;
      best = std::max(best, H[static_cast<std::size_t>(i)]);
    }
    const double tau = 1e-12 * (1.0 + std::fabs(best));
    std::set<int> active;
    for (int i = 1; i <= 17; ++i) {
      if (H[static_cast<std::size_t>(i)] >= best - tau) active.insert(i);
    }
    std::set<int> expect;
    for (int i = t; i <= 17; ++i) expect.insert(i);
    CHECK(active == expect);
  }
}

TEST_CASE("sc z-shape invariants") {
  const int T = 64;
  StronglyConvexInstance inst(T);
  for (int t = 1; t <= T + 1; ++t) {
    const Vec z = inst.predicted_iterate(t);
    for (int j = 1; j <= T; ++j) {
      const double v = z[static_cast<std::size_t>(j) - 1];
      if (j < t) {
        CHECK(v >= 1.0 / (2.0 * (t - 1)) - 1e-15);
      } else {
        CHECK(v == 0.0);
      }
      CHECK(v >= 0.0);
    }
    if (t > 1) CHECK(norm_sq(z) <= 1.0 / (t - 1) + 1e-12);
    CHECK(inst.domain().contains(z));
  }
  CHECK(inst.max_row_norm_sq() < 1.5);
}

TEST_CASE("lip coefficients and predicted iterates match the closed forms") {
  LipschitzInstance inst(4, 1.0);
  // b_1 = 1/(2 c sqrt(T)) = 1/4; h_1 = (-b_1, 0, 0, 0)
  CHECK(inst.b(1) == doctest::Approx(0.25).epsilon(1e-15));
  const OracleResponse at0 = inst.oracle(Vec(4, 0.0));
  CHECK(at0.ghat[0] == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(at0.ghat[1] == 0.0);

  CHECK(inst.predicted_iterate(1) == Vec(4, 0.0));
  // j = t-1 coordinate: c*b_{t-1}/sqrt(t-1) = 1/(2 sqrt(T)) (empty inner sum)
  for (int t = 2; t <= 5; ++t) {
    CHECK(inst.predicted_iterate(t)[static_cast<std::size_t>(t) - 2] ==
          doctest::Approx(0.25).epsilon(1e-14));
  }
  // T=4, c=1, t=3, j=1: 1/4 - (1/32)/sqrt(2), frozen from direct evaluation
  CHECK(inst.predicted_iterate(3)[0] == doctest::Approx(0.2279029130879204).epsilon(1e-15));
}

TEST_CASE("lip_eval equals brute force and f(0) = 0") {
  LipschitzInstance inst(5, 1.0);
  CHECK(inst.eval(Vec(5, 0.0)).value == 0.0);
  StepRng rng(77, 0, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec x = random_ball_point(5, rng);
    const double expect = brute_force_value(inst, x, false);
    CHECK(inst.eval(x).value == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("lip oracle at z_t returns h_t and ghat is always a row") {
  LipschitzInstance inst(12, 2.0);
  for (int t = 1; t <= 13; ++t) {
    const Vec z = inst.predicted_iterate(t);
    const OracleResponse r = inst.oracle(z);
    CHECK(linf_dist(r.ghat, inst.h_row(t)) == 0.0);
  }
  StepRng rng(78, 0, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const OracleResponse r = inst.oracle(random_ball_point(12, rng));
    bool found = false;
    for (int i = 1; i <= 13 && !found; ++i) found = linf_dist(r.ghat, inst.h_row(i)) == 0.0;
    CHECK(found);
  }
}

TEST_CASE("lip z-shape: coordinates in [1/(4 sqrt T), 1/sqrt T] before t") {
  const int T = 64;
  for (double c : {1.0, 2.0}) {
    LipschitzInstance inst(T, c);
    const double lo = 1.0 / (4.0 * std::sqrt(static_cast<double>(T)));
    const double hi = 1.0 / std::sqrt(static_cast<double>(T));
    for (int t = 1; t <= T + 1; ++t) {
      const Vec z = inst.predicted_iterate(t);
      for (int j = 1; j <= T; ++j) {
        const double v = z[static_cast<std::size_t>(j) - 1];
        if (j < t) {
          CHECK(v >= lo - 1e-15);
          CHECK(v <= hi + 1e-15);
        } else {
          CHECK(v == 0.0);
        }
      }
      CHECK(norm(z) <= 1.0 + 1e-12);
    }
    CHECK(inst.max_row_norm_sq() < 0.5);
  }
}

TEST_CASE("iterate identity holds for both families at T=64") {
  {
    StronglyConvexInstance inst(64);
    const RunTrace trace = sgd_run(inst.oracle_fn(), inst.domain(), Vec(64, 0.0),
                                   StepSchedule::inverse_t(), 64, ReplicaRng(0, 0));
    double dev = 0.0;
    for (int t = 1; t <= 65; ++t) dev = std::max(dev, linf_dist(trace.x_at(t), inst.predicted_iterate(t)));
    CHECK(dev <= 1e-9);
    CHECK(trace.f_at(65) > sc_lower_bound(64));
  }
  for (double c : {1.0, 2.0}) {
    LipschitzInstance inst(64, c);
    const RunTrace trace = sgd_run(inst.oracle_fn(), inst.domain(), Vec(64, 0.0),
                                   StepSchedule::c_inverse_sqrt_t(c), 64, ReplicaRng(0, 0));
    double dev = 0.0;
    for (int t = 1; t <= 65; ++t) dev = std::max(dev, linf_dist(trace.x_at(t), inst.predicted_iterate(t)));
    CHECK(dev <= 1e-9);
    CHECK(trace.f_at(65) > lip_lower_bound(64, c));
  }
}

TEST_CASE("lower bound closed forms") {
  CHECK(sc_lower_bound(100) == doctest::Approx(0.011512925464970228).epsilon(1e-15));
  CHECK(lip_lower_bound(100, 1.0) == doctest::Approx(0.014391156831212785).epsilon(1e-15));
  CHECK(sc_lower_bound(2) > 0.0);
  CHECK(lip_lower_bound(2, 1.0) > 0.0);
  CHECK_THROWS_AS(sc_lower_bound(1), std::invalid_argument);
  CHECK_THROWS_AS(lip_lower_bound(1, 1.0), std::invalid_argument);
}

TEST_CASE("suffix lower bound closed forms") {
  CHECK(sc_suffix_lower_bound(64, 64) == 0.0);
  CHECK(sc_suffix_lower_bound(64, 4) == doctest::Approx(0.010830424696249145).epsilon(1e-15));
  CHECK(sc_suffix_lower_bound(64, 1) == sc_lower_bound(64));
  CHECK_THROWS_AS(sc_suffix_lower_bound(64, 0), std::out_of_range);
  CHECK_THROWS_AS(sc_suffix_lower_bound(64, 65), std::out_of_range);
  // Lipschitz form scales as 1/c and uses ln(k+1)
  const double b1 = lip_suffix_lower_bound(256, 4, 1.0);
  CHECK(b1 == doctest::Approx((std::log(256.0) - std::log(5.0)) / (32.0 * 16.0)).epsilon(1e-15));
  CHECK(lip_suffix_lower_bound(256, 4, 2.0) == doctest::Approx(b1 / 2.0).epsilon(1e-15));
}

TEST_CASE("monotonicity certificate passes on a clean run and fails when perturbed") {
  const int T = 64;
  LipschitzInstance inst(T, 1.0);
  RunTrace trace = sgd_run(inst.oracle_fn(), inst.domain(), Vec(T, 0.0),
                           StepSchedule::c_inverse_sqrt_t(1.0), T, ReplicaRng(0, 0));
  const auto rows = monotonicity_certificate(trace, inst);
  CHECK(rows.size() == 64);
  for (const auto& r : rows) CHECK(r.pass);
  CHECK(rows.back().required == doctest::Approx(1.0 / (32.0 * 8.0)).epsilon(1e-14));  // i = T

  // zero one iterate: its function value drops to f(0) = 0 and a check fails
  trace.x[10] = Vec(T, 0.0);
  trace.fvals[10] = inst.eval(trace.x[10]).value;
  const auto perturbed = monotonicity_certificate(trace, inst);
  CHECK(std::any_of(perturbed.begin(), perturbed.end(),
                    [](const MonotonicityRow& r) { return !r.pass; }));
}

TEST_CASE("monotonicity certificate rejects mismatched traces") {
  LipschitzInstance inst(16, 1.0);
  const RunTrace wrong_sched = sgd_run(inst.oracle_fn(), inst.domain(), Vec(16, 0.0),
                                       StepSchedule::inverse_t(), 16, ReplicaRng(0, 0));
  CHECK_THROWS_AS(monotonicity_certificate(wrong_sched, inst), std::invalid_argument);

  LipschitzInstance other(8, 1.0);
  const RunTrace small = sgd_run(other.oracle_fn(), other.domain(), Vec(8, 0.0),
                                 StepSchedule::c_inverse_sqrt_t(1.0), 8, ReplicaRng(0, 0));
  CHECK_THROWS_AS(monotonicity_certificate(small, inst), std::invalid_argument);
}

TEST_CASE("coupling: identity reduction has zero deviation") {
  const RescaledScInstance f(16, 1.0, 1.0);  // g == f
  const CouplingResult res = couple_runs(f.oracle_fn(), 1.0, 1.0, f.domain(), Vec(16, 0.0), 16);
  CHECK(res.max_deviation == 0.0);
}

TEST_CASE("coupling: alpha=2, L=3 rescaled adversarial stays within 1e-10") {
  const RescaledScInstance f(64, 2.0, 3.0);
  const CouplingResult res = couple_runs(f.oracle_fn(), 2.0, 3.0, f.domain(), Vec(64, 0.0), 64);
  CHECK(res.max_deviation <= 1e-10);
  // xtilde_1 = (alpha/L) x_1 exactly
  CHECK(res.trace_g.x_at(1) == scaled(res.trace_f.x_at(1), 2.0 / 3.0));
}

TEST_CASE("coupling rejects mismatched dimensions") {
  const RescaledScInstance f(8, 2.0, 3.0);
  CHECK_THROWS_AS(couple_runs(f.oracle_fn(), 2.0, 3.0, f.domain(), Vec(7, 0.0), 8),
                  std::invalid_argument);
}

TEST_CASE("instance descriptor round trip and validation") {
  const InstanceDescriptor d{"lip", 256, 2.0};
  const InstanceDescriptor back = parse_descriptor(write_descriptor(d));
  CHECK(back.family == "lip");
  CHECK(back.T == 256);
  CHECK(back.c == 2.0);
  CHECK_THROWS_AS(parse_descriptor("family=bogus\nT=4\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_descriptor("family=sc\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_descriptor("family=sc\nT=4\nwhat=1\n"), std::invalid_argument);
}

TEST_CASE("certificate suites pass at T=128") {
  const std::vector<int> ks = {1, 4, 16, 64};
  for (const CertRow& r : certify_sc(128, ks, 20, 1)) CHECK(r.pass);
  for (double c : {1.0, 2.0}) {
    for (const CertRow& r : certify_lip(128, c, ks, 20, 1)) CHECK(r.pass);
  }
}
