#include "sgdlab/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sgdlab {

NoiseModel NoiseModel::none(int dimension) {
  if (dimension < 1) throw std::invalid_argument("NoiseModel::none: bad dimension");
  return NoiseModel(NoiseKind::kNone, dimension, 0);
}

NoiseModel NoiseModel::rademacher_1d() { return NoiseModel(NoiseKind::kRademacher1d, 1, 0); }

NoiseModel NoiseModel::uniform_sphere(int dimension) {
  if (dimension < 1) throw std::invalid_argument("NoiseModel::uniform_sphere: bad dimension");
  return NoiseModel(NoiseKind::kUniformSphere, dimension, 0);
}

NoiseModel NoiseModel::suffix_pattern(int T) {
  if (T < 4 || T % 4 != 0) {
    throw std::invalid_argument("NoiseModel::suffix_pattern: T must be a positive multiple of 4");
  }
  NoiseModel m(NoiseKind::kSuffixPattern, 1, T);
  m.inv4A_.assign(static_cast<std::size_t>(T), 0.0);
  for (int t = T / 2; t <= 3 * T / 4; ++t) {
    m.inv4A_[static_cast<std::size_t>(t) - 1] = 1.0 / (4.0 * suffix_A(T, t));
  }
  return m;
}

Vec NoiseModel::draw(int t, StepRng& rng) const {
  switch (kind_) {
    case NoiseKind::kNone:
      return Vec(static_cast<std::size_t>(dimension_), 0.0);
    case NoiseKind::kRademacher1d:
      return Vec{rng.next_sign()};
    case NoiseKind::kUniformSphere: {
      Vec z(static_cast<std::size_t>(dimension_));
      double n = 0.0;
      do {
        for (double& v : z) v = rng.next_gaussian();
        n = norm(z);
      } while (n == 0.0);
      for (double& v : z) v /= n;
      return z;
    }
    case NoiseKind::kSuffixPattern: {
      if (t < 1 || t > T_) return Vec{0.0};
      const double mag = inv4A_[static_cast<std::size_t>(t) - 1];
      if (mag == 0.0) return Vec{0.0};
      return Vec{rng.next_sign() * mag};
    }
  }
  throw std::logic_error("NoiseModel::draw: unreachable");
}

QuadraticInstance QuadraticInstance::ball(int dimension) {
  return QuadraticInstance(Domain::euclidean_ball(dimension, 1.0));
}

QuadraticInstance QuadraticInstance::box_1d() {
  return QuadraticInstance(Domain::box(1, -1.0, 1.0));
}

Oracle QuadraticInstance::oracle_fn(NoiseModel noise) const {
  if (noise.dimension() != dimension()) {
    throw std::invalid_argument("QuadraticInstance: noise dimension mismatch");
  }
  return [noise](const Vec& x, int t, StepRng& rng) {
    OracleResponse resp;
    resp.zhat = noise.draw(t, rng);
    resp.ghat = x;
    axpy_inplace(resp.ghat, -1.0, resp.zhat);  // ghat = x - zhat
    resp.fx = 0.5 * norm_sq(x);
    return resp;
  };
}

Oracle QuadraticInstance::replay_oracle(std::vector<double> zhat_by_step) const {
  if (dimension() != 1) throw std::invalid_argument("replay_oracle: 1-D instances only");
  return [z = std::move(zhat_by_step)](const Vec& x, int t, StepRng&) {
    OracleResponse resp;
    const double zt =
        (t >= 1 && t <= static_cast<int>(z.size())) ? z[static_cast<std::size_t>(t) - 1] : 0.0;
    resp.zhat = Vec{zt};
    resp.ghat = Vec{x[0] - zt};
    resp.fx = 0.5 * x[0] * x[0];
    return resp;
  };
}

std::vector<int> load_signs(std::istream& is) {
  std::vector<int> signs;
  std::string line;
  while (std::getline(is, line)) {
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    const int v = std::stoi(line.substr(start));
    if (v != 1 && v != -1) throw std::invalid_argument("load_signs: entries must be +1 or -1");
    signs.push_back(v);
  }
  return signs;
}

std::vector<double> lbdelta_closed_form(const std::vector<int>& signs) {
  std::vector<double> x;
  x.reserve(signs.size());
  double sum = 0.0;
  int t = 0;
  for (int s : signs) {
    if (s != 1 && s != -1) {
      throw std::invalid_argument("lbdelta_closed_form: entries must be +1 or -1");
    }
    sum += static_cast<double>(s);
    ++t;
    x.push_back(sum / static_cast<double>(t));  // x_{t+1}
  }
  return x;
}

double suffix_A(int T, int t) {
  if (T < 1) throw std::invalid_argument("suffix_A: T must be >= 1");
  if (t < 1 || t > T) throw std::out_of_range("suffix_A: t must be in [1, T]");
  double s = 0.0;
  for (int i = t; i <= T; ++i) s += 1.0 / static_cast<double>(i);
  return s;
}

SuffixIdentity suffix_average_identity(const std::vector<int>& signs, int T) {
  if (T < 4 || T % 4 != 0) {
    throw std::invalid_argument("suffix_average_identity: T must be a positive multiple of 4");
  }
  if (static_cast<int>(signs.size()) != T) {
    throw std::invalid_argument("suffix_average_identity: need exactly T signs");
  }
  std::vector<double> zhat(static_cast<std::size_t>(T), 0.0);
  for (int t = T / 2; t <= 3 * T / 4; ++t) {
    const int s = signs[static_cast<std::size_t>(t) - 1];
    if (s != 1 && s != -1) {
      throw std::invalid_argument("suffix_average_identity: entries must be +1 or -1");
    }
    zhat[static_cast<std::size_t>(t) - 1] = static_cast<double>(s) / (4.0 * suffix_A(T, t));
  }

  SuffixIdentity id;
  // lhs: suffix average (1/(T/2+1)) sum_{t=T/2+1}^{T+1} x_t of the closed-form
  // iterates x_{t+1} = (1/t) sum_{i<=t} zhat_i.
  double run = 0.0;
  double lhs = 0.0;
  for (int t = 1; t <= T; ++t) {
    run += zhat[static_cast<std::size_t>(t) - 1];
    const double x_next = run / static_cast<double>(t);  // x_{t+1}
    if (t + 1 >= T / 2 + 1) lhs += x_next;
  }
  id.lhs = lhs / static_cast<double>(T / 2 + 1);

  double rhs = 0.0;
  for (int t = T / 2; t <= 3 * T / 4; ++t) {
    rhs += suffix_A(T, t) * zhat[static_cast<std::size_t>(t) - 1];
  }
  id.rhs = rhs / static_cast<double>(T / 2 + 1);
  return id;
}

Quadratic1dResult quadratic_1d_run(int T, const NoiseModel& noise, const StepSchedule& schedule,
                                   std::uint64_t seed, std::uint64_t replica) {
  if (noise.dimension() != 1) throw std::invalid_argument("quadratic_1d_run: 1-D noise required");
  double x = 0.0;
  double suffix_sum = 0.0;
  const int suffix_from = T / 2 + 1;  // iterate indices t >= T/2+1
  for (int t = 1; t <= T; ++t) {
    if (t >= suffix_from) suffix_sum += x;
    StepRng rng(seed, replica, static_cast<std::uint64_t>(t));
    const double z = noise.draw(t, rng)[0];
    const double eta = schedule.value(t);
    const double y = x - eta * (x - z);
    x = std::clamp(y, -1.0, 1.0);
  }
  suffix_sum += x;  // x_{T+1}
  Quadratic1dResult r;
  r.x_final = x;
  r.suffix_avg = suffix_sum / static_cast<double>(T + 1 - suffix_from + 1);
  return r;
}

}  // namespace sgdlab
