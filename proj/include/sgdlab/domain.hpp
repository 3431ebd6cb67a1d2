#pragma once

#include "sgdlab/vec.hpp"

namespace sgdlab {

enum class DomainKind { kEuclideanBall, kBox };

// Feasible region: a Euclidean ball of given radius centered at the origin,
// or a box with the same [lo, hi] interval in every coordinate. Projection
// is closed-form and exact; membership uses a relative tolerance of 1e-12
// times the domain scale, since a ball projection may land at ||x|| = r + 1 ulp.
class Domain {
 public:
  static Domain euclidean_ball(int dimension, double radius);
  static Domain box(int dimension, double lo, double hi);

  Vec project(const Vec& y) const;
  bool contains(const Vec& x) const;

  // Same shape scaled by s > 0 (for the strong-convexity/Lipschitz reduction).
  Domain scaled(double s) const;

  DomainKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  double radius() const { return radius_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  Domain() = default;

  DomainKind kind_ = DomainKind::kEuclideanBall;
  int dimension_ = 0;
  double radius_ = 1.0;  // ball only
  double lo_ = -1.0;     // box only
  double hi_ = 1.0;
};

}  // namespace sgdlab
