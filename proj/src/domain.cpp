#include "sgdlab/domain.hpp"

#include <algorithm>
#include <stdexcept>

namespace sgdlab {

Domain Domain::euclidean_ball(int dimension, double radius) {
  if (dimension < 1) throw std::invalid_argument("Domain: dimension must be positive");
  if (!(radius > 0.0)) throw std::invalid_argument("Domain: ball radius must be > 0");
  Domain d;
  d.kind_ = DomainKind::kEuclideanBall;
  d.dimension_ = dimension;
  d.radius_ = radius;
  return d;
}

Domain Domain::box(int dimension, double lo, double hi) {
  if (dimension < 1) throw std::invalid_argument("Domain: dimension must be positive");
  if (!(lo < hi)) throw std::invalid_argument("Domain: box requires lo < hi");
  Domain d;
  d.kind_ = DomainKind::kBox;
  d.dimension_ = dimension;
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

Vec Domain::project(const Vec& y) const {
  if (static_cast<int>(y.size()) != dimension_) {
    throw std::invalid_argument("Domain::project: dimension mismatch");
  }
  if (kind_ == DomainKind::kEuclideanBall) {
    const double n = norm(y);
    // Points within the membership tolerance are returned untouched; the
    // rescale can land at ||x|| = r + 1 ulp, so this keeps projection
    // exactly idempotent.
    if (n <= radius_ * (1.0 + 1e-12)) return y;
    Vec r(y);
    const double shrink = radius_ / n;
    for (double& v : r) v *= shrink;
    return r;
  }
  Vec r(y);
  for (double& v : r) v = std::clamp(v, lo_, hi_);
  return r;
}

bool Domain::contains(const Vec& x) const {
  if (static_cast<int>(x.size()) != dimension_) return false;
  if (kind_ == DomainKind::kEuclideanBall) {
    return norm(x) <= radius_ * (1.0 + 1e-12);
  }
  const double scale = std::max(std::fabs(lo_), std::fabs(hi_));
  const double tol = 1e-12 * scale;
  for (double v : x) {
    if (v < lo_ - tol || v > hi_ + tol) return false;
  }
  return true;
}

Domain Domain::scaled(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("Domain::scaled: factor must be > 0");
  if (kind_ == DomainKind::kEuclideanBall) return euclidean_ball(dimension_, radius_ * s);
  return box(dimension_, lo_ * s, hi_ * s);
}

}  // namespace sgdlab
