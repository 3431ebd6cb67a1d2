#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace sgdlab {

enum class ScheduleKind { kInverseT, kInverseAlphaT, kInverseSqrtT, kCInverseSqrtT };

// Step sizes eta_t: 1/t, 1/(alpha*t), 1/sqrt(t), c/sqrt(t). Positive and
// non-increasing in t for every kind.
class StepSchedule {
 public:
  static StepSchedule inverse_t() { return StepSchedule(ScheduleKind::kInverseT, 1.0, 1.0); }

  static StepSchedule inverse_alpha_t(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("StepSchedule: alpha must be > 0");
    return StepSchedule(ScheduleKind::kInverseAlphaT, alpha, 1.0);
  }

  static StepSchedule inverse_sqrt_t() {
    return StepSchedule(ScheduleKind::kInverseSqrtT, 1.0, 1.0);
  }

  static StepSchedule c_inverse_sqrt_t(double c) {
    if (!(c >= 1.0)) throw std::invalid_argument("StepSchedule: c must be >= 1");
    return StepSchedule(ScheduleKind::kCInverseSqrtT, 1.0, c);
  }

  double value(int t) const {
    if (t < 1) throw std::invalid_argument("StepSchedule::value: t must be >= 1");
    switch (kind_) {
      case ScheduleKind::kInverseT:
        return 1.0 / static_cast<double>(t);
      case ScheduleKind::kInverseAlphaT:
        return 1.0 / (alpha_ * static_cast<double>(t));
      case ScheduleKind::kInverseSqrtT:
        return 1.0 / std::sqrt(static_cast<double>(t));
      case ScheduleKind::kCInverseSqrtT:
        return c_ / std::sqrt(static_cast<double>(t));
    }
    throw std::logic_error("StepSchedule: unreachable");
  }

  ScheduleKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double c() const { return c_; }

  std::string name() const {
    switch (kind_) {
      case ScheduleKind::kInverseT:
        return "inverse-t";
      case ScheduleKind::kInverseAlphaT:
        return "inverse-alpha-t(" + std::to_string(alpha_) + ")";
      case ScheduleKind::kInverseSqrtT:
        return "inverse-sqrt-t";
      case ScheduleKind::kCInverseSqrtT:
        return "c-inverse-sqrt-t(" + std::to_string(c_) + ")";
    }
    return "?";
  }

 private:
  StepSchedule(ScheduleKind kind, double alpha, double c) : kind_(kind), alpha_(alpha), c_(c) {}

  ScheduleKind kind_;
  double alpha_;
  double c_;
};

}  // namespace sgdlab
