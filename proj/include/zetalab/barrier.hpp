#pragma once

#include <string>

namespace zetalab {

enum class BarrierKind { kNone, kLogarithmic, kInterpolation, kLinear };

/// Ceiling imposed on the partial sums, indexed by the step j.
struct BarrierSpec {
  BarrierKind kind = BarrierKind::kNone;
  double horizon = 0.0;    // t (logarithmic, interpolation)
  double offset = 0.0;     // y (logarithmic, linear)
  double log_scale = 1.0;  // multiplier of log min(j, t - j)
  double slope = 0.0;      // a (linear)
  double start = 0.0;      // b(0) (interpolation)

  static BarrierSpec none();
  /// y + scale * log(min(j, t - j)), with the log term set to 0 at j = 0 and j = t.
  static BarrierSpec logarithmic(double t, double y, double scale = 1.0);
  /// k/t + (t^{1-alpha}/10)(1 - k/t).
  static BarrierSpec interpolation_alpha(double t, double alpha);
  /// k/t + (theta t/10)(1 - k/t).
  static BarrierSpec interpolation_theta(double t, double theta);
  /// a j + y.
  static BarrierSpec linear(double a, double y);

  bool bounded() const { return kind != BarrierKind::kNone; }
  /// Barrier height at step j (+infinity when unbounded).
  double operator()(double j) const;
  std::string describe() const;
};

}  // namespace zetalab
