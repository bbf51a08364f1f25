#include "zetalab/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "zetalab/error.hpp"

namespace zetalab {

BarrierSpec BarrierSpec::none() { return {}; }

BarrierSpec BarrierSpec::logarithmic(double t, double y, double scale) {
  if (!(t > 0.0)) throw DomainError("logarithmic barrier: horizon must be positive");
  BarrierSpec b;
  b.kind = BarrierKind::kLogarithmic;
  b.horizon = t;
  b.offset = y;
  b.log_scale = scale;
  return b;
}

BarrierSpec BarrierSpec::interpolation_alpha(double t, double alpha) {
  if (!(t > 0.0)) throw DomainError("interpolation barrier: horizon must be positive");
  BarrierSpec b;
  b.kind = BarrierKind::kInterpolation;
  b.horizon = t;
  b.start = std::pow(t, 1.0 - alpha) / 10.0;
  return b;
}

BarrierSpec BarrierSpec::interpolation_theta(double t, double theta) {
  if (!(t > 0.0)) throw DomainError("interpolation barrier: horizon must be positive");
  BarrierSpec b;
  b.kind = BarrierKind::kInterpolation;
  b.horizon = t;
  b.start = theta * t / 10.0;
  return b;
}

BarrierSpec BarrierSpec::linear(double a, double y) {
  BarrierSpec b;
  b.kind = BarrierKind::kLinear;
  b.slope = a;
  b.offset = y;
  return b;
}

double BarrierSpec::operator()(double j) const {
  switch (kind) {
    case BarrierKind::kNone:
      return std::numeric_limits<double>::infinity();
    case BarrierKind::kLogarithmic: {
      if (j < 0.0 || j > horizon) throw DomainError("logarithmic barrier evaluated outside [0, t]");
      const double m = std::min(j, horizon - j);
      return offset + (m > 0.0 ? log_scale * std::log(m) : 0.0);
    }
    case BarrierKind::kInterpolation: {
      const double r = j / horizon;
      return r + start * (1.0 - r);
    }
    case BarrierKind::kLinear:
      return slope * j + offset;
  }
  return std::numeric_limits<double>::infinity();
}

std::string BarrierSpec::describe() const {
  std::ostringstream s;
  switch (kind) {
    case BarrierKind::kNone:
      s << "none";
      break;
    case BarrierKind::kLogarithmic:
      s << "logarithmic(t=" << horizon << ", y=" << offset << ", scale=" << log_scale << ")";
      break;
    case BarrierKind::kInterpolation:
      s << "interpolation(t=" << horizon << ", b0=" << start << ")";
      break;
    case BarrierKind::kLinear:
      s << "linear(a=" << slope << ", y=" << offset << ")";
      break;
  }
  return s.str();
}

}  // namespace zetalab
