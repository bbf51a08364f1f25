#include "zetalab/recentering.hpp"

#include <algorithm>
#include <cmath>

#include "zetalab/error.hpp"

namespace zetalab {

std::string to_string(RecenteringKind kind) {
  switch (kind) {
    case RecenteringKind::kM1:
      return "m1";
    case RecenteringKind::kMIid:
      return "m_iid";
    case RecenteringKind::kMAlpha:
      return "m_alpha";
    case RecenteringKind::kM0:
      return "m0";
    case RecenteringKind::kMuT:
      return "mu_t";
  }
  return "m1";
}

RecenteringKind parse_recentering_kind(const std::string& name) {
  for (auto k : {RecenteringKind::kM1, RecenteringKind::kMIid, RecenteringKind::kMAlpha, RecenteringKind::kM0,
                 RecenteringKind::kMuT}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown recentering '" + name + "' (expected m1, m_iid, m_alpha, m0 or mu_t)");
}

namespace {

void check_t(double t) {
  if (!(t > 1.0)) throw DomainError("recentering needs t > 1 (log t must be positive)");
}

void check(const RecenteringParams& p) {
  check_t(p.t);
  if (!(p.theta >= 0.0)) throw DomainError("recentering needs theta >= 0");
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) throw DomainError("recentering needs alpha in [0, 1]");
}

double log_coefficient(const RecenteringParams& p) {
  return (1.0 + 2.0 * p.alpha) / (4.0 * std::sqrt(1.0 + p.theta));
}

}  // namespace

double default_g(double t) {
  check_t(t);
  return std::max(0.0, std::log(std::log(t)));
}

double RecenteringParams::g_value() const { return g ? *g : default_g(t); }

double m_1(double t) {
  check_t(t);
  return t - 0.75 * std::log(t);
}

double m_iid(double t, double theta) {
  check_t(t);
  if (!(theta >= 0.0)) throw DomainError("recentering needs theta >= 0");
  const double s = std::sqrt(1.0 + theta);
  return s * t - std::log(t) / (4.0 * s);
}

double m_alpha(const RecenteringParams& p) {
  check(p);
  return std::sqrt(1.0 + p.theta) * p.t - log_coefficient(p) * std::log(p.t) + p.g_value();
}

double m_0(const RecenteringParams& p) {
  check(p);
  return m_iid(p.t, p.theta) + p.g_value();
}

double mu(const RecenteringParams& p) {
  check(p);
  const double lt = std::log(p.t) / p.t;
  return std::sqrt(1.0 + p.theta) - log_coefficient(p) * lt - p.epsilon * lt;
}

double y_threshold(const RecenteringParams& p) { return m_alpha(p) - m_1(p.t); }

double recentering(RecenteringKind kind, const RecenteringParams& p) {
  check(p);
  switch (kind) {
    case RecenteringKind::kM1:
      return m_1(p.t);
    case RecenteringKind::kMIid:
      return m_iid(p.t, p.theta);
    case RecenteringKind::kMAlpha:
      return m_alpha(p);
    case RecenteringKind::kM0:
      return m_0(p);
    case RecenteringKind::kMuT:
      return mu(p) * p.t;
  }
  return m_1(p.t);
}

namespace {

double y_along_path(double t, double alpha, double g) {
  RecenteringParams p;
  p.t = t;
  p.alpha = alpha;
  p.theta = std::pow(t, -alpha);
  p.g = g;
  return y_threshold(p);
}

}  // namespace

double y_identity_residual(double t, double alpha, double g) {
  const double y = y_along_path(t, alpha, g);
  const double theta = std::pow(t, -alpha);
  return y * y / t + 2.0 * y - (theta * t + (1.0 - alpha) * std::log(t) + 2.0 * g);
}

double y_identity_residual_constant_form(double t, double alpha, double g) {
  const double y = y_along_path(t, alpha, g);
  const double theta = std::pow(t, -alpha);
  return y * y / t + 2.0 * y - (theta * t + (1.0 - alpha) + 2.0 * g);
}

}  // namespace zetalab
