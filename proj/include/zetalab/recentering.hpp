#pragma once

#include <optional>
#include <string>

namespace zetalab {

enum class RecenteringKind { kM1, kMIid, kMAlpha, kM0, kMuT };

std::string to_string(RecenteringKind kind);
RecenteringKind parse_recentering_kind(const std::string& name);

/// Default slowly growing offset g(t) = max(0, log log t).
double default_g(double t);

struct RecenteringParams {
  double t = 0.0;
  double theta = 0.0;
  double alpha = 0.0;
  double epsilon = 0.05;
  std::optional<double> g;  // default_g(t) when unset

  double g_value() const;
};

/// t - (3/4) log t
double m_1(double t);
/// sqrt(1+theta) t - log t / (4 sqrt(1+theta))
double m_iid(double t, double theta);
/// sqrt(1+theta) t - (1+2 alpha)/(4 sqrt(1+theta)) log t + g
double m_alpha(const RecenteringParams& p);
/// m_iid + g
double m_0(const RecenteringParams& p);
/// sqrt(1+theta) - (1+2 alpha)/(4 sqrt(1+theta)) log t / t - epsilon log t / t
double mu(const RecenteringParams& p);
/// y with m_alpha = m_1 + y.
double y_threshold(const RecenteringParams& p);

/// Evaluates a recentering; throws DomainError unless t > 1, theta >= 0 and
/// alpha in [0, 1].
double recentering(RecenteringKind kind, const RecenteringParams& p);

/// y^2/t + 2y - (theta t + (1 - alpha) log t + 2g) along theta = t^{-alpha}.
double y_identity_residual(double t, double alpha, double g);
/// Same with the constant (1 - alpha) in place of (1 - alpha) log t.
double y_identity_residual_constant_form(double t, double alpha, double g);

}  // namespace zetalab
