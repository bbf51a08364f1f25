#include "zetalab/numeric.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <numbers>

#include "zetalab/error.hpp"

namespace zetalab {

double compensated_sum(std::span<const double> values) {
  NeumaierSum s;
  for (double v : values) s.add(v);
  return s.value();
}

void RunningStats::add(double v) {
  ++n_;
  const double d = v - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (v - mean_);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double d = other.mean_ - mean_;
  const double n = na + nb;
  mean_ += d * nb / n;
  m2_ += other.m2_ + d * d * na * nb / n;
  n_ += other.n_;
}

double RunningStats::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::stderr_mean() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double lo = 0.02425;
  double x = 0.0;
  if (p < lo) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - lo) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double bivariate_normal_cdf(double a, double b, double rho) {
  // Integrate the density of the correlation parameter (Plackett's identity):
  // d/dr Phi2(a,b;r) = phi2(a,b;r), from r = 0 where the cdf factorizes.
  if (rho >= 1.0) return normal_cdf(std::min(a, b));
  if (rho <= -1.0) return std::max(0.0, normal_cdf(a) - normal_cdf(-b));
  const double base = normal_cdf(a) * normal_cdf(b);
  if (rho == 0.0) return base;
  // Gauss-Legendre on r = rho * s, s in [0, 1].
  static constexpr double nodes[] = {-0.9739065285171717, -0.8650633666889845, -0.6794095682990244,
                                     -0.4333953941292472, -0.1488743389816312, 0.1488743389816312,
                                     0.4333953941292472,  0.6794095682990244,  0.8650633666889845,
                                     0.9739065285171717};
  static constexpr double weights[] = {0.0666713443086881, 0.1494513491505806, 0.2190863625159820,
                                       0.2692667193099963, 0.2955242247147529, 0.2955242247147529,
                                       0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
                                       0.0666713443086881};
  auto density = [&](double r) {
    const double om = 1.0 - r * r;
    return std::exp(-(a * a - 2.0 * r * a * b + b * b) / (2.0 * om)) /
           (2.0 * std::numbers::pi * std::sqrt(om));
  };
  // Panels cluster toward s = 1 where the density sharpens as |rho| -> 1.
  NeumaierSum integral;
  const int panels = 64;
  double s0 = 0.0;
  for (int k = 1; k <= panels; ++k) {
    const double frac = static_cast<double>(k) / panels;
    const double s1 = 1.0 - std::pow(1.0 - frac, 3.0);
    const double mid = 0.5 * (s0 + s1);
    const double half = 0.5 * (s1 - s0);
    for (int i = 0; i < 10; ++i) {
      integral.add(weights[i] * half * rho * density(rho * (mid + half * nodes[i])));
    }
    s0 = s1;
  }
  return std::clamp(base + integral.value(), 0.0, 1.0);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  NeumaierSum s;
  for (double v : values) s.add(std::exp(v - m));
  return m + std::log(s.value());
}

ProportionInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw DomainError("wilson_interval: no trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  ProportionInterval out;
  out.estimate = p;
  if (successes == 0) {
    out.one_sided = true;
    out.lower = 0.0;
    out.upper = z2 / (n + z2);
    return out;
  }
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  out.lower = std::max(0.0, centre - half);
  out.upper = std::min(1.0, centre + half);
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile: empty sample");
  if (q < 0.0 || q > 1.0) throw DomainError("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

LinearFit fit_least_squares(const std::vector<std::vector<double>>& rows, std::span<const double> y) {
  if (rows.empty() || rows.size() != y.size()) throw DomainError("fit_least_squares: shape mismatch");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(rows.front().size());
  if (p == 0 || n < p) throw DomainError("fit_least_squares: too few observations");
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != p) throw DomainError("fit_least_squares: ragged rows");
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rows[i][j];
    v(i) = y[i];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) throw DomainError("fit_least_squares: design matrix is rank deficient");
  const Eigen::VectorXd beta = qr.solve(v);
  const Eigen::VectorXd resid = v - x * beta;

  LinearFit fit;
  fit.coefficients.assign(beta.data(), beta.data() + p);
  fit.residual_sum_squares = resid.squaredNorm();
  const double mean = v.mean();
  const double tss = (v.array() - mean).square().sum();
  fit.r_squared = tss > 0.0 ? 1.0 - fit.residual_sum_squares / tss : 1.0;
  fit.standard_errors.assign(static_cast<std::size_t>(p), std::numeric_limits<double>::quiet_NaN());
  if (n > p) {
    const double s2 = fit.residual_sum_squares / static_cast<double>(n - p);
    const Eigen::MatrixXd cov = (x.transpose() * x).inverse() * s2;
    for (Eigen::Index j = 0; j < p; ++j) fit.standard_errors[static_cast<std::size_t>(j)] = std::sqrt(cov(j, j));
  }
  return fit;
}

}  // namespace zetalab
