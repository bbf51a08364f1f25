#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace zetalab {

/// Kahan-Babuska-Neumaier running sum.
class NeumaierSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  NeumaierSum& operator+=(double v) {
    add(v);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> values);

/// Welford accumulator for mean and variance.
class RunningStats {
 public:
  void add(double v);
  void merge(const RunningStats& other);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double stderr_mean() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate far into the tail.
double normal_sf(double x);
double normal_pdf(double x);
/// Inverse of the standard normal cdf (Acklam's rational approximation plus
/// one Halley step).
double normal_quantile(double p);

/// Bivariate normal P(X <= a, Y <= b) for unit variances and correlation rho.
double bivariate_normal_cdf(double a, double b, double rho);

double log_sum_exp(std::span<const double> values);

struct ProportionInterval {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool one_sided = false;
};

/// Wilson score interval; with zero successes the lower end is 0 and the upper
/// end is the one-sided bound at the same confidence.
ProportionInterval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.96);

/// Sample quantile, linear interpolation between order statistics (type 7).
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

struct LinearFit {
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  double residual_sum_squares = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y ~ X (rows are observations, no implicit intercept).
LinearFit fit_least_squares(const std::vector<std::vector<double>>& rows, std::span<const double> y);

}  // namespace zetalab
