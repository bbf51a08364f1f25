#pragma once

// Independent reference computations used only by the tests. They are
// deliberately naive: trial division, long-double direct sums, brute-force
// quadrature and plain Monte Carlo.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "zetalab/rng.hpp"

namespace oracle {

inline bool is_prime_trial(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

inline std::vector<std::uint64_t> primes_by_trial_division(std::uint64_t limit) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = 2; n <= limit; ++n) {
    if (is_prime_trial(n)) out.push_back(n);
  }
  return out;
}

/// (1/2) sum_i w_i cos(delta x_i) in long double.
inline double half_cosine_sum(const std::vector<double>& x, const std::vector<double>& w, double delta) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += static_cast<long double>(w[i]) * std::cos(static_cast<long double>(delta) * x[i]);
  }
  return static_cast<double>(0.5L * s);
}

/// Re sum_i c_i exp(i h x_i) in long double.
inline double trig_sum(const std::vector<double>& x, const std::vector<double>& re, const std::vector<double>& im,
                       double h) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double ph = static_cast<long double>(h) * x[i];
    s += re[i] * std::cos(ph) - im[i] * std::sin(ph);
  }
  return static_cast<double>(s);
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// P(a1 < X <= b1, a2 < Y <= b2) for a centred bivariate normal with
/// variances v1, v2 and covariance c, by tensor Simpson quadrature over the
/// conditional law: integrate the density of X against P(Y in (a2,b2] | X).
inline double bivariate_rectangle(double a1, double b1, double a2, double b2, double v1, double v2, double c,
                                  int panels = 4000) {
  const double s1 = std::sqrt(v1);
  const double lo = std::max(a1, -12.0 * s1);
  const double hi = std::min(b1, 12.0 * s1);
  if (!(hi > lo)) return 0.0;
  const double cond_var = v2 - c * c / v1;
  const double cond_sd = std::sqrt(std::max(cond_var, 0.0));
  auto integrand = [&](double x) {
    const double dens = std::exp(-0.5 * x * x / v1) / (s1 * std::sqrt(2.0 * M_PI));
    const double m = c / v1 * x;
    double p = 0.0;
    if (cond_sd == 0.0) {
      p = (m > a2 && m <= b2) ? 1.0 : 0.0;
    } else {
      const double ua = std::isinf(a2) ? 0.0 : std_normal_cdf((a2 - m) / cond_sd);
      const double ub = std::isinf(b2) ? 1.0 : std_normal_cdf((b2 - m) / cond_sd);
      p = ub - ua;
    }
    return dens * p;
  };
  const int n = panels * 2;
  const double h = (hi - lo) / n;
  long double s = integrand(lo) + integrand(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0L : 2.0L) * integrand(lo + i * h);
  return static_cast<double>(s * h / 3.0L);
}

struct McResult {
  double estimate = 0.0;
  double standard_error = 0.0;
};

/// Plain Monte Carlo for P(S_l <= barrier(l) for l = 1..j, S_j in (lo, hi]) of a
/// walk with N(0, step_variance) increments.
inline McResult walk_probability(const std::function<double(int)>& barrier, int j, double lo, double hi,
                                 double step_variance, std::uint64_t replicates, std::uint64_t seed) {
  zetalab::RngStream rng(seed, 0, 77u);
  const double sd = std::sqrt(step_variance);
  std::vector<double> b(static_cast<std::size_t>(j) + 1);
  for (int l = 1; l <= j; ++l) b[static_cast<std::size_t>(l)] = barrier(l);
  std::uint64_t hits = 0;
  for (std::uint64_t r = 0; r < replicates; ++r) {
    double s = 0.0;
    bool ok = true;
    for (int l = 1; l <= j; ++l) {
      s += sd * rng.normal();
      if (s > b[static_cast<std::size_t>(l)]) {
        ok = false;
        break;
      }
    }
    if (ok && s > lo && s <= hi) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(replicates);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(replicates))};
}

}  // namespace oracle
