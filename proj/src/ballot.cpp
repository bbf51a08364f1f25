#include "zetalab/ballot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "zetalab/error.hpp"
#include "zetalab/numeric.hpp"

namespace zetalab {

namespace {

struct StepLaw {
  std::vector<double> mean;      // per step
  std::vector<double> variance;  // per step
  std::vector<double> cum_mean;  // of S_l
  std::vector<double> cum_var;
};

StepLaw step_law(int j, const BallotOptions& o) {
  StepLaw law;
  law.mean.resize(static_cast<std::size_t>(j));
  law.variance.resize(static_cast<std::size_t>(j));
  law.cum_mean.resize(static_cast<std::size_t>(j));
  law.cum_var.resize(static_cast<std::size_t>(j));
  if (!o.step_means.empty() && static_cast<int>(o.step_means.size()) < j) {
    throw DomainError("ballot: step_means shorter than the number of steps");
  }
  if (!o.step_variances.empty() && static_cast<int>(o.step_variances.size()) < j) {
    throw DomainError("ballot: step_variances shorter than the number of steps");
  }
  double m = 0.0;
  double v = 0.0;
  for (int l = 0; l < j; ++l) {
    const auto i = static_cast<std::size_t>(l);
    law.mean[i] = o.step_means.empty() ? 0.0 : o.step_means[i];
    law.variance[i] = o.step_variances.empty() ? o.step_variance : o.step_variances[i];
    if (!(law.variance[i] > 0.0)) throw DomainError("ballot: step variances must be positive");
    m += law.mean[i];
    v += law.variance[i];
    law.cum_mean[i] = m;
    law.cum_var[i] = v;
  }
  return law;
}

double gaussian_density(double x, double var) {
  return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// P(alpha < Z <= beta) keeping precision in either tail.
double gaussian_interval(double alpha, double beta) {
  if (!(beta > alpha)) return 0.0;
  if (alpha >= 0.0) return normal_sf(alpha) - normal_sf(beta);
  if (beta <= 0.0) return normal_cdf(beta) - normal_cdf(alpha);
  return 1.0 - normal_cdf(alpha) - normal_sf(beta);
}

// E[exp(-rate (c + sd Z - lo)) ; c + sd Z in (lo, hi]].
double bin_mass(double c, double var, double lo, double hi, double rate) {
  if (!(hi > lo)) return 0.0;
  const double sd = std::sqrt(var);
  if (rate == 0.0) return gaussian_interval((lo - c) / sd, (hi - c) / sd);
  if ((lo - c) / sd > 37.0) return 0.0;
  const double shift = rate * var;
  const double log_pref = -rate * (c - lo) + 0.5 * rate * rate * var;
  const double mass = gaussian_interval((lo - c + shift) / sd, (hi - c + shift) / sd);
  return mass > 0.0 ? std::exp(log_pref + std::log(mass)) : 0.0;
}

struct PassResult {
  std::vector<double> masses;  // after each step up to the last density computed
  std::vector<double> bins;
};

// One transfer-operator pass at grid step h. Densities are propagated through
// step `density_steps`; bins (if any) are evaluated at step j = density_steps + 1.
PassResult run_pass(const BarrierSpec& barrier, int density_steps, const std::vector<EndpointBin>& bins,
                    const StepLaw& law, double h, double cutoff) {
  PassResult out;
  std::vector<double> f;     // density on nodes top - i h
  double top = 0.0;
  bool empty = false;

  auto node_top = [&](int l) {
    const auto i = static_cast<std::size_t>(l - 1);
    const double upper = law.cum_mean[i] + cutoff * std::sqrt(law.cum_var[i]);
    return barrier.bounded() ? std::min(barrier(l), upper) : upper;
  };
  auto node_low = [&](int l) {
    const auto i = static_cast<std::size_t>(l - 1);
    return law.cum_mean[i] - cutoff * std::sqrt(law.cum_var[i]);
  };
  auto mass_of = [&](const std::vector<double>& g) {
    if (g.empty()) return 0.0;
    if (g.size() == 1) return g[0] * h;
    NeumaierSum s;
    s.add(0.5 * h * (g.front() + g.back()));
    for (std::size_t m = 1; m + 1 < g.size(); ++m) s.add(h * g[m]);
    return s.value();
  };

  for (int l = 1; l <= density_steps; ++l) {
    const double new_top = node_top(l);
    const double low = node_low(l);
    if (empty || new_top < low) {
      empty = true;
      f.clear();
      out.masses.push_back(0.0);
      continue;
    }
    const auto n = static_cast<std::size_t>(std::floor((new_top - low) / h)) + 1;
    std::vector<double> g(n, 0.0);
    const auto sl = static_cast<std::size_t>(l - 1);
    if (l == 1) {
      for (std::size_t i = 0; i < n; ++i) g[i] = gaussian_density(new_top - static_cast<double>(i) * h - law.mean[0], law.variance[0]);
    } else {
      const double var = law.variance[sl];
      const double sd = std::sqrt(var);
      // x_i - u_m - mean = dshift - (i - m) h
      const double dshift = new_top - top - law.mean[sl];
      const auto dlo = static_cast<std::ptrdiff_t>(std::ceil((dshift - cutoff * sd) / h));
      const auto dhi = static_cast<std::ptrdiff_t>(std::floor((dshift + cutoff * sd) / h));
      std::vector<double> kernel(static_cast<std::size_t>(std::max<std::ptrdiff_t>(dhi - dlo + 1, 0)));
      for (std::ptrdiff_t d = dlo; d <= dhi; ++d) {
        kernel[static_cast<std::size_t>(d - dlo)] = gaussian_density(dshift - static_cast<double>(d) * h, var);
      }
      // Trapezoid weights folded into the previous density.
      std::vector<double> wf(f);
      for (double& v : wf) v *= h;
      if (wf.size() >= 2) {
        wf.front() *= 0.5;
        wf.back() *= 0.5;
      }
      const auto nm = static_cast<std::ptrdiff_t>(wf.size());
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<std::ptrdiff_t>(i);
        const std::ptrdiff_t m_lo = std::max<std::ptrdiff_t>(0, ii - dhi);
        const std::ptrdiff_t m_hi = std::min<std::ptrdiff_t>(nm - 1, ii - dlo);
        double s = 0.0;
        for (std::ptrdiff_t m = m_lo; m <= m_hi; ++m) s += wf[static_cast<std::size_t>(m)] * kernel[static_cast<std::size_t>(ii - m - dlo)];
        g[i] = s;
      }
    }
    f = std::move(g);
    top = new_top;
    out.masses.push_back(mass_of(f));
  }

  if (bins.empty()) return out;
  const int j = density_steps + 1;
  const auto sj = static_cast<std::size_t>(j - 1);
  const double cap = barrier.bounded() ? barrier(j) : std::numeric_limits<double>::infinity();
  out.bins.resize(bins.size(), 0.0);
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const EndpointBin& bin = bins[b];
    const double hi = std::min(bin.hi, cap);
    if (j == 1) {
      out.bins[b] = bin_mass(law.mean[0], law.variance[0], bin.lo, hi, bin.weight_rate);
      continue;
    }
    if (empty) continue;
    NeumaierSum s;
    for (std::size_t m = 0; m < f.size(); ++m) {
      const double w = (f.size() >= 2 && (m == 0 || m + 1 == f.size())) ? 0.5 * h : h;
      const double u = top - static_cast<double>(m) * h;
      s.add(w * f[m] * bin_mass(u + law.mean[sj], law.variance[sj], bin.lo, hi, bin.weight_rate));
    }
    out.bins[b] = s.value();
  }
  return out;
}

}  // namespace

BallotResult ballot_exact(const BarrierSpec& barrier, int j, const std::vector<EndpointBin>& bins,
                          const BallotOptions& options) {
  if (j < 1) throw DomainError("ballot_exact: j must be at least 1");
  if (!(options.grid_step > 0.0 && options.grid_step <= 0.05)) {
    throw DomainError("ballot_exact: grid step must lie in (0, 0.05]");
  }
  if (!(options.sd_cutoff >= 12.0)) throw DomainError("ballot_exact: lower cutoff must be at least 12 sd");
  if (bins.empty()) throw DomainError("ballot_exact: no bins requested");
  for (const auto& b : bins) {
    if (!(b.hi > b.lo)) throw DomainError("ballot_exact: bin must satisfy lo < hi");
  }
  const StepLaw law = step_law(j, options);

  BallotResult result;
  result.steps = j;
  double h = options.grid_step;
  auto coarse = run_pass(barrier, j - 1, bins, law, h, options.sd_cutoff).bins;
  for (int level = 0;; ++level) {
    auto fine = run_pass(barrier, j - 1, bins, law, 0.5 * h, options.sd_cutoff).bins;
    bool converged = true;
    result.bins.clear();
    for (std::size_t b = 0; b < bins.size(); ++b) {
      BinProbability bp;
      bp.bin = bins[b];
      bp.error = std::fabs(fine[b] - coarse[b]) / 3.0;
      bp.probability = fine[b] + (fine[b] - coarse[b]) / 3.0;
      if (bp.error > options.relative_tolerance * std::fabs(bp.probability) + 1e-300) converged = false;
      result.bins.push_back(bp);
    }
    result.grid_step = 0.5 * h;
    result.refinements = level;
    if (converged) return result;
    if (level >= options.max_refinements) {
      throw NonConvergenceError("ballot_exact: Richardson error above " +
                                std::to_string(options.relative_tolerance) + " relative after " +
                                std::to_string(level) + " refinements");
    }
    h *= 0.5;
    coarse = std::move(fine);
  }
}

std::vector<double> transfer_masses(const BarrierSpec& barrier, int j, const BallotOptions& options) {
  if (j < 1) throw DomainError("transfer_masses: j must be at least 1");
  const StepLaw law = step_law(j, options);
  return run_pass(barrier, j, {}, law, options.grid_step, options.sd_cutoff).masses;
}

std::string to_string(BallotBoundKind kind) {
  switch (kind) {
    case BallotBoundKind::kLinearUpper:
      return "linear-upper";
    case BallotBoundKind::kLinearLower:
      return "linear-lower";
    case BallotBoundKind::kLogUpper:
      return "log-upper";
  }
  return "linear-upper";
}

double ballot_bound(BallotBoundKind kind, double a, double y, double x, int j, int n) {
  if (j < 1) throw DomainError("ballot_bound: j >= 1 required");
  if (!(y >= 0.0)) throw DomainError("ballot_bound: y >= 0 required");
  const double jd = static_cast<double>(j);
  const double gauss = std::pow(jd, -1.5) * std::exp(-(x - 1.0) * (x - 1.0) / jd);
  if (kind == BallotBoundKind::kLogUpper) {
    if (n < 1 || j > n) throw DomainError("ballot_bound: j <= n required");
    if (y > n / 10.0) throw DomainError("ballot_bound: y <= n/10 required");
    const int m = std::min(j, n - j);
    const double psi = m > 0 ? 2.0 * std::log(static_cast<double>(m)) : 0.0;
    if (x > y + psi) throw DomainError("ballot_bound: x <= y + psi_j required");
    return (y + 1.0) * (y + psi - x + 1.0) * gauss;
  }
  const double bj = a * jd + y;
  if (x > bj) throw DomainError("ballot_bound: x <= b(j) required");
  if (kind == BallotBoundKind::kLinearLower && x * y > jd) throw DomainError("ballot_bound: x*y <= j required");
  return (y + 1.0) * (bj - x + 1.0) * gauss;
}

}  // namespace zetalab
