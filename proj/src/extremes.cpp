#include "zetalab/extremes.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "zetalab/error.hpp"
#include "zetalab/parallel.hpp"

namespace zetalab {

namespace {

std::size_t argmax_index(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double recentering_value(const MaxExperimentParams& p) {
  RecenteringParams rp;
  rp.t = p.t;
  rp.theta = p.theta;
  rp.alpha = p.alpha;
  rp.epsilon = p.epsilon;
  rp.g = p.g;
  return recentering(p.recentering, rp);
}

// sqrt(w_i) cos(h x_i) and sqrt(w_i) sin(h x_i), so X(h) = <re, c> + <im, s>.
struct PointTable {
  std::vector<double> c;
  std::vector<double> s;

  PointTable(const FrequencySet& fs, double h) : c(fs.size()), s(fs.size()) {
    const auto& x = fs.frequencies();
    const auto& w = fs.weights();
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const double r = std::sqrt(w[i]);
      c[i] = r * std::cos(h * x[i]);
      s[i] = r * std::sin(h * x[i]);
    }
  }

  double value(const WeightDraw& d) const {
    NeumaierSum sum;
    for (std::size_t i = 0; i < c.size(); ++i) sum.add(d.re[i] * c[i] + d.im[i] * s[i]);
    return sum.value();
  }
};

double standard_bivariate_cdf(double a, double b, double rho) {
  if (a == -std::numeric_limits<double>::infinity() || b == -std::numeric_limits<double>::infinity()) return 0.0;
  if (a == std::numeric_limits<double>::infinity()) return normal_cdf(b);
  if (b == std::numeric_limits<double>::infinity()) return normal_cdf(a);
  if (rho >= 1.0 - 1e-14) return normal_cdf(std::min(a, b));
  if (rho <= -1.0 + 1e-14) return std::max(0.0, normal_cdf(a) - normal_sf(b));
  return bivariate_normal_cdf(a, b, rho);
}

double interval_probability(double sd, double lo, double hi) {
  const double a = lo / sd;
  const double b = hi / sd;
  if (a >= 0.0) return normal_sf(a) - normal_sf(b);
  return normal_cdf(b) - normal_cdf(a);
}

}  // namespace

// ---------------------------------------------------------------- maxima

Grid maxima_grid(double t, double theta, std::size_t max_points) {
  if (!(t > 0.0) || !(theta >= 0.0)) throw DomainError("maxima grid: need t > 0 and theta >= 0");
  return Grid::symmetric(std::exp(theta * t), std::exp(-t), max_points);
}

std::vector<RunRecord> run_max_experiment(const FrequencySet& fs, const MaxExperimentParams& params,
                                          const ExperimentOptions& options) {
  if (params.replicates == 0) throw DomainError("maxima: replicates must be positive");
  const Grid grid = maxima_grid(params.t, params.theta, options.max_points);
  const double centre = recentering_value(params);

  std::vector<RunRecord> records(params.replicates);
  parallel_for_with_state(
      params.replicates, options.threads,
      [&] { return std::make_unique<FastFieldEvaluator>(fs, grid, false, options.max_points); },
      [&](std::unique_ptr<FastFieldEvaluator>& eval, std::size_t r) {
        RngStream rng(options.seed, r, StreamPurpose::kCoefficients);
        const WeightDraw draw = sample_weights(fs, params.law, rng);
        std::vector<double> values;
        eval->evaluate_values(draw, values);
        const std::size_t n = argmax_index(values);
        RunRecord& rec = records[r];
        rec.replicate = r;
        rec.lineage = draw.lineage;
        rec.max = values[n];
        rec.argmax = grid.point(n);
        rec.value_at_zero = values[grid.count / 2];
        rec.recentered = rec.max - centre;
        rec.trajectory = partial_sums_at(draw, fs, rec.argmax);
      });
  return records;
}

double fit_log_coefficient(const std::vector<double>& ts, const std::vector<double>& medians, double theta) {
  if (ts.size() != medians.size() || ts.size() < 2) throw DomainError("fit_log_coefficient: need at least two t values");
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  const double lead = std::sqrt(1.0 + theta);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    rows.push_back({-std::log(ts[i]), 1.0});
    y.push_back(medians[i] - lead * ts[i]);
  }
  return fit_least_squares(rows, y).coefficients[0];
}

OrderingBootstrap bootstrap_log_coefficient_ordering(const std::vector<double>& ts,
                                                     const std::vector<std::vector<double>>& maxima_a, double theta_a,
                                                     const std::vector<std::vector<double>>& maxima_b, double theta_b,
                                                     std::size_t resamples, std::uint64_t seed) {
  if (maxima_a.size() != ts.size() || maxima_b.size() != ts.size()) {
    throw DomainError("bootstrap: one sample per t value required");
  }
  auto medians_of = [](const std::vector<std::vector<double>>& m) {
    std::vector<double> out;
    for (const auto& v : m) out.push_back(median(v));
    return out;
  };
  OrderingBootstrap out;
  out.coefficient_a = fit_log_coefficient(ts, medians_of(maxima_a), theta_a);
  out.coefficient_b = fit_log_coefficient(ts, medians_of(maxima_b), theta_b);
  out.resamples = resamples;

  RngStream rng(seed, 0, StreamPurpose::kBootstrap);
  auto resample = [&](const std::vector<std::vector<double>>& m) {
    std::vector<double> meds;
    for (const auto& v : m) {
      if (v.empty()) throw DomainError("bootstrap: empty sample");
      std::vector<double> draw(v.size());
      for (auto& d : draw) d = v[static_cast<std::size_t>(rng.next_u64() % v.size())];
      meds.push_back(median(std::move(draw)));
    }
    return meds;
  };
  for (std::size_t b = 0; b < resamples; ++b) {
    const double ca = fit_log_coefficient(ts, resample(maxima_a), theta_a);
    const double cb = fit_log_coefficient(ts, resample(maxima_b), theta_b);
    if (ca > cb) ++out.a_exceeds_b;
  }
  return out;
}

// ---------------------------------------------------------------- right tail

TailEstimate tail_probability_is(const FrequencySet& fs, const TailParams& params, const ExperimentOptions& options) {
  if (!(params.y > 0.0) && std::isnan(params.level)) throw DomainError("tail: y must be positive");
  if (!(params.mixture_spacing >= 0.0)) throw DomainError("tail: mixture spacing must be nonnegative");
  if (!(params.half_width > 0.0)) throw DomainError("tail: half width must be positive");
  if (params.replicates == 0) throw DomainError("tail: replicates must be positive");

  TailEstimate est;
  est.y = params.y;
  est.level = std::isnan(params.level) ? m_1(params.t) + params.y : params.level;
  const double sigma2 = 0.5 * fs.total_weight();
  est.lambda = std::isnan(params.lambda) ? est.level / sigma2 : params.lambda;
  if (!(est.lambda >= 0.0)) throw DomainError("tail: tilt strength must be nonnegative");
  const double spacing = params.spacing > 0.0 ? params.spacing : std::exp(-params.t);
  const Grid grid = Grid::symmetric(params.half_width, spacing, options.max_points);

  std::vector<double> contrib;
  std::vector<std::size_t> component;
  std::size_t n = 0;
  if (params.mixture_spacing > 0.0) {
    // Coarse mixture at fixed tilt points, stratified: draw r uses tilt r mod K.
    const auto k_points =
        static_cast<std::size_t>(std::floor(2.0 * params.half_width / params.mixture_spacing + 1e-9)) + 1;
    std::vector<PointTable> tables;
    std::vector<Tilt> tilts;
    for (std::size_t c = 0; c < k_points; ++c) {
      const double h = -params.half_width + static_cast<double>(c) * params.mixture_spacing;
      est.tilt_points.push_back(h);
      tables.emplace_back(fs, h);
      tilts.push_back(make_tilt(TiltSpec{h, 0.0, est.lambda, 0.0}, fs));
    }
    const double log_norm = tilts.front().log_normalizer;
    n = (params.replicates + k_points - 1) / k_points * k_points;
    contrib.assign(n, 0.0);
    component.resize(n);
    for (std::size_t r = 0; r < n; ++r) component[r] = r % k_points;
    parallel_for_with_state(
        n, options.threads, [&] { return std::make_unique<FastFieldEvaluator>(fs, grid, false, options.max_points); },
        [&](std::unique_ptr<FastFieldEvaluator>& eval, std::size_t r) {
          RngStream rng(options.seed, r, StreamPurpose::kCoefficients);
          const WeightDraw draw = apply_tilt(tilts[r % k_points], fs, rng);
          std::vector<double> values;
          eval->evaluate_values(draw, values);
          if (!(*std::max_element(values.begin(), values.end()) > est.level)) return;
          std::vector<double> terms(k_points);
          for (std::size_t c = 0; c < k_points; ++c) terms[c] = est.lambda * tables[c].value(draw) - log_norm;
          const double log_mix = log_sum_exp(terms) - std::log(static_cast<double>(k_points));
          contrib[r] = std::exp(-log_mix);
        });
  } else {
    // Mixture over every grid point, component drawn uniformly per draw. The
    // likelihood ratio is count / sum_n exp(lambda X(h_n) - L), which only
    // needs the field values already computed on the grid.
    const std::size_t bins = std::min<std::size_t>(kContributionBins, grid.count);
    for (std::size_t b = 0; b < bins; ++b) {
      est.tilt_points.push_back(grid.point(0) + (static_cast<double>(b) + 0.5) * (grid.point(grid.count - 1) - grid.point(0)) /
                                                    static_cast<double>(bins));
    }
    const double log_norm = make_tilt(TiltSpec{0.0, 0.0, est.lambda, 0.0}, fs).log_normalizer;
    n = params.replicates;
    contrib.assign(n, 0.0);
    component.resize(n);
    parallel_for_with_state(
        n, options.threads, [&] { return std::make_unique<FastFieldEvaluator>(fs, grid, false, options.max_points); },
        [&](std::unique_ptr<FastFieldEvaluator>& eval, std::size_t r) {
          RngStream pick(options.seed, r, StreamPurpose::kMixture);
          const std::size_t c = static_cast<std::size_t>(pick.next_u64() % grid.count);
          component[r] = c * bins / grid.count;
          RngStream rng(options.seed, r, StreamPurpose::kCoefficients);
          const WeightDraw draw = apply_tilt(make_tilt(TiltSpec{grid.point(c), 0.0, est.lambda, 0.0}, fs), fs, rng);
          std::vector<double> values;
          eval->evaluate_values(draw, values);
          if (!(*std::max_element(values.begin(), values.end()) > est.level)) return;
          for (double& v : values) v = est.lambda * v - log_norm;
          const double log_mix = log_sum_exp(values) - std::log(static_cast<double>(grid.count));
          contrib[r] = std::exp(-log_mix);
        });
  }
  est.draws = n;

  NeumaierSum sum;
  NeumaierSum sum_sq;
  est.contributions.assign(est.tilt_points.size(), 0.0);
  std::vector<NeumaierSum> per_point(est.tilt_points.size());
  for (std::size_t r = 0; r < n; ++r) {
    if (contrib[r] > 0.0) ++est.hits;
    sum.add(contrib[r]);
    sum_sq.add(contrib[r] * contrib[r]);
    per_point[component[r]].add(contrib[r]);
  }
  const double nd = static_cast<double>(n);
  est.probability = sum.value() / nd;
  for (std::size_t c = 0; c < per_point.size(); ++c) est.contributions[c] = per_point[c].value() / nd;
  const double var = n > 1 ? std::max(0.0, (sum_sq.value() - nd * est.probability * est.probability) / (nd - 1.0)) : 0.0;
  est.standard_error = std::sqrt(var / nd);
  est.effective_sample_size = sum_sq.value() > 0.0 ? sum.value() * sum.value() / sum_sq.value() : 0.0;
  est.degraded = est.effective_sample_size < 0.01 * nd;
  if (est.probability > 0.0) {
    est.log_standard_error = est.standard_error / est.probability;
    est.ci_lower = est.probability * std::exp(-1.96 * est.log_standard_error);
    est.ci_upper = est.probability * std::exp(1.96 * est.log_standard_error);
  } else {
    est.log_standard_error = std::numeric_limits<double>::infinity();
    est.ci_lower = 0.0;
    est.ci_upper = wilson_interval(0, n).upper;
  }
  return est;
}

TailSlopeFit fit_tail_slope(const std::vector<double>& ys, const std::vector<double>& probabilities, double t) {
  if (ys.size() != probabilities.size() || ys.size() < 3) throw DomainError("tail slope: need at least three levels");
  std::vector<std::vector<double>> lin;
  std::vector<std::vector<double>> quad;
  std::vector<double> logs;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (!(probabilities[i] > 0.0)) throw DomainError("tail slope: probabilities must be positive");
    lin.push_back({1.0, ys[i]});
    quad.push_back({1.0, ys[i], -ys[i] * ys[i] / t});
    logs.push_back(std::log(probabilities[i]));
  }
  TailSlopeFit fit;
  const LinearFit a = fit_least_squares(lin, logs);
  fit.intercept = a.coefficients[0];
  fit.slope = a.coefficients[1];
  fit.slope_se = a.standard_errors[1];
  fit.rss = a.residual_sum_squares;
  if (ys.size() >= 4) {
    const LinearFit b = fit_least_squares(quad, logs);
    fit.quadratic_slope = b.coefficients[1];
    fit.quadratic_curvature = b.coefficients[2];
    fit.quadratic_rss = b.residual_sum_squares;
    fit.quadratic_available = true;
  }
  return fit;
}

// ---------------------------------------------------------------- barrier events

BarrierEventEstimate barrier_event_prob(const FrequencySet* fs, const BarrierEventParams& params,
                                        const ExperimentOptions& options) {
  if (params.j < 1) throw DomainError("barrier event: j must be at least 1");
  if (params.replicates == 0) throw DomainError("barrier event: replicates must be positive");
  if (params.barrier.bounded() && params.x > params.barrier(params.j)) {
    throw DomainError("barrier event: bin top x must not exceed barrier(j)");
  }
  const auto j = static_cast<std::size_t>(params.j);
  std::vector<double> ceiling(j + 1, std::numeric_limits<double>::infinity());
  if (params.barrier.bounded()) {
    for (std::size_t l = 1; l <= j; ++l) ceiling[l] = params.barrier(static_cast<double>(l));
  }

  FrequencySet walk_fs;
  std::vector<double> root_w;
  if (params.source == WalkSource::kField) {
    if (fs == nullptr) throw DomainError("barrier event: field source needs a frequency set");
    if (params.j > fs->t_max()) throw DomainError("barrier event: j exceeds the number of slices");
    walk_fs = fs->restrict(0, params.j);
    for (double w : walk_fs.weights()) root_w.push_back(std::sqrt(w));
  } else if (!(params.step_variance > 0.0)) {
    throw DomainError("barrier event: step variance must be positive");
  }

  std::vector<unsigned char> hit(params.replicates, 0);
  const double sd = std::sqrt(params.step_variance);
  parallel_for(params.replicates, options.threads, [&](std::size_t r) {
    std::vector<double> steps(j);
    if (params.source == WalkSource::kIid) {
      RngStream rng(options.seed, r, StreamPurpose::kWalk);
      for (auto& s : steps) s = sd * rng.normal();
    } else {
      RngStream rng(options.seed, r, StreamPurpose::kCoefficients);
      const WeightDraw draw = sample_weights(walk_fs, CoefficientLaw::kComplexGaussian, rng);
      for (std::size_t l = 1; l <= j; ++l) {
        const auto [b, e] = walk_fs.slice_range(static_cast<int>(l));
        NeumaierSum s;
        for (std::size_t i = b; i < e; ++i) s.add(root_w[i] * draw.re[i]);
        steps[l - 1] = s.value();
      }
    }
    double s = 0.0;
    for (std::size_t l = 1; l <= j; ++l) {
      s += steps[l - 1];
      if (s > ceiling[l]) return;
    }
    if (s > params.x - 1.0 && s <= params.x) hit[r] = 1;
  });

  BarrierEventEstimate est;
  est.trials = params.replicates;
  for (unsigned char h : hit) est.hits += h;
  est.probability = static_cast<double>(est.hits) / static_cast<double>(est.trials);
  est.standard_error = std::sqrt(est.probability * (1.0 - est.probability) / static_cast<double>(est.trials));
  est.interval = wilson_interval(est.hits, est.trials);
  return est;
}

// ---------------------------------------------------------------- discretization

std::vector<DiscretizationRow> discretization_check(const FrequencySet& fs, const DiscretizationParams& params,
                                                    const ExperimentOptions& options) {
  if (params.replicates == 0) throw DomainError("discretization: replicates must be positive");
  if (params.subdivisions < 1) throw DomainError("discretization: subdivisions must be positive");
  for (int j : params.j_values) {
    if (j < 1 || j > fs.t_max()) throw DomainError("discretization: need 1 <= j <= t, got j=" + std::to_string(j));
    for (double y : params.y_values) {
      if (!(y > 1.0 && y <= 2.0 * j)) {
        throw DomainError("discretization: need 1 < y <= 2j, got y=" + std::to_string(y) + " at j=" + std::to_string(j));
      }
    }
  }

  std::vector<DiscretizationRow> rows;
  for (int j : params.j_values) {
    const FrequencySet sub = fs.restrict(0, j);
    const double scale = std::exp(-static_cast<double>(j));
    const Grid grid = Grid::symmetric(scale, scale / params.subdivisions, options.max_points);
    std::vector<double> maxima(params.replicates);
    std::vector<double> centre(params.replicates);
    parallel_for_with_state(
        params.replicates, options.threads,
        [&] { return std::make_unique<FastFieldEvaluator>(sub, grid, false, options.max_points); },
        [&](std::unique_ptr<FastFieldEvaluator>& eval, std::size_t r) {
          RngStream rng(options.seed, r, StreamPurpose::kCoefficients);
          const WeightDraw draw = sample_weights(sub, CoefficientLaw::kComplexGaussian, rng);
          std::vector<double> values;
          eval->evaluate_values(draw, values);
          maxima[r] = *std::max_element(values.begin(), values.end());
          centre[r] = values[grid.count / 2];
        });
    for (double y : params.y_values) {
      DiscretizationRow row;
      row.j = j;
      row.y = y;
      row.subdivisions = params.subdivisions;
      row.trials = params.replicates;
      for (std::size_t r = 0; r < params.replicates; ++r) {
        if (maxima[r] > y) ++row.hits_max;
        if (centre[r] > y) ++row.hits_point;
      }
      const double nd = static_cast<double>(row.trials);
      row.p_max = static_cast<double>(row.hits_max) / nd;
      row.p_point = static_cast<double>(row.hits_point) / nd;
      row.interval_max = wilson_interval(row.hits_max, row.trials);
      row.reference = std::exp(-y * y / j) / std::sqrt(static_cast<double>(j));
      row.ratio = row.p_max / row.reference;
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------- decoupling

double gaussian_pair_probability(double variance, double covariance, double lo, double hi) {
  if (!(variance > 0.0)) throw DomainError("pair probability: variance must be positive");
  if (!(hi > lo)) return 0.0;
  const double sd = std::sqrt(variance);
  const double rho = std::clamp(covariance / variance, -1.0, 1.0);
  const double a = lo / sd;
  const double b = hi / sd;
  const double p = standard_bivariate_cdf(b, b, rho) - standard_bivariate_cdf(a, b, rho) -
                   standard_bivariate_cdf(b, a, rho) + standard_bivariate_cdf(a, a, rho);
  return std::max(0.0, p);
}

DecouplingReport decoupling_check(const FrequencySet& fs, const DecouplingParams& params,
                                  const ExperimentOptions& options) {
  if (params.k < 0 || params.k >= fs.t_max()) throw DomainError("decoupling: need 0 <= k < t");
  if (params.replicates == 0) throw DomainError("decoupling: replicates must be positive");
  if (!(params.event_hi > params.event_lo)) throw DomainError("decoupling: event interval must satisfy lo < hi");
  for (double c : params.separation_multiples) {
    if (!(c > 0.0)) throw DomainError("decoupling: separation multiples must be positive");
  }
  const FrequencySet sub = fs.restrict(params.k, fs.t_max());
  DecouplingReport report;
  report.variance = 0.5 * sub.total_weight();
  const double sd = std::sqrt(report.variance);
  const double unit = std::exp(-static_cast<double>(params.k));
  const std::size_t m = params.separation_multiples.size();

  const PointTable at_zero(sub, 0.0);
  std::vector<PointTable> tables;
  for (double c : params.separation_multiples) tables.emplace_back(sub, c * unit);

  auto in_event = [&](double v) { return v > params.event_lo && v <= params.event_hi; };
  // Per replicate: bit 0 for A(0), bit 1 + 2i for A(h_i), bit 2 + 2i for the joint.
  std::vector<std::vector<unsigned char>> flags(params.replicates);
  parallel_for(params.replicates, options.threads, [&](std::size_t r) {
    RngStream rng(options.seed, r, StreamPurpose::kCoefficients);
    const WeightDraw draw = sample_weights(sub, CoefficientLaw::kComplexGaussian, rng);
    const bool a0 = in_event(at_zero.value(draw));
    auto& f = flags[r];
    f.assign(1 + 2 * m, 0);
    f[0] = a0;
    for (std::size_t i = 0; i < m; ++i) {
      const bool a1 = in_event(tables[i].value(draw));
      f[1 + 2 * i] = a1;
      f[2 + 2 * i] = a0 && a1;
    }
  });

  const double nd = static_cast<double>(params.replicates);
  std::size_t first = 0;
  for (const auto& f : flags) first += f[0];
  const double exact_marginal = interval_probability(sd, params.event_lo, params.event_hi);
  for (std::size_t i = 0; i < m; ++i) {
    DecouplingRow row;
    row.multiple = params.separation_multiples[i];
    row.separation = row.multiple * unit;
    row.near_regime = row.separation < std::exp(-static_cast<double>(fs.t_max()));
    const double cov = covariance(sub, row.separation);
    row.correlation = cov / report.variance;
    std::size_t second = 0;
    std::size_t joint = 0;
    for (const auto& f : flags) {
      second += f[1 + 2 * i];
      joint += f[2 + 2 * i];
    }
    row.p_first = static_cast<double>(first) / nd;
    row.p_second = static_cast<double>(second) / nd;
    row.p_joint = static_cast<double>(joint) / nd;
    row.se_joint = std::sqrt(row.p_joint * (1.0 - row.p_joint) / nd);
    const double product = row.p_first * row.p_second;
    row.relative_error = product > 0.0 ? std::fabs(row.p_joint - product) / product : 0.0;
    row.exact_marginal = exact_marginal;
    row.exact_joint = gaussian_pair_probability(report.variance, cov, params.event_lo, params.event_hi);
    const double exact_product = exact_marginal * exact_marginal;
    row.exact_relative_error = exact_product > 0.0 ? std::fabs(row.exact_joint - exact_product) / exact_product : 0.0;
    row.envelope = 1.0 / std::sqrt(row.multiple);
    if (row.multiple >= 1.0) report.envelope_constant = std::max(report.envelope_constant, row.exact_relative_error / row.envelope);
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------- Z_delta

ZDeltaResult z_delta(const FrequencySet& fs, const ZDeltaParams& params, const ExperimentOptions& options) {
  if (params.t < 2 || params.t != fs.t_max()) throw DomainError("zdelta: t must equal the number of slices (>= 2)");
  if (!(params.alpha >= 0.0 && params.alpha <= 1.0)) throw DomainError("zdelta: alpha must lie in [0, 1]");
  if (params.deltas.empty()) throw DomainError("zdelta: at least one delta required");
  for (double d : params.deltas) {
    if (!(d > 0.0)) throw DomainError("zdelta: delta must be positive");
  }
  if (params.replicates == 0) throw DomainError("zdelta: replicates must be positive");

  const double t = params.t;
  ZDeltaResult res;
  res.theta = std::isnan(params.theta) ? std::pow(t, -params.alpha) : params.theta;
  if (!(res.theta >= 0.0)) throw DomainError("zdelta: theta must be nonnegative");
  RecenteringParams rp;
  rp.t = t;
  rp.theta = res.theta;
  rp.alpha = params.alpha;
  rp.epsilon = params.epsilon;
  res.mu = mu(rp);
  res.sigma2 = 0.5 * fs.total_weight();
  res.lambda = res.mu * t / res.sigma2;
  const BarrierSpec barrier = std::isnan(params.theta) ? BarrierSpec::interpolation_alpha(t, params.alpha)
                                                       : BarrierSpec::interpolation_theta(t, res.theta);
  const Grid grid = Grid::symmetric(std::exp(res.theta * t), std::exp(-t), options.max_points);
  res.grid_points = grid.count;

  const auto steps = static_cast<std::size_t>(params.t);
  std::vector<double> ceiling(steps + 1);
  for (std::size_t k = 1; k <= steps; ++k) ceiling[k] = static_cast<double>(k) * res.mu + barrier(static_cast<double>(k));
  const double level = res.mu * t;
  const double widest = *std::max_element(params.deltas.begin(), params.deltas.end());

  res.counts.assign(params.replicates, std::vector<std::size_t>(params.deltas.size(), 0));
  parallel_for_with_state(
      params.replicates, options.threads,
      [&] { return std::make_unique<FastFieldEvaluator>(fs, grid, true, options.max_points); },
      [&](std::unique_ptr<FastFieldEvaluator>& eval, std::size_t r) {
        RngStream rng(options.seed, r, StreamPurpose::kCoefficients);
        const WeightDraw draw = sample_weights(fs, CoefficientLaw::kComplexGaussian, rng);
        const FieldSample field = eval->evaluate(draw);
        auto& counts = res.counts[r];
        for (std::size_t n = 0; n < grid.count; ++n) {
          const double v = field.values[n] - level;
          if (v < 0.0 || v > widest) continue;
          bool below = true;
          for (std::size_t k = 1; k <= steps && below; ++k) below = field.partial(static_cast<int>(k), n) <= ceiling[k];
          if (!below) continue;
          for (std::size_t d = 0; d < params.deltas.size(); ++d) {
            if (v <= params.deltas[d]) ++counts[d];
          }
        }
      });

  // Tilted walk: increments of S_k - k mu have mean lambda m_k - mu and variance m_k.
  BallotOptions bo;
  for (int k = 1; k <= params.t; ++k) {
    const double m = 0.5 * fs.slice_weight(k);
    bo.step_means.push_back(res.lambda * m - res.mu);
    bo.step_variances.push_back(m);
  }
  std::vector<EndpointBin> bins;
  for (double d : params.deltas) {
    bins.push_back({0.0, d, 0.0});
    bins.push_back({0.0, d, res.lambda});
  }
  const BallotResult oracle = ballot_exact(barrier, params.t, bins, bo);
  const double gauss = -res.mu * res.mu * t * t / (2.0 * res.sigma2);
  const double nominal = 2.0 * std::exp((1.0 + res.theta) * t);

  const double nd = static_cast<double>(params.replicates);
  for (std::size_t d = 0; d < params.deltas.size(); ++d) {
    ZDeltaSummary s;
    s.delta = params.deltas[d];
    RunningStats stats;
    NeumaierSum sq;
    std::size_t positive = 0;
    for (const auto& c : res.counts) {
      const double z = static_cast<double>(c[d]);
      stats.add(z);
      sq.add(z * z);
      if (c[d] > 0) ++positive;
    }
    s.mean = stats.mean();
    s.variance = params.replicates > 1 ? stats.variance() : 0.0;
    s.standard_error = params.replicates > 1 ? stats.stderr_mean() : 0.0;
    s.second_moment = sq.value() / nd;
    s.p_positive = static_cast<double>(positive) / nd;
    s.interval_positive = wilson_interval(positive, params.replicates);
    s.paley_zygmund = s.second_moment > 0.0 ? s.mean * s.mean / s.second_moment : 0.0;
    s.tilted_probability = oracle.bins[2 * d].probability;
    s.tilted_weighted = oracle.bins[2 * d + 1].probability;
    s.identity_prediction =
        nominal * std::exp(gauss - s.delta * res.mu * t / res.sigma2) * s.tilted_probability;
    s.exact_prediction = static_cast<double>(grid.count) * std::exp(gauss) * s.tilted_weighted;
    res.summaries.push_back(s);
  }
  return res;
}

}  // namespace zetalab
