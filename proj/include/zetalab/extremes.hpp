#pragma once

#include <cstdint>
#include <optional>
#include <limits>
#include <vector>

#include "zetalab/ballot.hpp"
#include "zetalab/barrier.hpp"
#include "zetalab/experiment.hpp"
#include "zetalab/frequency.hpp"
#include "zetalab/numeric.hpp"
#include "zetalab/recentering.hpp"
#include "zetalab/rng.hpp"
#include "zetalab/sampler.hpp"

namespace zetalab {

// ---------------------------------------------------------------- maxima

struct MaxExperimentParams {
  double t = 0.0;      // grid scale: half-width e^{theta t}, spacing e^{-t}
  double theta = 0.0;
  RecenteringKind recentering = RecenteringKind::kM1;
  double alpha = 0.0;
  double epsilon = 0.05;
  std::optional<double> g;
  std::size_t replicates = 0;
  CoefficientLaw law = CoefficientLaw::kComplexGaussian;
};

struct RunRecord {
  std::uint64_t replicate = 0;
  double max = 0.0;
  double argmax = 0.0;
  double value_at_zero = 0.0;
  double recentered = 0.0;
  std::vector<double> trajectory;  // S_1..S_t at the argmax
  SeedLineage lineage;
};

/// Grid used by the maxima experiment; throws ResourceError above the cap.
Grid maxima_grid(double t, double theta, std::size_t max_points = kDefaultMaxGridPoints);

std::vector<RunRecord> run_max_experiment(const FrequencySet& fs, const MaxExperimentParams& params,
                                          const ExperimentOptions& options);

/// Least-squares c in median(t) - sqrt(1+theta) t = -c log t + d.
double fit_log_coefficient(const std::vector<double>& ts, const std::vector<double>& medians, double theta);

struct OrderingBootstrap {
  double coefficient_a = 0.0;  // point estimates
  double coefficient_b = 0.0;
  std::size_t resamples = 0;
  std::size_t a_exceeds_b = 0;
  double fraction() const { return resamples ? static_cast<double>(a_exceeds_b) / resamples : 0.0; }
};

/// Resamples each t's maxima with replacement, refits the log-t coefficient
/// for both families and counts how often family a's exceeds family b's.
/// maxima_a[i] and maxima_b[i] hold the per-replicate maxima at ts[i].
OrderingBootstrap bootstrap_log_coefficient_ordering(const std::vector<double>& ts,
                                                     const std::vector<std::vector<double>>& maxima_a, double theta_a,
                                                     const std::vector<std::vector<double>>& maxima_b, double theta_b,
                                                     std::size_t resamples, std::uint64_t seed);

// ---------------------------------------------------------------- right tail

inline constexpr std::size_t kContributionBins = 64;

struct TailParams {
  double y = 0.0;
  double t = 0.0;
  /// With a positive mixture_spacing, rounded up to a multiple of the number
  /// of tilt points.
  std::size_t replicates = 0;
  /// Spacing of the tilt points; 0 tilts at every grid point.
  double mixture_spacing = 0.0;
  double half_width = 1.0;
  double spacing = 0.0;  // 0 means e^{-t}
  /// Level crossed; NaN means m_1(t) + y.
  double level = std::numeric_limits<double>::quiet_NaN();
  /// Tilt strength; NaN means level / sigma_t^2.
  double lambda = std::numeric_limits<double>::quiet_NaN();
};

struct TailEstimate {
  double y = 0.0;
  double level = 0.0;
  double lambda = 0.0;
  double probability = 0.0;
  double standard_error = 0.0;
  double log_standard_error = 0.0;  // standard error of log(probability)
  double ci_lower = 0.0;            // from the log-scale interval
  double ci_upper = 0.0;
  double effective_sample_size = 0.0;
  std::size_t draws = 0;
  std::size_t hits = 0;
  bool degraded = false;  // ESS below 1% of draws
  /// Tilt points, or bin centres when every grid point is a tilt point.
  std::vector<double> tilt_points;
  std::vector<double> contributions;  // per entry of tilt_points, summing to probability
};

/// P(max_{|h| <= half_width} X(h) > level) by a stratified mixture of
/// single-point tilts combined with the balance heuristic.
TailEstimate tail_probability_is(const FrequencySet& fs, const TailParams& params, const ExperimentOptions& options);

struct TailSlopeFit {
  double slope = 0.0;  // log p ~ intercept + slope * y
  double slope_se = 0.0;
  double intercept = 0.0;
  double rss = 0.0;
  // log p ~ a + b y + c (-y^2 / t)
  double quadratic_slope = 0.0;
  double quadratic_curvature = 0.0;
  double quadratic_rss = 0.0;
  bool quadratic_available = false;
};

/// Least-squares fits of log probability against y, without and with the
/// -y^2/t regressor (the latter needs four or more levels).
TailSlopeFit fit_tail_slope(const std::vector<double>& ys, const std::vector<double>& probabilities, double t);

// ---------------------------------------------------------------- barrier events

enum class WalkSource { kIid, kField };

struct BarrierEventParams {
  WalkSource source = WalkSource::kIid;
  BarrierSpec barrier;
  int j = 1;
  double x = 0.0;  // bin (x-1, x]
  std::size_t replicates = 0;
  double step_variance = 0.5;
};

struct BarrierEventEstimate {
  std::size_t hits = 0;
  std::size_t trials = 0;
  double probability = 0.0;
  double standard_error = 0.0;
  ProportionInterval interval;
};

/// Monte Carlo estimate of P(S_l <= barrier(l) for l <= j, S_j in (x-1, x])
/// for the iid walk or the field partial sums at h = 0 (fs required).
BarrierEventEstimate barrier_event_prob(const FrequencySet* fs, const BarrierEventParams& params,
                                        const ExperimentOptions& options);

// ---------------------------------------------------------------- discretization

struct DiscretizationParams {
  std::vector<int> j_values;
  std::vector<double> y_values;
  std::size_t replicates = 0;
  int subdivisions = 64;
};

struct DiscretizationRow {
  int j = 0;
  double y = 0.0;
  int subdivisions = 0;
  std::size_t hits_max = 0;
  std::size_t hits_point = 0;
  std::size_t trials = 0;
  double p_max = 0.0;
  double p_point = 0.0;
  ProportionInterval interval_max;
  double reference = 0.0;  // e^{-y^2/j} / sqrt(j)
  double ratio = 0.0;      // p_max / reference
};

/// P(max_{|h| <= e^{-j}} S_j(h) > y) on a grid of spacing e^{-j}/subdivisions.
std::vector<DiscretizationRow> discretization_check(const FrequencySet& fs, const DiscretizationParams& params,
                                                    const ExperimentOptions& options);

// ---------------------------------------------------------------- decoupling

struct DecouplingParams {
  int k = 1;
  std::vector<double> separation_multiples;  // |h - h'| = c e^{-k}
  double event_lo = 1.0;                     // event X_{k,T}(h) in (lo, hi]
  double event_hi = std::numeric_limits<double>::infinity();
  std::size_t replicates = 0;
};

struct DecouplingRow {
  double multiple = 0.0;
  double separation = 0.0;
  bool near_regime = false;  // separation below e^{-t_max}
  double correlation = 0.0;
  double p_first = 0.0;
  double p_second = 0.0;
  double p_joint = 0.0;
  double se_joint = 0.0;
  double relative_error = 0.0;  // |joint - product| / product (Monte Carlo)
  double exact_marginal = 0.0;
  double exact_joint = 0.0;
  double exact_relative_error = 0.0;
  double envelope = 0.0;  // (e^k |h - h'|)^{-1/2}
};

struct DecouplingReport {
  double variance = 0.0;  // of X_{k,T}(h)
  std::vector<DecouplingRow> rows;
  /// max over rows with multiple >= 1 of exact_relative_error / envelope.
  double envelope_constant = 0.0;
};

DecouplingReport decoupling_check(const FrequencySet& fs, const DecouplingParams& params,
                                  const ExperimentOptions& options);

/// Exact P(A(h) and A(h')) for the centred Gaussian pair with the given
/// variance and covariance, A = {value in (lo, hi]}.
double gaussian_pair_probability(double variance, double covariance, double lo, double hi);

// ---------------------------------------------------------------- Z_delta

struct ZDeltaParams {
  int t = 0;
  double alpha = 0.5;
  double theta = std::numeric_limits<double>::quiet_NaN();  // NaN means t^{-alpha}
  double epsilon = 0.05;
  std::vector<double> deltas;
  std::size_t replicates = 0;
};

struct ZDeltaSummary {
  double delta = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double standard_error = 0.0;
  double second_moment = 0.0;
  double p_positive = 0.0;
  ProportionInterval interval_positive;
  double paley_zygmund = 0.0;          // mean^2 / second moment
  double tilted_probability = 0.0;     // oracle P~(J(0))
  double tilted_weighted = 0.0;        // oracle E~[e^{-lambda Xbar} 1_J]
  double identity_prediction = 0.0;    // with e^{-delta mu t / sigma^2} P~(J(0))
  double exact_prediction = 0.0;       // with the weighted oracle term
};

struct ZDeltaResult {
  double theta = 0.0;
  double mu = 0.0;
  double lambda = 0.0;
  double sigma2 = 0.0;
  std::size_t grid_points = 0;
  std::vector<std::vector<std::size_t>> counts;  // [replicate][delta]
  std::vector<ZDeltaSummary> summaries;
};

ZDeltaResult z_delta(const FrequencySet& fs, const ZDeltaParams& params, const ExperimentOptions& options);

}  // namespace zetalab
