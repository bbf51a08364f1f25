#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "zetalab/frequency.hpp"
#include "zetalab/rng.hpp"

namespace zetalab {

enum class CoefficientLaw { kComplexGaussian, kUniformPhase };

std::string to_string(CoefficientLaw law);
CoefficientLaw parse_coefficient_law(const std::string& name);

/// Realized coefficients of one field. re/im already include any tilt shift.
struct WeightDraw {
  CoefficientLaw law = CoefficientLaw::kComplexGaussian;
  std::vector<double> re;
  std::vector<double> im;
  std::vector<double> shift_re;  // empty when untilted
  std::vector<double> shift_im;
  SeedLineage lineage;

  bool tilted() const { return !shift_re.empty(); }
};

/// Complex-gaussian: re, im ~ N(0, 1/2). Uniform-phase: (cos U, sin U).
WeightDraw sample_weights(const FrequencySet& fs, CoefficientLaw law, RngStream& rng);

inline constexpr std::size_t kDefaultMaxGridPoints = 100'000'000;

struct Grid {
  double origin = 0.0;
  double spacing = 1.0;
  std::size_t count = 1;

  /// Points -K*spacing, ..., K*spacing with K = ceil(half_width / spacing).
  static Grid symmetric(double half_width, double spacing, std::size_t max_points = kDefaultMaxGridPoints);
  static Grid uniform(double origin, double spacing, std::size_t count);

  double point(std::size_t n) const { return origin + static_cast<double>(n) * spacing; }
  double half_width() const { return 0.5 * static_cast<double>(count - 1) * spacing; }
};

/// Point count of the symmetric grid, 2*ceil(half_width/spacing) + 1.
double symmetric_grid_count(double half_width, double spacing);

struct FieldSample {
  Grid grid;
  std::vector<double> values;
  int slice_count = 0;
  std::vector<double> slices;    // slice-major: slices[(k-1)*count + n] = Y_k(h_n)
  std::vector<double> partials;  // same layout, S_j

  bool has_slices() const { return slice_count > 0; }
  double slice_value(int k, std::size_t n) const {
    return slices[static_cast<std::size_t>(k - 1) * grid.count + n];
  }
  double partial(int j, std::size_t n) const {
    return partials[static_cast<std::size_t>(j - 1) * grid.count + n];
  }
};

struct FieldOptions {
  int threads = 1;
  std::size_t max_points = kDefaultMaxGridPoints;
};

/// Direct compensated evaluation, O(atoms * points).
FieldSample evaluate_field(const WeightDraw& draw, const FrequencySet& fs, const Grid& grid, bool with_slices,
                           const FieldOptions& options = {});

/// X(h) at one point by direct summation.
double evaluate_point(const WeightDraw& draw, const FrequencySet& fs, double h);
/// S_1(h), ..., S_t(h) at one point.
std::vector<double> partial_sums_at(const WeightDraw& draw, const FrequencySet& fs, double h);

/// Fast evaluation on a fixed grid through the gridding transform. Holds the
/// transform plans, so construct once and reuse across draws. Not thread-safe.
class FastFieldEvaluator {
 public:
  FastFieldEvaluator(const FrequencySet& fs, const Grid& grid, bool with_slices,
                     std::size_t max_points = kDefaultMaxGridPoints);
  ~FastFieldEvaluator();
  FastFieldEvaluator(const FastFieldEvaluator&) = delete;
  FastFieldEvaluator& operator=(const FastFieldEvaluator&) = delete;

  const Grid& grid() const { return grid_; }
  FieldSample evaluate(const WeightDraw& draw);
  /// Values only, reusing the caller's buffer.
  void evaluate_values(const WeightDraw& draw, std::vector<double>& values);

 private:
  struct Impl;
  Grid grid_;
  std::unique_ptr<Impl> impl_;
};

/// Samples the field on a uniform grid in O(N log N + atoms). The spectrum is a
/// finite set of atoms, so drawing the coefficients and synthesizing exactly
/// realizes the stationary Gaussian law with covariance C(i-j) =
/// covariance(fs, (i-j)*spacing).
FieldSample sample_stationary(const FrequencySet& fs, const Grid& grid, CoefficientLaw law, RngStream& rng,
                              bool with_slices = false, std::size_t max_points = kDefaultMaxGridPoints);

/// Covariance sequence C(n*spacing), n = 0..count-1, by the fast transform.
std::vector<double> stationary_covariance_sequence(const FrequencySet& fs, double spacing, std::size_t count);

/// Dense covariance matrix of the field on a grid (direct sums).
Eigen::MatrixXd covariance_matrix(const FrequencySet& fs, const Grid& grid);

/// Reference sampler N(0, C) through a symmetric eigendecomposition.
class DenseGaussianSampler {
 public:
  explicit DenseGaussianSampler(const Eigen::MatrixXd& cov);
  std::size_t dimension() const { return static_cast<std::size_t>(factor_.rows()); }
  /// Sum of |negative eigenvalues| that were clipped to zero.
  double clipped_mass() const { return clipped_; }
  Eigen::VectorXd sample(RngStream& rng) const;
  /// count draws as the columns of the result.
  Eigen::MatrixXd sample_columns(std::size_t count, RngStream& rng) const;

 private:
  Eigen::MatrixXd factor_;
  double clipped_ = 0.0;
};

struct TiltSpec {
  double h = 0.0;
  double h2 = 0.0;
  double lambda = 0.0;
  double lambda2 = 0.0;
};

/// Exponential tilt dP~/dP = exp(lambda X(h) + lambda2 X(h2)) / E[...].
struct Tilt {
  TiltSpec spec;
  std::vector<double> shift_re;
  std::vector<double> shift_im;
  double log_normalizer = 0.0;

  /// log(dP/dP~) evaluated on a realized field.
  double log_weight(double x_h, double x_h2) const {
    return log_normalizer - spec.lambda * x_h - spec.lambda2 * x_h2;
  }
};

/// log E[exp(lambda X(h) + lambda2 X(h2))] in closed form.
double log_laplace_transform(const FrequencySet& fs, const TiltSpec& spec);
Tilt make_tilt(const TiltSpec& spec, const FrequencySet& fs);
/// Complex-gaussian draw under the tilted measure.
WeightDraw apply_tilt(const Tilt& tilt, const FrequencySet& fs, RngStream& rng);
/// Mean of X(at) under the tilt.
double tilted_mean(const FrequencySet& fs, const TiltSpec& spec, double at);

void write_field_csv(const FieldSample& sample, std::ostream& out);
void write_field_binary(const FieldSample& sample, const std::filesystem::path& path);
FieldSample read_field_binary(const std::filesystem::path& path);

}  // namespace zetalab
