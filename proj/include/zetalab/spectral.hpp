#pragma once

// Fast evaluation of trigonometric sums on uniform grids, and circulant
// embedding for stationary covariance sequences.

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "zetalab/rng.hpp"

namespace zetalab {

/// Smallest n >= minimum whose only prime factors are 2, 3, 5 and 7.
std::size_t fft_friendly_size(std::size_t minimum);

/// Evaluates out[n] = Re sum_i c_i exp(i h_n x_i) on h_n = origin + n*spacing,
/// n = 0..count-1, for a fixed set of frequencies x_i. Uses Gaussian gridding
/// onto an oversampled periodic grid followed by one FFT.
///
/// Not thread-safe; use one instance per thread.
class TrigSumSynthesizer {
 public:
  TrigSumSynthesizer(std::span<const double> frequencies, double origin, double spacing, std::size_t count,
                     int spread_half_width = 16);
  ~TrigSumSynthesizer();
  TrigSumSynthesizer(const TrigSumSynthesizer&) = delete;
  TrigSumSynthesizer& operator=(const TrigSumSynthesizer&) = delete;

  std::size_t count() const { return count_; }
  std::size_t atoms() const { return theta_.size(); }
  std::size_t fine_size() const { return fine_; }

  /// c_i = re[i] + i*im[i]; writes count() values.
  void evaluate(std::span<const double> re, std::span<const double> im, std::span<double> out);

 private:
  struct Plan;
  std::size_t count_;
  std::size_t fine_;
  int spread_;
  double tau_;
  std::ptrdiff_t centre_mode_;
  std::vector<double> theta_;            // spacing*x mod 2pi
  std::vector<std::ptrdiff_t> anchor_;   // fine-grid index at or below theta
  std::vector<double> e1_;               // exp(-d^2/(4 tau)), d = xi_anchor - theta
  std::vector<double> e2_;               // exp(-d h/(2 tau))
  std::vector<double> phase_re_;         // exp(i x (origin + centre*spacing))
  std::vector<double> phase_im_;
  std::vector<double> e3_;               // exp(-j^2 h^2/(4 tau)), j = 0..spread
  std::vector<double> deconv_;           // per output index
  std::unique_ptr<Plan> plan_;
};

/// Exact sampler for a stationary Gaussian vector with covariance
/// C(|i-j|) by circulant embedding of the covariance sequence.
class CirculantEmbedding {
 public:
  /// cov(k) must return the covariance at lag k for every k < embedding size/2 + 1.
  /// The embedding length starts at 2(n-1) and doubles up to max_doublings
  /// times; throws NonEmbeddableError if the spectrum stays negative beyond
  /// tolerance * max eigenvalue.
  CirculantEmbedding(std::size_t n, const std::function<double(std::size_t)>& cov, int max_doublings = 4,
                     double tolerance = 1e-8);

  std::size_t size() const { return n_; }
  std::size_t embedding_size() const { return m_; }
  double min_eigenvalue_ratio() const { return min_ratio_; }
  /// Covariance sequence recovered from the embedded spectrum (lags 0..n-1).
  std::vector<double> reconstructed_covariance() const;
  /// One draw of length size().
  std::vector<double> sample(RngStream& rng) const;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  double min_ratio_ = 0.0;
  std::vector<double> eigenvalues_;
};

}  // namespace zetalab
