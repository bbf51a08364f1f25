#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "zetalab/primes.hpp"
#include "zetalab/rng.hpp"

namespace zetalab {

enum class FrequencyMode : std::uint32_t { kPrimeExact = 0, kSurrogate = 1 };

std::string to_string(FrequencyMode mode);

/// Spectral atoms stored column-wise and grouped by slice in ascending order.
/// Immutable once built.
class FrequencySet {
 public:
  FrequencySet() = default;

  static FrequencySet from_primes(const PrimeTable& table);
  /// Validates and sorts the atoms by slice (stable within a slice).
  static FrequencySet from_atoms(FrequencyMode mode, int t_max, std::vector<double> frequencies,
                                 std::vector<double> weights, std::vector<std::int32_t> slices);

  FrequencyMode mode() const { return mode_; }
  int t_max() const { return t_max_; }
  std::size_t size() const { return frequency_.size(); }
  bool empty() const { return frequency_.empty(); }

  const std::vector<double>& frequencies() const { return frequency_; }
  const std::vector<double>& weights() const { return weight_; }
  const std::vector<std::int32_t>& slices() const { return slice_; }

  /// Half-open atom index range of slice k (empty when the slice has no atoms).
  std::pair<std::size_t, std::size_t> slice_range(int k) const;
  /// Atom index range for slices k_lo < k <= k_hi.
  std::pair<std::size_t, std::size_t> slice_span(int k_lo, int k_hi) const;
  double slice_weight(int k) const;
  double total_weight() const;

  /// Atoms of slices k_lo < k <= k_hi.
  FrequencySet restrict(int k_lo, int k_hi) const;

 private:
  FrequencyMode mode_ = FrequencyMode::kSurrogate;
  int t_max_ = 0;
  std::vector<double> frequency_;
  std::vector<double> weight_;
  std::vector<std::int32_t> slice_;
  std::vector<std::size_t> slice_start_;  // size t_max + 2, index by slice
};

/// Surrogate atoms: slice l gets atoms_per_slice frequencies exp(u), u uniform on
/// (l-1, l], each of weight 1/atoms_per_slice.
FrequencySet surrogate_frequencies(int t_max, int atoms_per_slice, RngStream& rng);

/// (1/2) sum w cos(delta x), compensated.
double covariance(const FrequencySet& fs, double delta);
/// Same sum over slices k < slice <= l.
double restricted_covariance(const FrequencySet& fs, double delta, int k, int l);

struct PairCovariance {
  double variance = 0.0;     // diagonal entries
  double covariance = 0.0;   // off-diagonal rho
  double ratio() const { return covariance / variance; }
};

struct CovarianceSummary {
  double sigma2 = 0.0;
  std::vector<double> slice_masses;  // index k-1 holds slice k
  PairCovariance pair(const FrequencySet& fs, double delta) const;
};

CovarianceSummary summarize_covariance(const FrequencySet& fs);

enum class CovarianceRegime { kNear, kFar, kMixed };
std::string to_string(CovarianceRegime regime);

struct AsymptoticCovariance {
  CovarianceRegime regime = CovarianceRegime::kMixed;
  double exact = 0.0;        // restricted covariance over slices (k, l]
  double prediction = 0.0;   // near: (l-k)/2; far: 0
  double scale = 0.0;        // near: e^{2l} delta^2; far: e^{-k}/|delta|
  /// |exact - prediction| / scale, the constant implied by this evaluation.
  double implied_constant = 0.0;
};

AsymptoticCovariance covariance_asymptotic(const FrequencySet& fs, double delta, int k, int l);

void write_binary(const FrequencySet& fs, const std::filesystem::path& path);
FrequencySet read_binary(const std::filesystem::path& path);
void write_csv(const FrequencySet& fs, std::ostream& out);

}  // namespace zetalab
