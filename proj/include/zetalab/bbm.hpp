#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "zetalab/experiment.hpp"
#include "zetalab/rng.hpp"

namespace zetalab {

/// Binary branching Brownian motion: rate-1 exponential clocks, increments
/// of variance dt/2 between events.
struct BbmParams {
  double horizon = 0.0;
  std::size_t copies = 1;
  /// copies * e^horizon must not exceed this.
  double max_expected_particles = 1e7;
  /// Hard stop on the realized particle count of one replicate.
  std::size_t max_particles = 100'000'000;
};

struct BbmRecord {
  std::uint64_t replicate = 0;
  std::size_t copies = 1;
  double max = 0.0;
  std::size_t particle_count = 0;  // over all copies
  std::size_t best_copy = 0;
  std::vector<double> trajectory;  // maximizer's ancestral positions at 0, 1, ..., floor(horizon)
  SeedLineage lineage;
};

/// ceil(e^{t theta}).
std::size_t ensemble_copies(double t, double theta);

/// One replicate. Copy c draws from stream purpose kBbmCopyBase + c and the
/// trajectory interpolation from kBridge, so copy 0 of an ensemble coincides
/// with the single-copy run of the same replicate.
BbmRecord simulate_bbm_replicate(const BbmParams& params, std::uint64_t seed, std::uint64_t replicate);

/// Single-copy runs (params.copies is ignored).
std::vector<BbmRecord> simulate_bbm(const BbmParams& params, std::size_t replicates, const ExperimentOptions& options);
/// Ensemble runs; the max is over all copies.
std::vector<BbmRecord> simulate_ensemble(const BbmParams& params, std::size_t replicates,
                                         const ExperimentOptions& options);

struct EnvelopeReport {
  double envelope_constant = 0.0;  // c in sqrt(k (k + t theta)) + c
  double line_constant = 0.0;      // c' in k + c'
  int line_max_k = 0;              // line checked for k <= line_max_k
  std::size_t replicates = 0;
  std::size_t envelope_violations = 0;
  std::size_t line_violations = 0;
  double envelope_fraction() const { return replicates ? static_cast<double>(envelope_violations) / replicates : 0.0; }
  double line_fraction() const { return replicates ? static_cast<double>(line_violations) / replicates : 0.0; }
};

/// Counts trajectories exceeding sqrt(k (k + t theta)) + c at some integer k,
/// and exceeding k + c' at some k <= line_max_k.
EnvelopeReport envelope_check(const std::vector<BbmRecord>& records, double t, double theta, double envelope_constant,
                              double line_constant, int line_max_k);

}  // namespace zetalab
