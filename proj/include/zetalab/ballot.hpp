#pragma once

#include <string>
#include <vector>

#include "zetalab/barrier.hpp"

namespace zetalab {

/// Bin (lo, hi] of the endpoint S_j. With weight_rate > 0 the bin integrand is
/// multiplied by exp(-weight_rate (S_j - lo)).
struct EndpointBin {
  double lo = 0.0;
  double hi = 0.0;
  double weight_rate = 0.0;
};

struct BallotOptions {
  double step_variance = 0.5;
  /// Per-step increment means; empty means zero drift. Entry l-1 is step l.
  std::vector<double> step_means;
  /// Per-step variances overriding step_variance when non-empty.
  std::vector<double> step_variances;
  double grid_step = 0.05;
  double sd_cutoff = 12.0;
  int max_refinements = 3;
  double relative_tolerance = 0.01;
};

struct BinProbability {
  EndpointBin bin;
  double probability = 0.0;  // Richardson-extrapolated
  double error = 0.0;        // |p(h/2) - p(h)| / 3
};

struct BallotResult {
  int steps = 0;
  double grid_step = 0.0;  // finest h used
  int refinements = 0;
  std::vector<BinProbability> bins;
};

/// P(S_l <= barrier(l) for l = 1..j, S_j in bin) for a Gaussian walk started
/// at 0, by a trapezoidal transfer operator on a grid anchored at the barrier.
/// Throws NonConvergenceError if the Richardson error stays above the
/// tolerance after max_refinements halvings.
BallotResult ballot_exact(const BarrierSpec& barrier, int j, const std::vector<EndpointBin>& bins,
                          const BallotOptions& options = {});

/// Mass of the constrained density after each step 1..j at grid step h
/// (no extrapolation). With no barrier every entry is 1 up to quadrature error.
std::vector<double> transfer_masses(const BarrierSpec& barrier, int j, const BallotOptions& options = {});

enum class BallotBoundKind { kLinearUpper, kLinearLower, kLogUpper };

std::string to_string(BallotBoundKind kind);

/// Structural factor of the ballot bounds, no constant applied:
///   linear: (b(0)+1)(b(j)-x+1) j^{-3/2} exp(-(x-1)^2/j), b(l) = a l + y;
///   log:    (y+1)(y+psi_j-x+1) j^{-3/2} exp(-(x-1)^2/j), psi_j = 2 log min(j, n-j).
/// Throws DomainError naming the violated precondition.
double ballot_bound(BallotBoundKind kind, double a, double y, double x, int j, int n = 0);

}  // namespace zetalab
