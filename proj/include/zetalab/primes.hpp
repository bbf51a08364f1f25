#pragma once

#include <cstdint>
#include <vector>

namespace zetalab {

struct PrimeTable {
  std::uint64_t limit = 0;
  std::vector<std::uint64_t> primes;
  std::vector<double> logs;
  std::vector<std::int32_t> slice_of;
};

struct SieveOptions {
  /// Upper bound on the bytes the finished table may occupy.
  std::uint64_t memory_budget_bytes = 4ULL << 30;
  std::uint64_t segment_bytes = 1ULL << 18;
};

/// Slice index max(1, ceil(log log p)).
std::int32_t slice_index(double log_p);

/// Segmented odd-only sieve of Eratosthenes over [2, limit].
PrimeTable sieve_primes(std::uint64_t limit, const SieveOptions& options = {});

}  // namespace zetalab
