#include "zetalab/primes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "zetalab/error.hpp"

namespace zetalab {

std::int32_t slice_index(double log_p) {
  if (log_p <= std::numbers::e) return 1;
  return std::max<std::int32_t>(1, static_cast<std::int32_t>(std::ceil(std::log(log_p))));
}

namespace {

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Rough upper bound for pi(x) (Rosser-Schoenfeld style, valid for x >= 17).
std::uint64_t prime_count_bound(std::uint64_t x) {
  if (x < 17) return 7;
  const double lx = std::log(static_cast<double>(x));
  return static_cast<std::uint64_t>(1.26 * static_cast<double>(x) / lx) + 1;
}

}  // namespace

PrimeTable sieve_primes(std::uint64_t limit, const SieveOptions& options) {
  if (limit < 2) throw DomainError("sieve_primes: limit must be at least 2, got " + std::to_string(limit));
  if (limit > (1ULL << 40)) throw DomainError("sieve_primes: limit above 2^40");
  constexpr std::uint64_t kBytesPerPrime = sizeof(std::uint64_t) + sizeof(double) + sizeof(std::int32_t);
  const std::uint64_t estimate = prime_count_bound(limit) * kBytesPerPrime;
  if (estimate > options.memory_budget_bytes) {
    throw ResourceError("sieve_primes: table for limit " + std::to_string(limit) + " needs about " +
                        std::to_string(estimate) + " bytes, budget is " +
                        std::to_string(options.memory_budget_bytes));
  }

  PrimeTable table;
  table.limit = limit;
  table.primes.reserve(static_cast<std::size_t>(prime_count_bound(limit)));
  table.primes.push_back(2);

  // Base odd primes up to sqrt(limit) with a plain sieve.
  const std::uint64_t root = isqrt(limit);
  std::vector<std::uint64_t> base;
  {
    std::vector<char> composite(root + 1, 0);
    for (std::uint64_t i = 3; i <= root; i += 2) {
      if (composite[i]) continue;
      base.push_back(i);
      for (std::uint64_t j = i * i; j <= root; j += 2 * i) composite[j] = 1;
    }
  }

  // Segment k covers odd numbers lo, lo+2, ..., one byte per odd number.
  const std::uint64_t seg_len = std::max<std::uint64_t>(options.segment_bytes, 1024);
  std::vector<char> composite(seg_len);
  std::vector<std::uint64_t> next(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) next[i] = base[i] * base[i];
  for (std::uint64_t lo = 3; lo <= limit; lo += 2 * seg_len) {
    const std::uint64_t hi = std::min(limit, lo + 2 * seg_len - 1);
    const std::uint64_t count = (hi - lo) / 2 + 1;
    std::fill(composite.begin(), composite.begin() + static_cast<std::ptrdiff_t>(count), 0);
    for (std::size_t i = 0; i < base.size(); ++i) {
      const std::uint64_t p = base[i];
      std::uint64_t m = next[i];
      for (; m <= hi; m += 2 * p) composite[(m - lo) / 2] = 1;
      next[i] = m;
    }
    for (std::uint64_t k = 0; k < count; ++k) {
      if (!composite[k]) table.primes.push_back(lo + 2 * k);
    }
  }

  table.logs.resize(table.primes.size());
  table.slice_of.resize(table.primes.size());
  for (std::size_t i = 0; i < table.primes.size(); ++i) {
    table.logs[i] = std::log(static_cast<double>(table.primes[i]));
    table.slice_of[i] = slice_index(table.logs[i]);
  }
  return table;
}

}  // namespace zetalab
