#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "zetalab/error.hpp"
#include "zetalab/primes.hpp"

using namespace zetalab;

TEST_CASE("small limits") {
  const auto t10 = sieve_primes(10);
  CHECK(t10.primes == std::vector<std::uint64_t>{2, 3, 5, 7});
  CHECK(sieve_primes(2).primes == std::vector<std::uint64_t>{2});
  CHECK(sieve_primes(3).primes == std::vector<std::uint64_t>{2, 3});
  CHECK(sieve_primes(100).primes.size() == 25);
}

TEST_CASE("sieve matches trial division across segment boundaries") {
  SieveOptions opts;
  opts.segment_bytes = 1024;  // many short segments
  for (std::uint64_t limit : {100ULL, 2047ULL, 2048ULL, 2049ULL, 30011ULL}) {
    CHECK(sieve_primes(limit, opts).primes == oracle::primes_by_trial_division(limit));
  }
  CHECK(sieve_primes(1000000).primes.size() == 78498);
}

TEST_CASE("slices and logs") {
  const auto t = sieve_primes(100000);
  for (std::size_t i = 0; i < t.primes.size(); ++i) {
    const double lp = std::log(static_cast<double>(t.primes[i]));
    REQUIRE(t.logs[i] == lp);
    const int k = t.slice_of[i];
    if (k == 1) {
      REQUIRE(lp <= std::exp(1.0));
    } else {
      REQUIRE(lp > std::exp(k - 1.0));
      REQUIRE(lp <= std::exp(static_cast<double>(k)));
    }
  }
  CHECK(slice_index(std::log(2.0)) == 1);
  CHECK(slice_index(std::log(13.0)) == 1);
  CHECK(slice_index(std::log(17.0)) == 2);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(sieve_primes(1), DomainError);
  CHECK_THROWS_AS(sieve_primes((1ULL << 40) + 1), DomainError);
  SieveOptions tight;
  tight.memory_budget_bytes = 1000;
  CHECK_THROWS_AS(sieve_primes(1000000, tight), ResourceError);
}
