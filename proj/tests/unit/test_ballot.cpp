#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "zetalab/ballot.hpp"
#include "zetalab/error.hpp"
#include "zetalab/numeric.hpp"

using namespace zetalab;

TEST_CASE("single step equals the gaussian bin mass") {
  const double sd = std::sqrt(0.5);
  for (double x : {-1.0, 0.0, 0.5}) {
    const auto r = ballot_exact(BarrierSpec::linear(0.0, 2.0), 1, {{x - 1.0, x}});
    CHECK(r.bins[0].probability == doctest::Approx(normal_cdf(x / sd) - normal_cdf((x - 1.0) / sd)).epsilon(1e-12));
  }
}

TEST_CASE("no barrier gives the free marginal") {
  for (int j : {2, 5, 17}) {
    const double sd = std::sqrt(0.5 * j);
    const auto r = ballot_exact(BarrierSpec::none(), j, {{-1.0, 0.0}, {1.0, 2.5}});
    CHECK(r.bins[0].probability == doctest::Approx(normal_cdf(0.0) - normal_cdf(-1.0 / sd)).epsilon(1e-8));
    CHECK(r.bins[1].probability == doctest::Approx(normal_cdf(2.5 / sd) - normal_cdf(1.0 / sd)).epsilon(1e-8));
  }
}

TEST_CASE("mass is conserved without a barrier") {
  const auto masses = transfer_masses(BarrierSpec::none(), 100);
  CHECK(masses.size() == 100);
  for (double m : masses) REQUIRE(std::fabs(m - 1.0) < 1e-6);
  const auto capped = transfer_masses(BarrierSpec::linear(0.0, 1.0), 30);
  for (std::size_t l = 0; l < capped.size(); ++l) {
    REQUIRE(capped[l] <= 1.0);
    if (l > 0) REQUIRE(capped[l] <= capped[l - 1] + 1e-12);
  }
}

TEST_CASE("drifted walk matches the reflection-free closed form at two steps") {
  // Two steps, barrier only at step 1 (step 2 bin below the barrier):
  // P(S1 <= b, S2 in (lo, hi]) by bivariate normal.
  const double b = 0.3;
  BallotOptions o;
  o.step_means = {0.2, -0.1};
  o.step_variances = {0.5, 0.8};
  const auto r = ballot_exact(BarrierSpec::linear(0.0, b), 2, {{-2.0, 0.0}}, o);
  const double v1 = 0.5, v2 = 1.3, c = 0.5;
  const double ref = oracle::bivariate_rectangle(-INFINITY, b - 0.2, -2.0 - 0.1, 0.0 - 0.1, v1, v2, c);
  CHECK(r.bins[0].probability == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("exponential weighting in the final bin") {
  const double lambda = 1.7;
  const auto r = ballot_exact(BarrierSpec::none(), 3, {{0.0, 1.0, lambda}});
  // Direct quadrature against the N(0, 1.5) density.
  const double var = 1.5;
  long double s = 0.0L;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) / n;
    s += std::exp(-lambda * x) * std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * M_PI * var) / n;
  }
  CHECK(r.bins[0].probability == doctest::Approx(static_cast<double>(s)).epsilon(1e-7));
}

TEST_CASE("oracle agrees with monte carlo on a linear barrier") {
  const auto r = ballot_exact(BarrierSpec::linear(0.1, 2.0), 20, {{-1.0, 0.0}});
  const auto mc = oracle::walk_probability([](int l) { return 0.1 * l + 2.0; }, 20, -1.0, 0.0, 0.5, 400000, 3);
  CHECK(std::fabs(r.bins[0].probability - mc.estimate) < 4.0 * mc.standard_error);
  CHECK(r.bins[0].error < 0.01 * r.bins[0].probability);
}

TEST_CASE("halving the grid step barely moves the answer") {
  BallotOptions coarse, fine;
  fine.grid_step = 0.025;
  const std::vector<EndpointBin> bins{{-1.0, 0.0}, {-3.0, -2.0}, {0.5, 1.5}};
  const auto a = ballot_exact(BarrierSpec::logarithmic(10.0, 2.0), 5, bins, coarse);
  const auto b = ballot_exact(BarrierSpec::logarithmic(10.0, 2.0), 5, bins, fine);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    CHECK(std::fabs(a.bins[i].probability / b.bins[i].probability - 1.0) < 0.005);
  }
}

TEST_CASE("time reversal symmetry of the logarithmic barrier") {
  // Reversing time maps paths 0 -> x under psi to paths x -> 0 under psi_{t-l}
  // = psi_l, i.e. paths 0 -> -x under psi - x. Narrow bins compare densities.
  const double t = 10.0, y = 2.0, eps = 1e-2;
  for (double x : {-1.5, 0.5, 1.0}) {
    const auto fwd = ballot_exact(BarrierSpec::logarithmic(t, y), 10, {{x - eps / 2, x + eps / 2}});
    const auto rev = ballot_exact(BarrierSpec::logarithmic(t, y - x), 10, {{-x - eps / 2, -x + eps / 2}});
    CHECK(fwd.bins[0].probability == doctest::Approx(rev.bins[0].probability).epsilon(1e-3));
  }
}

TEST_CASE("structural bound factors") {
  CHECK(ballot_bound(BallotBoundKind::kLinearUpper, 0.0, 0.0, 0.0, 1) == doctest::Approx(std::exp(-1.0)));
  CHECK(ballot_bound(BallotBoundKind::kLinearUpper, 0.5, 1.0, 0.0, 4) ==
        doctest::Approx(2.0 * 4.0 / 8.0 * std::exp(-0.25)));
  CHECK(ballot_bound(BallotBoundKind::kLogUpper, 0.0, 1.0, 0.0, 5, 20) ==
        doctest::Approx(2.0 * (1.0 + 2.0 * std::log(5.0) + 1.0) * std::pow(5.0, -1.5) * std::exp(-0.2)));
  CHECK_THROWS_AS(ballot_bound(BallotBoundKind::kLinearUpper, 0.0, 1.0, 2.0, 5), DomainError);
  CHECK_THROWS_AS(ballot_bound(BallotBoundKind::kLinearLower, 1.0, 3.0, 2.0, 5), DomainError);
  CHECK_THROWS_AS(ballot_bound(BallotBoundKind::kLogUpper, 0.0, 5.0, 0.0, 5, 20), DomainError);
  CHECK_THROWS_AS(ballot_bound(BallotBoundKind::kLinearUpper, 0.0, -1.0, -2.0, 5), DomainError);
}
