#include <doctest.h>

#include <cmath>

#include "zetalab/bbm.hpp"
#include "zetalab/error.hpp"
#include "zetalab/numeric.hpp"

using namespace zetalab;

namespace {

ExperimentOptions opts(std::uint64_t seed, int threads = 1) {
  ExperimentOptions o;
  o.seed = seed;
  o.threads = threads;
  return o;
}

}  // namespace

TEST_CASE("bbm at time zero") {
  BbmParams p;
  const auto recs = simulate_bbm(p, 5, opts(1));
  for (const auto& r : recs) {
    CHECK(r.max == 0.0);
    CHECK(r.particle_count == 1);
    CHECK(r.trajectory == std::vector<double>{0.0});
  }
}

TEST_CASE("yule particle counts") {
  BbmParams p;
  p.horizon = 8.0;
  const auto recs = simulate_bbm(p, 1000, opts(2));
  RunningStats n;
  for (const auto& r : recs) n.add(static_cast<double>(r.particle_count));
  const double mean = std::exp(8.0);
  CHECK(std::fabs(n.mean() - mean) < 4.0 * std::sqrt(mean * (mean - 1.0) / 1000.0));
  CHECK(n.variance() == doctest::Approx(mean * (mean - 1.0)).epsilon(0.3));
}

TEST_CASE("bbm trajectories") {
  BbmParams p;
  p.horizon = 5.0;
  const auto recs = simulate_bbm(p, 50, opts(3));
  for (const auto& r : recs) {
    REQUIRE(r.trajectory.size() == 6);
    CHECK(r.trajectory.front() == 0.0);
    CHECK(r.trajectory.back() == r.max);
  }
  p.horizon = 4.5;
  const auto frac = simulate_bbm(p, 10, opts(3));
  for (const auto& r : frac) CHECK(r.trajectory.size() == 5);

  // Increments of the maximizer path over one unit of time are not wild.
  p.horizon = 5.0;
  RunningStats inc;
  for (const auto& r : recs) {
    for (std::size_t k = 1; k < r.trajectory.size(); ++k) inc.add(r.trajectory[k] - r.trajectory[k - 1]);
  }
  CHECK(inc.mean() > 0.5);
  CHECK(inc.mean() < 1.5);
}

TEST_CASE("ensemble reduces to a single copy and dominates it") {
  BbmParams p;
  p.horizon = 6.0;
  const auto single = simulate_bbm(p, 40, opts(4));
  p.copies = ensemble_copies(6.0, 0.0);
  CHECK(p.copies == 1);
  const auto same = simulate_ensemble(p, 40, opts(4));
  for (std::size_t i = 0; i < single.size(); ++i) {
    CHECK(same[i].max == single[i].max);
    CHECK(same[i].particle_count == single[i].particle_count);
    CHECK(same[i].trajectory == single[i].trajectory);
  }
  p.copies = 3;
  const auto ens = simulate_ensemble(p, 40, opts(4));
  for (std::size_t i = 0; i < single.size(); ++i) {
    CHECK(ens[i].max >= single[i].max);
    CHECK(ens[i].particle_count >= single[i].particle_count);
  }
  const auto threaded = simulate_ensemble(p, 40, opts(4, 3));
  for (std::size_t i = 0; i < ens.size(); ++i) {
    CHECK(threaded[i].max == ens[i].max);
    CHECK(threaded[i].trajectory == ens[i].trajectory);
  }
  CHECK(ensemble_copies(10.0, 0.4) == static_cast<std::size_t>(std::ceil(std::exp(4.0))));
}

TEST_CASE("bbm resource caps") {
  BbmParams p;
  p.horizon = 17.0;
  CHECK_THROWS_AS(simulate_bbm(p, 1, opts(1)), ResourceError);
  p.horizon = 8.0;
  p.max_particles = 100;
  CHECK_THROWS_AS(simulate_bbm(p, 1, opts(1)), ResourceError);
  p.horizon = -1.0;
  CHECK_THROWS_AS(simulate_bbm(p, 1, opts(1)), DomainError);
}

TEST_CASE("envelope counting") {
  BbmRecord a;
  a.trajectory = {0.0, 1.0, 2.0, 3.0};
  BbmRecord b;
  b.trajectory = {0.0, 4.5, 2.0, 3.0};
  const auto rep = envelope_check({a, b}, 3.0, 0.0, 3.0, 3.0, 3);
  CHECK(rep.envelope_violations == 1);
  CHECK(rep.line_violations == 1);
  CHECK(rep.line_fraction() == 0.5);
  const auto wide = envelope_check({a, b}, 3.0, 10.0, 3.0, 3.0, 0);
  CHECK(wide.envelope_violations == 0);
  CHECK(wide.line_violations == 0);
}
