#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "zetalab/error.hpp"
#include "zetalab/extremes.hpp"

using namespace zetalab;

namespace {

FrequencySet surrogate(int t, int atoms, std::uint64_t seed = 1) {
  RngStream rng(seed, 0, StreamPurpose::kFrequencies);
  return surrogate_frequencies(t, atoms, rng);
}

ExperimentOptions opts(std::uint64_t seed, int threads = 1) {
  ExperimentOptions o;
  o.seed = seed;
  o.threads = threads;
  return o;
}

}  // namespace

TEST_CASE("maxima grid size and cap") {
  const Grid g = maxima_grid(10.0, 0.3);
  CHECK(g.count == static_cast<std::size_t>(2.0 * std::ceil(std::exp(13.0)) + 1.0));
  CHECK_THROWS_AS(maxima_grid(14.0, 0.5), ResourceError);

  const auto fs = surrogate(6, 16);
  MaxExperimentParams p;
  p.t = 6.0;
  p.theta = 0.5;
  p.replicates = 4;
  ExperimentOptions o = opts(1);
  o.max_points = 1000;
  CHECK_THROWS_AS(run_max_experiment(fs, p, o), ResourceError);
}

TEST_CASE("maxima records") {
  const auto fs = surrogate(5, 256);
  MaxExperimentParams p;
  p.t = 5.0;
  p.theta = 0.2;
  p.replicates = 6;
  const auto recs = run_max_experiment(fs, p, opts(17));
  REQUIRE(recs.size() == 6);
  for (const auto& r : recs) {
    CHECK(r.max >= r.value_at_zero);
    REQUIRE(r.trajectory.size() == 5);
    CHECK(std::fabs(r.trajectory.back() - r.max) < 1e-9);
    CHECK(r.recentered == doctest::Approx(r.max - m_1(5.0)).epsilon(1e-14));
    CHECK(std::fabs(r.argmax) <= std::exp(1.0) + std::exp(-5.0));
  }

  // Against direct evaluation of the same draw.
  RngStream rng(17, 3, StreamPurpose::kCoefficients);
  const auto draw = sample_weights(fs, CoefficientLaw::kComplexGaussian, rng);
  const auto direct = evaluate_field(draw, fs, maxima_grid(5.0, 0.2), false);
  double best = -1e300;
  for (double v : direct.values) best = std::max(best, v);
  CHECK(std::fabs(best - recs[3].max) < 1e-9);

  const auto threaded = run_max_experiment(fs, p, opts(17, 3));
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(threaded[i].max == recs[i].max);
    CHECK(threaded[i].argmax == recs[i].argmax);
    CHECK(threaded[i].trajectory == recs[i].trajectory);
  }

  p.recentering = RecenteringKind::kMIid;
  const auto iid = run_max_experiment(fs, p, opts(17));
  CHECK(iid[0].recentered == doctest::Approx(iid[0].max - m_iid(5.0, 0.2)).epsilon(1e-14));
}

TEST_CASE("log coefficient fit and bootstrap ordering") {
  const std::vector<double> ts{8.0, 10.0, 12.0};
  std::vector<double> exact;
  for (double t : ts) exact.push_back(std::sqrt(1.3) * t - 0.2 * std::log(t) + 1.5);
  CHECK(fit_log_coefficient(ts, exact, 0.3) == doctest::Approx(0.2).epsilon(1e-10));

  RngStream rng(5, 0, StreamPurpose::kWalk);
  std::vector<std::vector<double>> a(3), b(3);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (int r = 0; r < 200; ++r) {
      a[i].push_back(ts[i] - 0.75 * std::log(ts[i]) + 0.3 * rng.normal());
      b[i].push_back(std::sqrt(1.3) * ts[i] - 0.2 * std::log(ts[i]) + 0.3 * rng.normal());
    }
  }
  const auto boot = bootstrap_log_coefficient_ordering(ts, a, 0.0, b, 0.3, 200, 9);
  CHECK(boot.coefficient_a == doctest::Approx(0.75).epsilon(0.3));
  CHECK(boot.fraction() > 0.95);
  const auto swapped = bootstrap_log_coefficient_ordering(ts, b, 0.3, a, 0.0, 200, 9);
  CHECK(swapped.fraction() < 0.05);
}

TEST_CASE("tail estimate on a one-atom field") {
  // X(h) = re cos(h x) + im sin(h x) with x tiny is the Gaussian re for all |h| <= 1.
  const auto fs = FrequencySet::from_atoms(FrequencyMode::kPrimeExact, 1, {1e-9}, {1.0}, {1});
  const double sigma = std::sqrt(0.5);
  TailParams p;
  p.y = 1.0;
  p.level = 3.0 * sigma;
  p.spacing = 0.25;
  p.mixture_spacing = 0.125;
  p.replicates = 340000;
  const auto est = tail_probability_is(fs, p, opts(3));
  const double exact = normal_sf(3.0);
  CHECK(std::fabs(est.probability / exact - 1.0) < 0.01);
  CHECK(est.draws % est.tilt_points.size() == 0);
  CHECK(est.effective_sample_size <= static_cast<double>(est.draws));
  CHECK(!est.degraded);
  CHECK(est.ci_lower < exact);
  CHECK(est.ci_upper > exact);
  double total = 0.0;
  for (double c : est.contributions) total += c;
  CHECK(total == doctest::Approx(est.probability).epsilon(1e-12));
}

TEST_CASE("grid mixture on a one-atom field") {
  const auto fs = FrequencySet::from_atoms(FrequencyMode::kPrimeExact, 1, {1e-9}, {1.0}, {1});
  TailParams p;
  p.level = 3.0 * std::sqrt(0.5);
  p.spacing = 0.25;
  p.replicates = 340000;
  const auto est = tail_probability_is(fs, p, opts(3));
  CHECK(std::fabs(est.probability / normal_sf(3.0) - 1.0) < 0.01);
  CHECK(est.draws == p.replicates);
  CHECK(est.tilt_points.size() == 9);
  double total = 0.0;
  for (double c : est.contributions) total += c;
  CHECK(total == doctest::Approx(est.probability).epsilon(1e-12));
}

TEST_CASE("grid mixture keeps its sample size on a correlated field") {
  const auto fs = surrogate(6, 512);
  TailParams p;
  p.y = 3.0;
  p.t = 6.0;
  p.replicates = 4000;
  const auto est = tail_probability_is(fs, p, opts(2));
  CHECK(!est.degraded);
  CHECK(est.log_standard_error < 0.1);
  CHECK(est.tilt_points.size() == kContributionBins);
}

TEST_CASE("untilted mixture is plain Monte Carlo") {
  const auto fs = surrogate(4, 128);
  TailParams p;
  p.y = 0.5;
  p.t = 4.0;
  p.replicates = 4000;
  p.lambda = 0.0;
  const auto plain = tail_probability_is(fs, p, opts(8));
  CHECK(plain.probability == doctest::Approx(static_cast<double>(plain.hits) / plain.draws).epsilon(1e-12));
  CHECK(plain.effective_sample_size == doctest::Approx(static_cast<double>(plain.hits)));

  p.lambda = std::numeric_limits<double>::quiet_NaN();
  const auto tilted = tail_probability_is(fs, p, opts(9));
  const double se = std::hypot(plain.standard_error, tilted.standard_error);
  CHECK(std::fabs(plain.probability - tilted.probability) < 4.0 * se);

  const auto threaded = tail_probability_is(fs, p, opts(9, 3));
  CHECK(threaded.probability == tilted.probability);
  p.y = -1.0;
  CHECK_THROWS_AS(tail_probability_is(fs, p, opts(9)), DomainError);
}

TEST_CASE("barrier event: single step closed form") {
  BarrierEventParams p;
  p.barrier = BarrierSpec::linear(0.1, 2.0);
  p.j = 1;
  p.x = 0.0;
  p.replicates = 200000;
  const auto est = barrier_event_prob(nullptr, p, opts(4));
  const double sigma = std::sqrt(0.5);
  const double exact = normal_cdf(0.0) - normal_cdf(-1.0 / sigma);
  CHECK(std::fabs(est.probability - exact) < 4.0 * est.standard_error);
  CHECK(est.interval.lower < exact);
  CHECK(est.interval.upper > exact);
}

TEST_CASE("barrier event against the transfer operator") {
  BarrierEventParams p;
  p.barrier = BarrierSpec::logarithmic(10.0, 2.0);
  p.j = 5;
  p.x = 0.0;
  p.replicates = 200000;
  const auto est = barrier_event_prob(nullptr, p, opts(6));
  const auto oracle = ballot_exact(p.barrier, 5, {{-1.0, 0.0, 0.0}});
  CHECK(std::fabs(est.probability - oracle.bins[0].probability) < 3.0 * est.standard_error);
}

TEST_CASE("field walk matches iid walk and barriers are monotone") {
  const auto fs = surrogate(8, 64);
  BarrierEventParams p;
  p.barrier = BarrierSpec::linear(0.0, 1.5);
  p.j = 6;
  p.x = 1.0;
  p.replicates = 40000;
  p.source = WalkSource::kIid;
  const auto iid = barrier_event_prob(&fs, p, opts(2));
  p.source = WalkSource::kField;
  const auto field = barrier_event_prob(&fs, p, opts(2));
  CHECK(std::fabs(iid.probability - field.probability) < 4.0 * std::hypot(iid.standard_error, field.standard_error));

  for (auto source : {WalkSource::kIid, WalkSource::kField}) {
    p.source = source;
    p.replicates = 5000;
    p.barrier = BarrierSpec::linear(0.0, 1.5);
    const auto low = barrier_event_prob(&fs, p, opts(11));
    p.barrier = BarrierSpec::linear(0.05, 2.0);
    const auto high = barrier_event_prob(&fs, p, opts(11));
    CHECK(high.hits >= low.hits);
  }
}

TEST_CASE("barrier event edge cases") {
  BarrierEventParams p;
  p.barrier = BarrierSpec::linear(0.0, 1.0);
  p.j = 3;
  p.x = -40.0;
  p.replicates = 1000;
  const auto est = barrier_event_prob(nullptr, p, opts(1));
  CHECK(est.hits == 0);
  CHECK(est.interval.one_sided);
  CHECK(est.interval.upper > 0.0);
  p.x = 2.0;
  CHECK_THROWS_AS(barrier_event_prob(nullptr, p, opts(1)), DomainError);
  p.x = 0.0;
  p.source = WalkSource::kField;
  CHECK_THROWS_AS(barrier_event_prob(nullptr, p, opts(1)), DomainError);
}

TEST_CASE("discretization containment and sanity") {
  const auto fs = surrogate(8, 256);
  DiscretizationParams p;
  p.j_values = {4, 8};
  p.y_values = {1.01, 3.0};
  p.replicates = 3000;
  const auto rows = discretization_check(fs, p, opts(12));
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.hits_max >= r.hits_point);
    CHECK(r.ratio == doctest::Approx(r.p_max / r.reference));
  }
  const auto& near_one = rows[2];
  CHECK(near_one.j == 8);
  CHECK(near_one.p_max > 0.0);
  CHECK(near_one.p_max < 1.0);
  CHECK(near_one.interval_max.lower > 0.0);

  p.y_values = {1.0};
  CHECK_THROWS_AS(discretization_check(fs, p, opts(1)), DomainError);
  p.y_values = {9.0};
  p.j_values = {4};
  CHECK_THROWS_AS(discretization_check(fs, p, opts(1)), DomainError);
}

TEST_CASE("pair probability against quadrature") {
  struct Case {
    double var, cov, lo, hi;
  };
  const double inf = std::numeric_limits<double>::infinity();
  for (const Case& c : {Case{2.0, 0.5, 1.0, inf}, Case{2.0, -0.7, -0.5, 1.5}, Case{0.8, 0.79, 0.3, 0.9},
                        Case{3.0, 0.0, 1.0, 2.0}}) {
    const double ref = oracle::bivariate_rectangle(c.lo, c.hi, c.lo, c.hi, c.var, c.var, c.cov);
    CHECK(std::fabs(gaussian_pair_probability(c.var, c.cov, c.lo, c.hi) - ref) < 1e-7);
  }
  CHECK(gaussian_pair_probability(1.0, 0.3, -inf, inf) == doctest::Approx(1.0));
}

TEST_CASE("decoupling regimes") {
  const auto fs = surrogate(6, 256);
  DecouplingParams p;
  p.k = 1;
  p.separation_multiples = {1e-6, 100.0};
  p.event_lo = 1.0;
  p.replicates = 20000;
  const auto rep = decoupling_check(fs, p, opts(21));
  REQUIRE(rep.rows.size() == 2);
  const auto& near = rep.rows[0];
  CHECK(near.near_regime);
  CHECK(near.correlation > 0.999);
  CHECK(std::fabs(near.p_joint - std::min(near.p_first, near.p_second)) < 3.0 * near.se_joint + 1e-12);
  const auto& far = rep.rows[1];
  CHECK(!far.near_regime);
  CHECK(far.exact_relative_error < 0.2);
  CHECK(far.exact_marginal == doctest::Approx(normal_sf(1.0 / std::sqrt(rep.variance))));
  CHECK(std::fabs(far.p_joint - far.exact_joint) < 4.0 * far.se_joint);
  CHECK(rep.envelope_constant == doctest::Approx(far.exact_relative_error / far.envelope));

  p.event_lo = -std::numeric_limits<double>::infinity();
  p.replicates = 100;
  const auto sure = decoupling_check(fs, p, opts(21));
  for (const auto& r : sure.rows) {
    CHECK(r.p_joint == 1.0);
    CHECK(r.p_first * r.p_second == 1.0);
    CHECK(r.exact_joint == doctest::Approx(1.0));
  }
}

TEST_CASE("z_delta counts") {
  const auto fs = surrogate(4, 128);
  ZDeltaParams p;
  p.t = 4;
  p.alpha = 0.5;
  p.deltas = {1e-9, 0.5, 1.0};
  p.replicates = 300;
  const auto res = z_delta(fs, p, opts(31));
  for (const auto& c : res.counts) {
    CHECK(c[0] <= c[1]);
    CHECK(c[1] <= c[2]);
  }
  CHECK(res.summaries[0].mean < 0.01);

  // Brute-force recount of one replicate.
  RngStream rng(31, 7, StreamPurpose::kCoefficients);
  const auto draw = sample_weights(fs, CoefficientLaw::kComplexGaussian, rng);
  const Grid grid = Grid::symmetric(std::exp(res.theta * 4.0), std::exp(-4.0));
  const auto field = evaluate_field(draw, fs, grid, true);
  const auto b = BarrierSpec::interpolation_alpha(4.0, 0.5);
  std::size_t count = 0;
  for (std::size_t n = 0; n < grid.count; ++n) {
    const double v = field.values[n] - res.mu * 4.0;
    bool ok = v >= 0.0 && v <= 1.0;
    for (int k = 1; k <= 4 && ok; ++k) ok = field.partial(k, n) <= k * res.mu + b(k);
    count += ok;
  }
  CHECK(count == res.counts[7][2]);

  p.t = 5;
  CHECK_THROWS_AS(z_delta(fs, p, opts(1)), DomainError);
  p.t = 4;
  p.deltas = {0.0};
  CHECK_THROWS_AS(z_delta(fs, p, opts(1)), DomainError);
}

TEST_CASE("z_delta first moment matches the weighted oracle") {
  const auto fs = surrogate(4, 128);
  ZDeltaParams p;
  p.t = 4;
  p.alpha = 0.5;
  p.deltas = {1.0};
  p.replicates = 20000;
  const auto res = z_delta(fs, p, opts(33));
  const auto& s = res.summaries[0];
  CHECK(std::fabs(s.mean - s.exact_prediction) < 4.0 * s.standard_error + 0.01 * s.exact_prediction);
  CHECK(s.tilted_weighted < s.tilted_probability);
  CHECK(s.p_positive >= 0.5 * s.paley_zygmund);
}
