#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "support/oracles.hpp"
#include "zetalab/error.hpp"
#include "zetalab/numeric.hpp"
#include "zetalab/sampler.hpp"

using namespace zetalab;

namespace {

FrequencySet surrogate(int t, int atoms, std::uint64_t seed = 1) {
  RngStream rng(seed, 0, StreamPurpose::kFrequencies);
  return surrogate_frequencies(t, atoms, rng);
}

}  // namespace

TEST_CASE("coefficient laws") {
  const auto fs = surrogate(1, 1000000);
  RngStream rng(10, 0, StreamPurpose::kCoefficients);
  const auto g = sample_weights(fs, CoefficientLaw::kComplexGaussian, rng);
  RunningStats a, b;
  for (std::size_t i = 0; i < g.re.size(); ++i) {
    a.add(g.re[i]);
    b.add(g.im[i]);
  }
  CHECK(std::fabs(a.mean()) < 4.0 / std::sqrt(2.0e6));
  CHECK(std::fabs(a.variance() - 0.5) < 4.0 * 0.5 * std::sqrt(2.0 / 1e6));
  CHECK(std::fabs(b.variance() - 0.5) < 4.0 * 0.5 * std::sqrt(2.0 / 1e6));

  const auto u = sample_weights(fs, CoefficientLaw::kUniformPhase, rng);
  for (std::size_t i = 0; i < u.re.size(); ++i) REQUIRE(std::fabs(u.re[i] * u.re[i] + u.im[i] * u.im[i] - 1.0) < 1e-12);

  RngStream r1(3, 9, StreamPurpose::kCoefficients), r2(3, 9, StreamPurpose::kCoefficients);
  const auto d1 = sample_weights(fs, CoefficientLaw::kComplexGaussian, r1);
  const auto d2 = sample_weights(fs, CoefficientLaw::kComplexGaussian, r2);
  CHECK(d1.re == d2.re);
  CHECK(d1.im == d2.im);
  CHECK(d1.lineage.master_seed == 3);
  CHECK(d1.lineage.replicate == 9);
  CHECK(parse_coefficient_law("uniform-phase") == CoefficientLaw::kUniformPhase);
  CHECK_THROWS_AS(parse_coefficient_law("gauss"), ValidationError);
}

TEST_CASE("grid construction") {
  const auto g = Grid::symmetric(1.0, 0.25);
  CHECK(g.count == 9);
  CHECK(g.point(4) == 0.0);
  CHECK(g.point(0) == -1.0);
  const double t = 10.0, theta = 0.3;
  CHECK(symmetric_grid_count(std::exp(theta * t), std::exp(-t)) ==
        2.0 * std::ceil(std::exp(theta * t) / std::exp(-t)) + 1.0);
  CHECK(std::fabs(symmetric_grid_count(std::exp(theta * t), std::exp(-t)) / (2.0 * std::exp(13.0)) - 1.0) < 1e-5);
  CHECK_THROWS_AS(Grid::symmetric(std::exp(20.0), std::exp(-10.0)), ResourceError);
}

TEST_CASE("direct evaluation identities") {
  const auto one = FrequencySet::from_atoms(FrequencyMode::kSurrogate, 2, {5.0}, {1.0}, {2});
  WeightDraw d;
  d.re = {1.0};
  d.im = {0.0};
  const auto grid = Grid::symmetric(2.0, 0.1);
  const auto s = evaluate_field(d, one, grid, false);
  for (std::size_t n = 0; n < grid.count; ++n) REQUIRE(s.values[n] == doctest::Approx(std::cos(grid.point(n) * 5.0)));

  const auto fs = surrogate(4, 200);
  RngStream rng(1, 0, StreamPurpose::kCoefficients);
  const auto a = sample_weights(fs, CoefficientLaw::kComplexGaussian, rng);
  const auto b = sample_weights(fs, CoefficientLaw::kComplexGaussian, rng);
  double x0 = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i) x0 += std::sqrt(fs.weights()[i]) * a.re[i];
  CHECK(evaluate_point(a, fs, 0.0) == doctest::Approx(x0).epsilon(1e-13));

  WeightDraw sum = a;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    sum.re[i] += b.re[i];
    sum.im[i] += b.im[i];
  }
  const auto ga = evaluate_field(a, fs, grid, true);
  const auto gb = evaluate_field(b, fs, grid, false);
  const auto gs = evaluate_field(sum, fs, grid, false);
  for (std::size_t n = 0; n < grid.count; ++n) {
    REQUIRE(std::fabs(gs.values[n] - ga.values[n] - gb.values[n]) < 1e-10);
    REQUIRE(std::fabs(ga.partial(4, n) - ga.values[n]) < 1e-9);
    double ysum = 0.0;
    for (int k = 1; k <= 4; ++k) ysum += ga.slice_value(k, n);
    REQUIRE(std::fabs(ysum - ga.values[n]) < 1e-9);
  }
  const auto ps = partial_sums_at(a, fs, grid.point(7));
  for (int j = 1; j <= 4; ++j) CHECK(ps[j - 1] == doctest::Approx(ga.partial(j, 7)).epsilon(1e-12));

  FieldOptions capped;
  capped.max_points = 10;
  CHECK_THROWS_AS(evaluate_field(a, fs, grid, false, capped), ResourceError);
}

TEST_CASE("fast evaluation agrees with direct evaluation") {
  const auto fs = surrogate(7, 1000);
  RngStream rng(2, 0, StreamPurpose::kCoefficients);
  const auto d = sample_weights(fs, CoefficientLaw::kComplexGaussian, rng);
  const auto grid = Grid::symmetric(std::exp(0.3 * 7), std::exp(-7.0));
  const auto direct = evaluate_field(d, fs, grid, true);
  FastFieldEvaluator fast(fs, grid, true);
  const auto f = fast.evaluate(d);
  FastFieldEvaluator fast_plain(fs, grid, false);
  std::vector<double> plain;
  fast_plain.evaluate_values(d, plain);
  double worst = 0.0;
  for (std::size_t n = 0; n < grid.count; ++n) {
    worst = std::max(worst, std::fabs(f.values[n] - direct.values[n]));
    worst = std::max(worst, std::fabs(plain[n] - direct.values[n]));
    for (int j = 1; j <= 7; ++j) worst = std::max(worst, std::fabs(f.partial(j, n) - direct.partial(j, n)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("threads do not change direct evaluation") {
  const auto fs = surrogate(3, 300);
  RngStream rng(2, 0, StreamPurpose::kCoefficients);
  const auto d = sample_weights(fs, CoefficientLaw::kComplexGaussian, rng);
  const auto grid = Grid::symmetric(1.0, 1e-3);
  FieldOptions one, four;
  four.threads = 4;
  CHECK(evaluate_field(d, fs, grid, true, one).partials == evaluate_field(d, fs, grid, true, four).partials);
}

TEST_CASE("tilt algebra") {
  const auto fs = FrequencySet::from_primes(sieve_primes(10));
  const auto zero = make_tilt({0.0, 0.0, 0.0, 0.0}, fs);
  for (double s : zero.shift_re) CHECK(s == 0.0);
  CHECK(zero.log_normalizer == 0.0);
  CHECK(zero.log_weight(1.3, -0.2) == 0.0);

  const TiltSpec two{0.0, 0.0, 2.0, 0.0};
  const double sigma2 = 0.5 * (1.0 / 2 + 1.0 / 3 + 1.0 / 5 + 1.0 / 7);
  CHECK(tilted_mean(fs, two, 0.0) == doctest::Approx(2.0 * sigma2).epsilon(1e-14));
  CHECK(tilted_mean(fs, two, 0.0) == doctest::Approx(1.17619).epsilon(1e-5));
  CHECK(log_laplace_transform(fs, two) == doctest::Approx(2.0 * sigma2).epsilon(1e-14));

  // Shifted draw mean equals the closed form at arbitrary points.
  const TiltSpec spec{0.1, -0.4, 0.7, 1.3};
  const auto tilt = make_tilt(spec, fs);
  WeightDraw mean_draw;
  mean_draw.re = tilt.shift_re;
  mean_draw.im = tilt.shift_im;
  for (double at : {-1.0, 0.1, 0.5, 3.0}) {
    CHECK(evaluate_point(mean_draw, fs, at) == doctest::Approx(tilted_mean(fs, spec, at)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(make_tilt({0, 0, -1.0, 0}, fs), DomainError);
}

TEST_CASE("tilted sampling: mean moves, covariance stays, reweighting is unbiased") {
  const auto fs = FrequencySet::from_primes(sieve_primes(1000));
  const TiltSpec spec{0.0, 0.3, 0.5, 1.0};
  const auto tilt = make_tilt(spec, fs);
  const double var = covariance(fs, 0.0);
  const double cov = covariance(fs, 0.3);
  RunningStats m0, m1, v0, c01, w;
  const int n = 100000;
  for (int r = 0; r < n; ++r) {
    RngStream rng(17, static_cast<std::uint64_t>(r), StreamPurpose::kCoefficients);
    const auto d = apply_tilt(tilt, fs, rng);
    const double x0 = evaluate_point(d, fs, 0.0);
    const double x1 = evaluate_point(d, fs, 0.3);
    m0.add(x0);
    m1.add(x1);
    w.add(std::exp(tilt.log_weight(x0, x1)));
    const double e0 = x0 - tilted_mean(fs, spec, 0.0);
    const double e1 = x1 - tilted_mean(fs, spec, 0.3);
    v0.add(e0 * e0);
    c01.add(e0 * e1);
  }
  CHECK(std::fabs(m0.mean() - tilted_mean(fs, spec, 0.0)) < 4.0 * m0.stderr_mean());
  CHECK(std::fabs(m1.mean() - tilted_mean(fs, spec, 0.3)) < 4.0 * m1.stderr_mean());
  CHECK(std::fabs(v0.mean() - var) < 4.0 * v0.stderr_mean());
  CHECK(std::fabs(c01.mean() - cov) < 4.0 * c01.stderr_mean());
  CHECK(std::fabs(w.mean() - 1.0) < 4.0 * w.stderr_mean());
}

TEST_CASE("dense reference sampler") {
  const auto fs = FrequencySet::from_primes(sieve_primes(1000));
  const auto grid = Grid::uniform(0.0, 0.2, 20);
  const auto c = covariance_matrix(fs, grid);
  DenseGaussianSampler dense(c);
  CHECK(dense.dimension() == 20);
  RngStream rng(1, 0, StreamPurpose::kDense);
  const int n = 50000;
  const auto x = dense.sample_columns(n, rng);
  const Eigen::MatrixXd emp = x * x.transpose() / n;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const double se = std::sqrt((c(i, i) * c(j, j) + c(i, j) * c(i, j)) / n);
      REQUIRE(std::fabs(emp(i, j) - c(i, j)) < 5.0 * se);
    }
  }
}

TEST_CASE("stationary sampler covariance") {
  const auto fs = FrequencySet::from_primes(sieve_primes(10000));
  const auto grid = Grid::uniform(-1.0, 0.1, 32);
  FastFieldEvaluator eval(fs, grid, false);
  const int n = 40000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(32, 32);
  std::vector<double> v;
  for (int r = 0; r < n; ++r) {
    RngStream rng(5, static_cast<std::uint64_t>(r), StreamPurpose::kCoefficients);
    eval.evaluate_values(sample_weights(fs, CoefficientLaw::kComplexGaussian, rng), v);
    const Eigen::Map<const Eigen::VectorXd> m(v.data(), 32);
    acc.noalias() += m * m.transpose();
  }
  acc /= n;
  const auto c = covariance_matrix(fs, grid);
  int outside = 0;
  for (int i = 0; i < 32; ++i) {
    for (int j = 0; j < 32; ++j) {
      const double se = std::sqrt((c(i, i) * c(j, j) + c(i, j) * c(i, j)) / n);
      if (std::fabs(acc(i, j) - c(i, j)) > 4.0 * se) ++outside;
    }
  }
  CHECK(outside == 0);
  // The convenience entry point also returns slices.
  RngStream rng(6, 0, StreamPurpose::kCoefficients);
  const auto s = sample_stationary(fs, grid, CoefficientLaw::kComplexGaussian, rng, true);
  CHECK(s.has_slices());
  CHECK(s.values.size() == 32);
}

TEST_CASE("field file formats") {
  const auto fs = surrogate(3, 100);
  RngStream rng(4, 0, StreamPurpose::kCoefficients);
  const auto s = sample_stationary(fs, Grid::symmetric(0.5, 0.05), CoefficientLaw::kComplexGaussian, rng, true);
  const auto path = std::filesystem::temp_directory_path() / "zetalab_field_roundtrip.bin";
  write_field_binary(s, path);
  const auto back = read_field_binary(path);
  std::filesystem::remove(path);
  CHECK(back.values == s.values);
  CHECK(back.partials == s.partials);
  CHECK(back.grid.count == s.grid.count);
  std::ostringstream out;
  write_field_csv(s, out);
  CHECK(out.str().substr(0, out.str().find('\n')) == "h,X,S_1,S_2,S_3");
}
