#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "zetalab/error.hpp"
#include "zetalab/frequency.hpp"
#include "zetalab/numeric.hpp"
#include "zetalab/sampler.hpp"
#include "zetalab/spectral.hpp"

using namespace zetalab;

TEST_CASE("fft friendly sizes") {
  CHECK(fft_friendly_size(1) == 1);
  CHECK(fft_friendly_size(11) == 12);
  CHECK(fft_friendly_size(1021) == 1024);
  CHECK(fft_friendly_size(1025) == 1029);
  CHECK(fft_friendly_size(97) == 98);
}

TEST_CASE("gridded trig sums match direct long-double sums") {
  RngStream rng(4, 0, 99u);
  struct Case {
    std::size_t n;
    double origin;
    double spacing;
    double xmax;
  };
  for (const Case c : {Case{1, 0.0, 0.1, 50.0}, Case{2, -3.0, 0.5, 10.0}, Case{257, -12.8, 0.1, 30.0},
                       Case{1000, 5.0, 0.013, 400.0}, Case{4097, -2.0, 1e-3, 3000.0}, Case{64, 0.0, 2.0, 40.0}}) {
    const std::size_t atoms = 300;
    std::vector<double> x(atoms), re(atoms), im(atoms);
    double mass = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) {
      x[i] = c.xmax * rng.uniform();
      re[i] = rng.normal();
      im[i] = rng.normal();
      mass += std::hypot(re[i], im[i]);
    }
    TrigSumSynthesizer synth(x, c.origin, c.spacing, c.n);
    std::vector<double> out(c.n);
    synth.evaluate(re, im, out);
    double worst = 0.0;
    for (std::size_t k = 0; k < c.n; ++k) {
      worst = std::max(worst, std::fabs(out[k] - oracle::trig_sum(x, re, im, c.origin + k * c.spacing)));
    }
    INFO("n=" << c.n << " origin=" << c.origin);
    CHECK(worst / mass < 1e-12);
  }
}

TEST_CASE("circulant embedding of an embeddable sequence") {
  // Exponential covariance is embeddable at the minimal size.
  const double a = 0.2;
  CirculantEmbedding ce(100, [&](std::size_t k) { return std::exp(-a * static_cast<double>(k)); });
  CHECK(ce.embedding_size() == 198);
  const auto rec = ce.reconstructed_covariance();
  for (std::size_t k = 0; k < 100; ++k) CHECK(rec[k] == doctest::Approx(std::exp(-a * k)).epsilon(1e-12));

  RngStream rng(2, 0, 5u);
  const int n = 40000;
  RunningStats v0, c1, c10;
  for (int r = 0; r < n; ++r) {
    const auto s = ce.sample(rng);
    v0.add(s[30] * s[30]);
    c1.add(s[30] * s[31]);
    c10.add(s[50] * s[60]);
  }
  CHECK(std::fabs(v0.mean() - 1.0) < 4.0 * v0.stderr_mean());
  CHECK(std::fabs(c1.mean() - std::exp(-a)) < 4.0 * c1.stderr_mean());
  CHECK(std::fabs(c10.mean() - std::exp(-10 * a)) < 4.0 * c10.stderr_mean());
}

TEST_CASE("the log-correlated spectrum is not circulant-embeddable") {
  RngStream rng(7, 0, StreamPurpose::kFrequencies);
  const auto fs = surrogate_frequencies(6, 512, rng);
  const double spacing = std::exp(-6.0);
  bool threw = false;
  try {
    CirculantEmbedding ce(512, [&](std::size_t k) { return covariance(fs, static_cast<double>(k) * spacing); });
  } catch (const NonEmbeddableError& e) {
    threw = true;
    CHECK(e.min_ratio() < -1e-8);
  }
  CHECK(threw);
}

TEST_CASE("fast covariance sequence reproduces direct sums") {
  const auto fs = FrequencySet::from_primes(sieve_primes(10000));
  const double spacing = std::exp(-std::log(std::log(10000.0)));
  const auto seq = stationary_covariance_sequence(fs, spacing, 512);
  for (std::size_t k = 0; k < 512; ++k) {
    REQUIRE(std::fabs(seq[k] - covariance(fs, k * spacing)) < 1e-12);
  }
}
