#include "zetalab/frequency.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <ostream>

#include "zetalab/error.hpp"
#include "zetalab/numeric.hpp"

namespace zetalab {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::string to_string(FrequencyMode mode) {
  return mode == FrequencyMode::kPrimeExact ? "prime-exact" : "surrogate";
}

std::string to_string(CovarianceRegime regime) {
  switch (regime) {
    case CovarianceRegime::kNear:
      return "near";
    case CovarianceRegime::kFar:
      return "far";
    case CovarianceRegime::kMixed:
      return "mixed";
  }
  return "mixed";
}

FrequencySet FrequencySet::from_primes(const PrimeTable& table) {
  std::vector<double> w(table.primes.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / static_cast<double>(table.primes[i]);
  const int t_max = table.slice_of.empty() ? 1 : table.slice_of.back();
  return from_atoms(FrequencyMode::kPrimeExact, t_max, table.logs, std::move(w), table.slice_of);
}

FrequencySet FrequencySet::from_atoms(FrequencyMode mode, int t_max, std::vector<double> frequencies,
                                      std::vector<double> weights, std::vector<std::int32_t> slices) {
  if (t_max < 1) throw DomainError("FrequencySet: t_max must be at least 1");
  if (frequencies.size() != weights.size() || frequencies.size() != slices.size()) {
    throw ValidationError("FrequencySet: column lengths differ");
  }
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    const double x = frequencies[i];
    const int k = slices[i];
    if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("FrequencySet: frequency must be positive");
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw ValidationError("FrequencySet: weight must be positive");
    }
    if (k < 1 || k > t_max) throw ValidationError("FrequencySet: slice index outside [1, t_max]");
    const bool small_prime = mode == FrequencyMode::kPrimeExact && k == 1;
    if (!small_prime) {
      const double lo = std::exp(static_cast<double>(k - 1));
      const double hi = std::exp(static_cast<double>(k));
      // Allow one ulp of slack around the slice edges for round-tripped data.
      if (x <= std::nextafter(lo, 0.0) || x > std::nextafter(hi, 2.0 * hi)) {
        throw ValidationError("FrequencySet: frequency " + std::to_string(x) + " outside slice " +
                              std::to_string(k));
      }
    }
  }

  FrequencySet fs;
  fs.mode_ = mode;
  fs.t_max_ = t_max;
  std::vector<std::size_t> order(frequencies.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return slices[a] < slices[b]; });
  fs.frequency_.reserve(order.size());
  fs.weight_.reserve(order.size());
  fs.slice_.reserve(order.size());
  for (std::size_t i : order) {
    fs.frequency_.push_back(frequencies[i]);
    fs.weight_.push_back(weights[i]);
    fs.slice_.push_back(slices[i]);
  }
  fs.slice_start_.assign(static_cast<std::size_t>(t_max) + 2, 0);
  for (int k = 1; k <= t_max + 1; ++k) {
    fs.slice_start_[static_cast<std::size_t>(k)] = static_cast<std::size_t>(
        std::lower_bound(fs.slice_.begin(), fs.slice_.end(), k) - fs.slice_.begin());
  }
  fs.slice_start_[0] = 0;
  return fs;
}

std::pair<std::size_t, std::size_t> FrequencySet::slice_range(int k) const {
  if (k < 1 || k > t_max_) return {0, 0};
  return {slice_start_[static_cast<std::size_t>(k)], slice_start_[static_cast<std::size_t>(k) + 1]};
}

std::pair<std::size_t, std::size_t> FrequencySet::slice_span(int k_lo, int k_hi) const {
  k_lo = std::max(k_lo, 0);
  k_hi = std::min(k_hi, t_max_);
  if (k_hi <= k_lo) return {0, 0};
  return {slice_start_[static_cast<std::size_t>(k_lo) + 1], slice_start_[static_cast<std::size_t>(k_hi) + 1]};
}

double FrequencySet::slice_weight(int k) const {
  const auto [b, e] = slice_range(k);
  NeumaierSum s;
  for (std::size_t i = b; i < e; ++i) s.add(weight_[i]);
  return s.value();
}

double FrequencySet::total_weight() const { return compensated_sum(weight_); }

FrequencySet FrequencySet::restrict(int k_lo, int k_hi) const {
  const auto [b, e] = slice_span(k_lo, k_hi);
  const auto bi = static_cast<std::ptrdiff_t>(b);
  const auto ei = static_cast<std::ptrdiff_t>(e);
  return from_atoms(mode_, t_max_, {frequency_.begin() + bi, frequency_.begin() + ei},
                    {weight_.begin() + bi, weight_.begin() + ei}, {slice_.begin() + bi, slice_.begin() + ei});
}

FrequencySet surrogate_frequencies(int t_max, int atoms_per_slice, RngStream& rng) {
  if (t_max < 1) throw DomainError("surrogate_frequencies: t_max must be at least 1");
  if (atoms_per_slice < 1) throw DomainError("surrogate_frequencies: atoms_per_slice must be at least 1");
  const std::size_t n = static_cast<std::size_t>(t_max) * static_cast<std::size_t>(atoms_per_slice);
  std::vector<double> x(n);
  std::vector<double> w(n, 1.0 / atoms_per_slice);
  std::vector<std::int32_t> k(n);
  std::size_t i = 0;
  for (int l = 1; l <= t_max; ++l) {
    for (int a = 0; a < atoms_per_slice; ++a, ++i) {
      // 1 - U lies in (0, 1), so u stays inside (l-1, l).
      const double u = static_cast<double>(l - 1) + (1.0 - rng.uniform());
      x[i] = std::exp(u);
      k[i] = l;
    }
  }
  return FrequencySet::from_atoms(FrequencyMode::kSurrogate, t_max, std::move(x), std::move(w), std::move(k));
}

namespace {

double half_cosine_sum(const FrequencySet& fs, double delta, std::size_t b, std::size_t e) {
  const double d = std::fabs(delta);
  const auto& x = fs.frequencies();
  const auto& w = fs.weights();
  NeumaierSum s;
  for (std::size_t i = b; i < e; ++i) s.add(w[i] * std::cos(d * x[i]));
  return 0.5 * s.value();
}

}  // namespace

double covariance(const FrequencySet& fs, double delta) {
  if (fs.empty()) throw DomainError("covariance: empty frequency set");
  return half_cosine_sum(fs, delta, 0, fs.size());
}

double restricted_covariance(const FrequencySet& fs, double delta, int k, int l) {
  const auto [b, e] = fs.slice_span(k, l);
  return half_cosine_sum(fs, delta, b, e);
}

PairCovariance CovarianceSummary::pair(const FrequencySet& fs, double delta) const {
  return {sigma2, covariance(fs, delta)};
}

CovarianceSummary summarize_covariance(const FrequencySet& fs) {
  if (fs.empty()) throw DomainError("summarize_covariance: empty frequency set");
  CovarianceSummary out;
  out.slice_masses.resize(static_cast<std::size_t>(fs.t_max()));
  NeumaierSum total;
  for (int k = 1; k <= fs.t_max(); ++k) {
    const double m = 0.5 * fs.slice_weight(k);
    out.slice_masses[static_cast<std::size_t>(k - 1)] = m;
    total.add(m);
  }
  out.sigma2 = total.value();
  return out;
}

AsymptoticCovariance covariance_asymptotic(const FrequencySet& fs, double delta, int k, int l) {
  if (!(1 <= k && k < l && l <= fs.t_max())) {
    throw DomainError("covariance_asymptotic: need 1 <= k < l <= t_max");
  }
  AsymptoticCovariance out;
  out.exact = restricted_covariance(fs, delta, k, l);
  const double d = std::fabs(delta);
  if (d < std::exp(-static_cast<double>(l))) {
    out.regime = CovarianceRegime::kNear;
    out.prediction = 0.5 * static_cast<double>(l - k);
    out.scale = std::exp(2.0 * l) * d * d;
  } else if (d > std::exp(-static_cast<double>(k))) {
    out.regime = CovarianceRegime::kFar;
    out.prediction = 0.0;
    out.scale = std::exp(-static_cast<double>(k)) / d;
  } else {
    out.regime = CovarianceRegime::kMixed;
    return out;
  }
  out.implied_constant = out.scale > 0.0 ? std::fabs(out.exact - out.prediction) / out.scale : 0.0;
  return out;
}

namespace {

constexpr char kMagic[8] = {'Z', 'L', 'F', 'S', 'E', 'T', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void put_array(std::ostream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ValidationError("frequency file truncated");
  return v;
}

template <typename T>
std::vector<T> get_array(std::istream& in, std::size_t n) {
  std::vector<T> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) throw ValidationError("frequency file truncated");
  return v;
}

}  // namespace

void write_binary(const FrequencySet& fs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResourceError("cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(fs.mode()));
  put(out, static_cast<std::uint32_t>(fs.t_max()));
  put(out, static_cast<std::uint64_t>(fs.size()));
  put_array(out, fs.frequencies());
  put_array(out, fs.weights());
  put_array(out, fs.slices());
  if (!out) throw ResourceError("write failed for " + path.string());
}

FrequencySet read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError(path.string() + " is not a frequency-set file");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw ValidationError("unsupported frequency-set version " + std::to_string(version));
  const auto mode = get<std::uint32_t>(in);
  if (mode > 1) throw ValidationError("unknown frequency mode " + std::to_string(mode));
  const auto t_max = get<std::uint32_t>(in);
  const auto n = get<std::uint64_t>(in);
  auto x = get_array<double>(in, n);
  auto w = get_array<double>(in, n);
  auto k = get_array<std::int32_t>(in, n);
  return FrequencySet::from_atoms(static_cast<FrequencyMode>(mode), static_cast<int>(t_max), std::move(x),
                                  std::move(w), std::move(k));
}

void write_csv(const FrequencySet& fs, std::ostream& out) {
  out << "frequency,weight,slice\n";
  char buf[96];
  for (std::size_t i = 0; i < fs.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d\n", fs.frequencies()[i], fs.weights()[i], fs.slices()[i]);
    out << buf;
  }
}

}  // namespace zetalab
