#include "zetalab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <ostream>

#include "zetalab/error.hpp"
#include "zetalab/numeric.hpp"
#include "zetalab/parallel.hpp"
#include "zetalab/spectral.hpp"

namespace zetalab {

std::string to_string(CoefficientLaw law) {
  return law == CoefficientLaw::kComplexGaussian ? "complex-gaussian" : "uniform-phase";
}

CoefficientLaw parse_coefficient_law(const std::string& name) {
  if (name == "complex-gaussian") return CoefficientLaw::kComplexGaussian;
  if (name == "uniform-phase") return CoefficientLaw::kUniformPhase;
  throw ValidationError("unknown coefficient law '" + name + "' (expected complex-gaussian or uniform-phase)");
}

WeightDraw sample_weights(const FrequencySet& fs, CoefficientLaw law, RngStream& rng) {
  if (fs.empty()) throw DomainError("sample_weights: empty frequency set");
  WeightDraw draw;
  draw.law = law;
  draw.lineage = rng.lineage();
  draw.re.resize(fs.size());
  draw.im.resize(fs.size());
  if (law == CoefficientLaw::kComplexGaussian) {
    const double s = std::numbers::sqrt2 / 2.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      draw.re[i] = s * rng.normal();
      draw.im[i] = s * rng.normal();
    }
  } else {
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const double angle = 2.0 * std::numbers::pi * rng.uniform();
      draw.re[i] = std::cos(angle);
      draw.im[i] = std::sin(angle);
    }
  }
  return draw;
}

double symmetric_grid_count(double half_width, double spacing) {
  return 2.0 * std::ceil(half_width / spacing) + 1.0;
}

Grid Grid::symmetric(double half_width, double spacing, std::size_t max_points) {
  if (!(half_width >= 0.0) || !(spacing > 0.0)) throw DomainError("Grid: need half_width >= 0 and spacing > 0");
  const double count = symmetric_grid_count(half_width, spacing);
  if (!(count <= static_cast<double>(max_points))) {
    throw ResourceError("grid of " + std::to_string(count) + " points exceeds the cap of " +
                        std::to_string(max_points));
  }
  const double k = std::ceil(half_width / spacing);
  return {-k * spacing, spacing, static_cast<std::size_t>(count)};
}

Grid Grid::uniform(double origin, double spacing, std::size_t count) {
  if (count == 0 || !(spacing > 0.0)) throw DomainError("Grid: need count >= 1 and spacing > 0");
  return {origin, spacing, count};
}

namespace {

void check_draw(const WeightDraw& draw, const FrequencySet& fs) {
  if (draw.re.size() != fs.size() || draw.im.size() != fs.size()) {
    throw DomainError("weight draw does not match the frequency set");
  }
}

void check_points(const Grid& grid, std::size_t max_points) {
  if (grid.count == 0) throw DomainError("grid has no points");
  if (grid.count > max_points) {
    throw ResourceError("grid of " + std::to_string(grid.count) + " points exceeds the cap of " +
                        std::to_string(max_points));
  }
}

void fill_partials(FieldSample& s) {
  const std::size_t n = s.grid.count;
  s.partials.resize(s.slices.size());
  for (std::size_t i = 0; i < n; ++i) s.partials[i] = s.slices[i];
  for (int k = 2; k <= s.slice_count; ++k) {
    const std::size_t off = static_cast<std::size_t>(k - 1) * n;
    for (std::size_t i = 0; i < n; ++i) s.partials[off + i] = s.partials[off - n + i] + s.slices[off + i];
  }
}

}  // namespace

FieldSample evaluate_field(const WeightDraw& draw, const FrequencySet& fs, const Grid& grid, bool with_slices,
                           const FieldOptions& options) {
  check_draw(draw, fs);
  check_points(grid, options.max_points);
  FieldSample out;
  out.grid = grid;
  out.values.resize(grid.count);
  const int t = fs.t_max();
  if (with_slices) {
    out.slice_count = t;
    out.slices.assign(static_cast<std::size_t>(t) * grid.count, 0.0);
  }
  std::vector<double> sqrt_w(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) sqrt_w[i] = std::sqrt(fs.weights()[i]);
  const auto& x = fs.frequencies();

  constexpr std::size_t kBlock = 64;
  const std::size_t blocks = (grid.count + kBlock - 1) / kBlock;
  parallel_for(blocks, options.threads, [&](std::size_t b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(grid.count, lo + kBlock);
    for (std::size_t n = lo; n < hi; ++n) {
      const double h = grid.point(n);
      NeumaierSum total;
      for (int k = 1; k <= t; ++k) {
        const auto [ab, ae] = fs.slice_range(k);
        NeumaierSum slice;
        for (std::size_t i = ab; i < ae; ++i) {
          const double ph = h * x[i];
          slice.add(sqrt_w[i] * (draw.re[i] * std::cos(ph) + draw.im[i] * std::sin(ph)));
        }
        const double y = slice.value();
        if (with_slices) out.slices[static_cast<std::size_t>(k - 1) * grid.count + n] = y;
        total.add(y);
      }
      out.values[n] = total.value();
    }
  });
  if (with_slices) fill_partials(out);
  return out;
}

double evaluate_point(const WeightDraw& draw, const FrequencySet& fs, double h) {
  check_draw(draw, fs);
  const auto& x = fs.frequencies();
  const auto& w = fs.weights();
  NeumaierSum s;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const double ph = h * x[i];
    s.add(std::sqrt(w[i]) * (draw.re[i] * std::cos(ph) + draw.im[i] * std::sin(ph)));
  }
  return s.value();
}

std::vector<double> partial_sums_at(const WeightDraw& draw, const FrequencySet& fs, double h) {
  check_draw(draw, fs);
  const auto& x = fs.frequencies();
  const auto& w = fs.weights();
  std::vector<double> out(static_cast<std::size_t>(fs.t_max()));
  double running = 0.0;
  for (int k = 1; k <= fs.t_max(); ++k) {
    const auto [b, e] = fs.slice_range(k);
    NeumaierSum s;
    for (std::size_t i = b; i < e; ++i) {
      const double ph = h * x[i];
      s.add(std::sqrt(w[i]) * (draw.re[i] * std::cos(ph) + draw.im[i] * std::sin(ph)));
    }
    running += s.value();
    out[static_cast<std::size_t>(k - 1)] = running;
  }
  return out;
}

struct FastFieldEvaluator::Impl {
  bool with_slices = false;
  int t = 0;
  std::vector<double> sqrt_w;
  // One synthesizer per slice (with_slices) or a single one over all atoms.
  std::vector<std::unique_ptr<TrigSumSynthesizer>> parts;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::vector<double> cre;
  std::vector<double> cim;
};

FastFieldEvaluator::FastFieldEvaluator(const FrequencySet& fs, const Grid& grid, bool with_slices,
                                       std::size_t max_points)
    : grid_(grid), impl_(std::make_unique<Impl>()) {
  if (fs.empty()) throw DomainError("FastFieldEvaluator: empty frequency set");
  check_points(grid, max_points);
  impl_->with_slices = with_slices;
  impl_->t = fs.t_max();
  impl_->sqrt_w.resize(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) impl_->sqrt_w[i] = std::sqrt(fs.weights()[i]);
  impl_->cre.resize(fs.size());
  impl_->cim.resize(fs.size());
  const std::span<const double> x(fs.frequencies());
  if (with_slices) {
    for (int k = 1; k <= fs.t_max(); ++k) {
      const auto r = fs.slice_range(k);
      impl_->ranges.push_back(r);
      if (r.second > r.first) {
        impl_->parts.push_back(std::make_unique<TrigSumSynthesizer>(x.subspan(r.first, r.second - r.first),
                                                                    grid.origin, grid.spacing, grid.count));
      } else {
        impl_->parts.push_back(nullptr);
      }
    }
  } else {
    impl_->ranges.emplace_back(0, fs.size());
    impl_->parts.push_back(std::make_unique<TrigSumSynthesizer>(x, grid.origin, grid.spacing, grid.count));
  }
}

FastFieldEvaluator::~FastFieldEvaluator() = default;

namespace {

// X = Re sum sqrt(w) (a - i b) exp(i h x).
void fill_coefficients(const WeightDraw& draw, const std::vector<double>& sqrt_w, std::vector<double>& cre,
                       std::vector<double>& cim) {
  for (std::size_t i = 0; i < sqrt_w.size(); ++i) {
    cre[i] = sqrt_w[i] * draw.re[i];
    cim[i] = -sqrt_w[i] * draw.im[i];
  }
}

}  // namespace

void FastFieldEvaluator::evaluate_values(const WeightDraw& draw, std::vector<double>& values) {
  if (draw.re.size() != impl_->sqrt_w.size()) throw DomainError("weight draw does not match the frequency set");
  fill_coefficients(draw, impl_->sqrt_w, impl_->cre, impl_->cim);
  values.assign(grid_.count, 0.0);
  if (!impl_->with_slices) {
    impl_->parts.front()->evaluate(impl_->cre, impl_->cim, values);
    return;
  }
  std::vector<double> part(grid_.count);
  for (std::size_t k = 0; k < impl_->parts.size(); ++k) {
    if (!impl_->parts[k]) continue;
    const auto [b, e] = impl_->ranges[k];
    impl_->parts[k]->evaluate(std::span<const double>(impl_->cre).subspan(b, e - b),
                              std::span<const double>(impl_->cim).subspan(b, e - b), part);
    for (std::size_t n = 0; n < grid_.count; ++n) values[n] += part[n];
  }
}

FieldSample FastFieldEvaluator::evaluate(const WeightDraw& draw) {
  if (draw.re.size() != impl_->sqrt_w.size()) throw DomainError("weight draw does not match the frequency set");
  FieldSample out;
  out.grid = grid_;
  if (!impl_->with_slices) {
    evaluate_values(draw, out.values);
    return out;
  }
  fill_coefficients(draw, impl_->sqrt_w, impl_->cre, impl_->cim);
  const std::size_t n = grid_.count;
  out.slice_count = impl_->t;
  out.slices.assign(static_cast<std::size_t>(impl_->t) * n, 0.0);
  for (std::size_t k = 0; k < impl_->parts.size(); ++k) {
    if (!impl_->parts[k]) continue;
    const auto [b, e] = impl_->ranges[k];
    impl_->parts[k]->evaluate(std::span<const double>(impl_->cre).subspan(b, e - b),
                              std::span<const double>(impl_->cim).subspan(b, e - b),
                              std::span<double>(out.slices).subspan(k * n, n));
  }
  fill_partials(out);
  out.values.assign(out.partials.end() - static_cast<std::ptrdiff_t>(n), out.partials.end());
  return out;
}

FieldSample sample_stationary(const FrequencySet& fs, const Grid& grid, CoefficientLaw law, RngStream& rng,
                              bool with_slices, std::size_t max_points) {
  FastFieldEvaluator eval(fs, grid, with_slices, max_points);
  return eval.evaluate(sample_weights(fs, law, rng));
}

std::vector<double> stationary_covariance_sequence(const FrequencySet& fs, double spacing, std::size_t count) {
  if (fs.empty()) throw DomainError("stationary_covariance_sequence: empty frequency set");
  TrigSumSynthesizer synth(fs.frequencies(), 0.0, spacing, count);
  std::vector<double> re(fs.size());
  std::vector<double> im(fs.size(), 0.0);
  for (std::size_t i = 0; i < fs.size(); ++i) re[i] = 0.5 * fs.weights()[i];
  std::vector<double> out(count);
  synth.evaluate(re, im, out);
  return out;
}

Eigen::MatrixXd covariance_matrix(const FrequencySet& fs, const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.count);
  std::vector<double> lag(grid.count);
  for (std::size_t d = 0; d < grid.count; ++d) lag[d] = covariance(fs, static_cast<double>(d) * grid.spacing);
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) c(i, j) = lag[static_cast<std::size_t>(std::abs(i - j))];
  }
  return c;
}

DenseGaussianSampler::DenseGaussianSampler(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) throw DomainError("DenseGaussianSampler: need a square matrix");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NonConvergenceError("DenseGaussianSampler: eigensolver failed");
  Eigen::VectorXd root = eig.eigenvalues();
  for (Eigen::Index i = 0; i < root.size(); ++i) {
    if (root(i) < 0.0) {
      clipped_ += -root(i);
      root(i) = 0.0;
    }
    root(i) = std::sqrt(root(i));
  }
  factor_ = eig.eigenvectors() * root.asDiagonal();
}

Eigen::VectorXd DenseGaussianSampler::sample(RngStream& rng) const {
  Eigen::VectorXd z(factor_.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return factor_ * z;
}

Eigen::MatrixXd DenseGaussianSampler::sample_columns(std::size_t count, RngStream& rng) const {
  Eigen::MatrixXd z(factor_.cols(), static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, c) = rng.normal();
  }
  return factor_ * z;
}

double log_laplace_transform(const FrequencySet& fs, const TiltSpec& spec) {
  const double l1 = spec.lambda;
  const double l2 = spec.lambda2;
  const double d = std::fabs(spec.h - spec.h2);
  const auto& x = fs.frequencies();
  const auto& w = fs.weights();
  NeumaierSum s;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    s.add(0.25 * w[i] * (l1 * l1 + l2 * l2 + 2.0 * l1 * l2 * std::cos(d * x[i])));
  }
  return s.value();
}

Tilt make_tilt(const TiltSpec& spec, const FrequencySet& fs) {
  if (!(spec.lambda >= 0.0) || !(spec.lambda2 >= 0.0)) throw DomainError("tilt strengths must be nonnegative");
  Tilt tilt;
  tilt.spec = spec;
  tilt.shift_re.resize(fs.size());
  tilt.shift_im.resize(fs.size());
  const auto& x = fs.frequencies();
  const auto& w = fs.weights();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const double half_root = 0.5 * std::sqrt(w[i]);
    const double p1 = spec.h * x[i];
    const double p2 = spec.h2 * x[i];
    tilt.shift_re[i] = half_root * (spec.lambda * std::cos(p1) + spec.lambda2 * std::cos(p2));
    tilt.shift_im[i] = half_root * (spec.lambda * std::sin(p1) + spec.lambda2 * std::sin(p2));
  }
  tilt.log_normalizer = log_laplace_transform(fs, spec);
  return tilt;
}

WeightDraw apply_tilt(const Tilt& tilt, const FrequencySet& fs, RngStream& rng) {
  if (tilt.shift_re.size() != fs.size()) throw DomainError("apply_tilt: tilt built for another frequency set");
  WeightDraw draw = sample_weights(fs, CoefficientLaw::kComplexGaussian, rng);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    draw.re[i] += tilt.shift_re[i];
    draw.im[i] += tilt.shift_im[i];
  }
  draw.shift_re = tilt.shift_re;
  draw.shift_im = tilt.shift_im;
  return draw;
}

double tilted_mean(const FrequencySet& fs, const TiltSpec& spec, double at) {
  const auto& x = fs.frequencies();
  const auto& w = fs.weights();
  NeumaierSum s;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    s.add(0.5 * w[i] *
          (spec.lambda * std::cos((at - spec.h) * x[i]) + spec.lambda2 * std::cos((at - spec.h2) * x[i])));
  }
  return s.value();
}

void write_field_csv(const FieldSample& sample, std::ostream& out) {
  out << "h,X";
  for (int j = 1; j <= sample.slice_count; ++j) out << ",S_" << j;
  out << '\n';
  char buf[64];
  for (std::size_t n = 0; n < sample.grid.count; ++n) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", sample.grid.point(n), sample.values[n]);
    out << buf;
    for (int j = 1; j <= sample.slice_count; ++j) {
      std::snprintf(buf, sizeof(buf), ",%.17g", sample.partial(j, n));
      out << buf;
    }
    out << '\n';
  }
}

namespace {

constexpr char kFieldMagic[8] = {'Z', 'L', 'F', 'I', 'E', 'L', 'D', '\0'};
constexpr std::uint32_t kFieldVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ValidationError("field file truncated");
  return v;
}

void put_doubles(std::ostream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_doubles(std::istream& in, std::size_t n) {
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ValidationError("field file truncated");
  return v;
}

}  // namespace

void write_field_binary(const FieldSample& sample, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResourceError("cannot open " + path.string() + " for writing");
  out.write(kFieldMagic, sizeof(kFieldMagic));
  put(out, kFieldVersion);
  put(out, static_cast<std::uint32_t>(sample.slice_count));
  put(out, static_cast<std::uint64_t>(sample.grid.count));
  put(out, sample.grid.origin);
  put(out, sample.grid.spacing);
  put_doubles(out, sample.values);
  put_doubles(out, sample.slices);
  if (!out) throw ResourceError("write failed for " + path.string());
}

FieldSample read_field_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kFieldMagic, sizeof(magic)) != 0) {
    throw ValidationError(path.string() + " is not a field file");
  }
  if (get<std::uint32_t>(in) != kFieldVersion) throw ValidationError("unsupported field file version");
  FieldSample s;
  s.slice_count = static_cast<int>(get<std::uint32_t>(in));
  s.grid.count = get<std::uint64_t>(in);
  s.grid.origin = get<double>(in);
  s.grid.spacing = get<double>(in);
  s.values = get_doubles(in, s.grid.count);
  s.slices = get_doubles(in, static_cast<std::size_t>(s.slice_count) * s.grid.count);
  if (s.slice_count > 0) fill_partials(s);
  return s;
}

}  // namespace zetalab
