#include "zetalab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "zetalab/error.hpp"

namespace zetalab {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool only_small_factors(std::size_t n) {
  for (std::size_t p : {2, 3, 5, 7}) {
    while (n % p == 0) n /= p;
  }
  return n == 1;
}

class FftBuffer {
 public:
  FftBuffer(std::size_t n, int sign) : n_(n) {
    data_ = fftw_alloc_complex(n);
    if (data_ == nullptr) throw ResourceError("fft buffer allocation failed for size " + std::to_string(n));
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), data_, data_, sign, FFTW_ESTIMATE);
    if (plan_ == nullptr) {
      fftw_free(data_);
      throw ResourceError("fft planning failed for size " + std::to_string(n));
    }
  }
  ~FftBuffer() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(data_);
  }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  fftw_complex* data() { return data_; }
  std::size_t size() const { return n_; }
  void execute() { fftw_execute(plan_); }
  void clear() { std::fill_n(reinterpret_cast<double*>(data_), 2 * n_, 0.0); }

 private:
  std::size_t n_;
  fftw_complex* data_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace

std::size_t fft_friendly_size(std::size_t minimum) {
  std::size_t n = std::max<std::size_t>(minimum, 1);
  while (!only_small_factors(n)) ++n;
  return n;
}

struct TrigSumSynthesizer::Plan {
  explicit Plan(std::size_t n) : buffer(n, FFTW_BACKWARD) {}
  FftBuffer buffer;
};

TrigSumSynthesizer::TrigSumSynthesizer(std::span<const double> frequencies, double origin, double spacing,
                                       std::size_t count, int spread_half_width)
    : count_(count), spread_(spread_half_width) {
  if (count == 0) throw DomainError("TrigSumSynthesizer: empty grid");
  if (!(spacing > 0.0)) throw DomainError("TrigSumSynthesizer: spacing must be positive");
  if (spread_ < 2) throw DomainError("TrigSumSynthesizer: spread half-width too small");
  if (count > (1ULL << 30)) throw ResourceError("TrigSumSynthesizer: grid too large for one transform");

  fine_ = fft_friendly_size(std::max<std::size_t>(2 * count, 4 * static_cast<std::size_t>(spread_)));
  const double m = static_cast<double>(count);
  const double r = static_cast<double>(fine_) / m;
  tau_ = std::numbers::pi * spread_ / (m * m * r * (r - 0.5));
  centre_mode_ = static_cast<std::ptrdiff_t>(count / 2);

  const double two_pi = 2.0 * std::numbers::pi;
  const double h = two_pi / static_cast<double>(fine_);
  const double centre = origin + static_cast<double>(centre_mode_) * spacing;
  const std::size_t n_atoms = frequencies.size();
  theta_.resize(n_atoms);
  anchor_.resize(n_atoms);
  e1_.resize(n_atoms);
  e2_.resize(n_atoms);
  phase_re_.resize(n_atoms);
  phase_im_.resize(n_atoms);
  for (std::size_t i = 0; i < n_atoms; ++i) {
    double th = std::fmod(spacing * frequencies[i], two_pi);
    if (th < 0.0) th += two_pi;
    auto k0 = static_cast<std::ptrdiff_t>(std::floor(th / h));
    k0 = std::clamp<std::ptrdiff_t>(k0, 0, static_cast<std::ptrdiff_t>(fine_) - 1);
    const double d = static_cast<double>(k0) * h - th;
    theta_[i] = th;
    anchor_[i] = k0;
    e1_[i] = std::exp(-d * d / (4.0 * tau_));
    e2_[i] = std::exp(-d * h / (2.0 * tau_));
    const double ph = frequencies[i] * centre;
    phase_re_[i] = std::cos(ph);
    phase_im_[i] = std::sin(ph);
  }
  e3_.resize(static_cast<std::size_t>(spread_) + 1);
  for (int j = 0; j <= spread_; ++j) e3_[static_cast<std::size_t>(j)] = std::exp(-(j * h) * (j * h) / (4.0 * tau_));

  deconv_.resize(count);
  const double scale = std::sqrt(std::numbers::pi / tau_) / static_cast<double>(fine_);
  for (std::size_t n = 0; n < count; ++n) {
    const double mode = static_cast<double>(static_cast<std::ptrdiff_t>(n) - centre_mode_);
    deconv_[n] = scale * std::exp(mode * mode * tau_);
  }
  plan_ = std::make_unique<Plan>(fine_);
}

TrigSumSynthesizer::~TrigSumSynthesizer() = default;

void TrigSumSynthesizer::evaluate(std::span<const double> re, std::span<const double> im, std::span<double> out) {
  if (re.size() != theta_.size() || im.size() != theta_.size()) {
    throw DomainError("TrigSumSynthesizer: coefficient count does not match frequencies");
  }
  if (out.size() < count_) throw DomainError("TrigSumSynthesizer: output span too short");
  FftBuffer& buf = plan_->buffer;
  buf.clear();
  fftw_complex* g = buf.data();
  const auto fine = static_cast<std::ptrdiff_t>(fine_);
  const int sp = spread_;

  for (std::size_t i = 0; i < theta_.size(); ++i) {
    // Coefficient with the grid-centre phase folded in.
    const double cr = re[i] * phase_re_[i] - im[i] * phase_im_[i];
    const double ci = re[i] * phase_im_[i] + im[i] * phase_re_[i];
    const std::ptrdiff_t k0 = anchor_[i];
    const double e1 = e1_[i];
    const double e2 = e2_[i];
    const double e2inv = 1.0 / e2;
    const bool wraps = k0 - sp + 1 < 0 || k0 + sp >= fine;
    double up = e1;
    double down = e1 * e2inv;
    if (!wraps) {
      for (int j = 0; j <= sp; ++j) {
        const double v = up * e3_[static_cast<std::size_t>(j)];
        g[k0 + j][0] += cr * v;
        g[k0 + j][1] += ci * v;
        up *= e2;
      }
      for (int j = 1; j < sp; ++j) {
        const double v = down * e3_[static_cast<std::size_t>(j)];
        g[k0 - j][0] += cr * v;
        g[k0 - j][1] += ci * v;
        down *= e2inv;
      }
    } else {
      for (int j = 0; j <= sp; ++j) {
        const double v = up * e3_[static_cast<std::size_t>(j)];
        const std::ptrdiff_t k = ((k0 + j) % fine + fine) % fine;
        g[k][0] += cr * v;
        g[k][1] += ci * v;
        up *= e2;
      }
      for (int j = 1; j < sp; ++j) {
        const double v = down * e3_[static_cast<std::size_t>(j)];
        const std::ptrdiff_t k = ((k0 - j) % fine + fine) % fine;
        g[k][0] += cr * v;
        g[k][1] += ci * v;
        down *= e2inv;
      }
    }
  }
  buf.execute();
  for (std::size_t n = 0; n < count_; ++n) {
    std::ptrdiff_t mode = static_cast<std::ptrdiff_t>(n) - centre_mode_;
    if (mode < 0) mode += fine;
    out[n] = deconv_[n] * g[mode][0];
  }
}

CirculantEmbedding::CirculantEmbedding(std::size_t n, const std::function<double(std::size_t)>& cov,
                                       int max_doublings, double tolerance)
    : n_(n) {
  if (n < 2) throw DomainError("CirculantEmbedding: need at least two points");
  std::size_t m = 2 * (n - 1);
  for (int attempt = 0; attempt <= max_doublings; ++attempt, m *= 2) {
    FftBuffer buf(m, FFTW_FORWARD);
    fftw_complex* d = buf.data();
    for (std::size_t k = 0; k < m; ++k) {
      d[k][0] = cov(std::min(k, m - k));
      d[k][1] = 0.0;
    }
    buf.execute();
    double lo = d[0][0];
    double hi = d[0][0];
    for (std::size_t k = 0; k < m; ++k) {
      lo = std::min(lo, d[k][0]);
      hi = std::max(hi, d[k][0]);
    }
    min_ratio_ = hi > 0.0 ? lo / hi : -1.0;
    if (hi > 0.0 && lo >= -tolerance * hi) {
      m_ = m;
      eigenvalues_.resize(m);
      for (std::size_t k = 0; k < m; ++k) eigenvalues_[k] = std::max(0.0, d[k][0]);
      return;
    }
  }
  throw NonEmbeddableError("circulant embedding has negative eigenvalues (min/max " + std::to_string(min_ratio_) +
                               ") after " + std::to_string(max_doublings) + " doublings",
                           min_ratio_);
}

std::vector<double> CirculantEmbedding::reconstructed_covariance() const {
  FftBuffer buf(m_, FFTW_BACKWARD);
  fftw_complex* d = buf.data();
  for (std::size_t k = 0; k < m_; ++k) {
    d[k][0] = eigenvalues_[k] / static_cast<double>(m_);
    d[k][1] = 0.0;
  }
  buf.execute();
  std::vector<double> out(n_);
  for (std::size_t k = 0; k < n_; ++k) out[k] = d[k][0];
  return out;
}

std::vector<double> CirculantEmbedding::sample(RngStream& rng) const {
  FftBuffer buf(m_, FFTW_FORWARD);
  fftw_complex* d = buf.data();
  const double inv_m = 1.0 / static_cast<double>(m_);
  for (std::size_t k = 0; k < m_; ++k) {
    const double s = std::sqrt(eigenvalues_[k] * inv_m);
    d[k][0] = s * rng.normal();
    d[k][1] = s * rng.normal();
  }
  buf.execute();
  std::vector<double> out(n_);
  for (std::size_t k = 0; k < n_; ++k) out[k] = d[k][0];
  return out;
}

}  // namespace zetalab
