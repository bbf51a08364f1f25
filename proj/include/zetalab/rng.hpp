#pragma once

// Counter-based random streams (Philox4x32-10).
//
// A stream is addressed by (master seed, replicate index, purpose). Two
// streams with different addresses never share a counter block, so results
// depend only on the address and never on which thread consumes the stream.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace zetalab {

/// Purpose tags separating independent streams of one replicate.
enum class StreamPurpose : std::uint32_t {
  kCoefficients = 1,
  kFrequencies = 2,
  kMixture = 3,
  kWalk = 4,
  kBridge = 5,
  kDense = 6,
  kBootstrap = 7,
  kBbmCopyBase = 1024,  // copy c of an ensemble uses kBbmCopyBase + c
};

struct SeedLineage {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate = 0;
};

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr, const std::array<std::uint32_t, 2>& key) {
  constexpr std::uint64_t kM0 = 0xD2511F53u;
  constexpr std::uint64_t kM1 = 0xCD9E8D57u;
  const std::uint64_t p0 = kM0 * ctr[0];
  const std::uint64_t p1 = kM1 * ctr[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace detail

/// The raw Philox4x32-10 bijection.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    detail::philox_round(ctr, key);
  }
  return ctr;
}

class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t master_seed, std::uint64_t replicate, std::uint32_t purpose)
      : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
        lineage_{master_seed, replicate},
        purpose_(purpose) {}

  RngStream(std::uint64_t master_seed, std::uint64_t replicate, StreamPurpose purpose)
      : RngStream(master_seed, replicate, static_cast<std::uint32_t>(purpose)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (buffered_ == 0) refill();
    return block_[4 - buffered_--];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    return (hi << 32) | lo;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal (Marsaglia polar method, second variate cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

  const SeedLineage& lineage() const { return lineage_; }
  std::uint32_t purpose() const { return purpose_; }
  std::uint64_t blocks_used() const { return block_index_; }

 private:
  void refill() {
    const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_index_), purpose_,
                                           static_cast<std::uint32_t>(lineage_.replicate),
                                           static_cast<std::uint32_t>(lineage_.replicate >> 32)};
    block_ = philox4x32_10(ctr, key_);
    buffered_ = 4;
    ++block_index_;
  }

  std::array<std::uint32_t, 2> key_;
  SeedLineage lineage_;
  std::uint32_t purpose_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int buffered_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace zetalab
