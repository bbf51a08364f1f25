#pragma once

#include <cstddef>
#include <cstdint>

namespace zetalab {

inline constexpr std::size_t kDefaultResourceCap = 100'000'000;

struct ExperimentOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::size_t max_points = kDefaultResourceCap;
};

}  // namespace zetalab
