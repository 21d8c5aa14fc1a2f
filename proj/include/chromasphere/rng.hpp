#pragma once

#include <cstdint>
#include <random>

namespace chromasphere {

/// splitmix64 mixing step; good avalanche, used only to derive seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic substream of a master seed. Stream (seed, i) and stream
/// (seed, j) are statistically independent for i != j, so work items can be
/// distributed over threads in any order without changing any result.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : eng_(derive(seed, stream)) {}

  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^
                      splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
  }

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1). Mapped from the top 53 bits so the value does not
  /// depend on the standard library's distribution implementation.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace chromasphere
