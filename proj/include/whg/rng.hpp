#pragma once

#include <cstdint>
#include <random>

namespace whg {

// splitmix64 finalizer; used to derive independent per-trial streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic RNG wrapper.  All bounded draws go through rejection
// sampling on raw mt19937_64 output, so sequences are identical across
// platforms (std::uniform_int_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform integer in [0, bound), bound >= 1.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t r = eng_();
    while (r >= limit) r = eng_();
    return r % bound;
  }

  // Uniform in [0,1) with 53 bits; for sampling from numeric weights.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  static std::uint64_t derive(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x51ed2701u));
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace whg
