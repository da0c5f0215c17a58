#ifndef ZSRG_RNG_HPP
#define ZSRG_RNG_HPP

#include <cstdint>
#include <string_view>

namespace zsrg {

// SplitMix64. Self-contained so that streams are identical across
// platforms and standard libraries; all consumers draw integers only.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform draw in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t next_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

  // Bernoulli with probability given in millionths (integer draw only).
  bool chance_millionths(std::uint64_t p) { return next_below(1000000) < p; }

 private:
  std::uint64_t state_;
};

// Stable seed derivation for independent substreams (per category, per
// sampling stage). FNV-1a over the tag folded into the base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ base;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  // one SplitMix64 scramble so nearby bases do not give nearby streams
  return SplitMix64(h).next();
}

}  // namespace zsrg

#endif  // ZSRG_RNG_HPP
