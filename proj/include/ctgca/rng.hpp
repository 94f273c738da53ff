#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

namespace ctgca::rng {

// All randomness in the library flows through these routines so that results
// are bit-identical across platforms and thread counts. std::mt19937 would be
// portable too, but the distributions on top of it are not, so both the
// generator and every distribution here are spelled out.

inline constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Finalizer of splitmix64 (Steele, Lea, Flood 2014): bijective 64-bit scramble.
inline uint64_t mix_bits(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Stateless per-index hash: stream i of a master seed. Used for per-voxel and
// per-scan substreams so parallel evaluation order cannot change results.
inline uint64_t mix(uint64_t seed, uint64_t i) {
  return mix_bits(seed + (i + 1) * kGolden);
}

// Maps 64 random bits to a double in [0, 1) with 53-bit resolution.
inline double to_unit(uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two hashed uniforms (counter-based, no
// state). Returns only the cosine branch; callers burn two indices per draw.
inline double gauss(uint64_t seed, uint64_t i) {
  double u1 = to_unit(mix(seed, 2 * i));
  double u2 = to_unit(mix(seed, 2 * i + 1));
  if (u1 <= 0.0) u1 = 0x1.0p-53;  // guard log(0)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// Sequential splitmix64 engine for the few places that need an ordered stream
// (dataset shuffles, cohort covariates).
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += kGolden;
    return mix_bits(state_);
  }

  double unit() { return to_unit(next()); }

  // Unbiased draw in [0, n) by rejection from the top of the range.
  uint64_t below(uint64_t n) {
    const uint64_t limit = n * ((~uint64_t{0}) / n);
    uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = unit();
    double u2 = unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925287 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates shuffle driven by a SplitMix64 engine.
template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& g) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(g.below(i));
    if (j != i - 1) std::swap(v[i - 1], v[j]);
  }
}

}  // namespace ctgca::rng
