#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace xmcnn {

// splitmix64 mixer (Steele, Lea, Flood 2014). Used to derive independent
// sub-stream seeds from one user-facing seed so that, e.g., modality 2's
// draws do not depend on how many values modality 1 consumed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t deriveSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  (void)splitmix64(s);
  s ^= 0x632be59bd9b4e019ULL * (stream + 1);
  std::uint64_t out = splitmix64(s);
  return out ? out : 0x9e3779b97f4a7c15ULL;
}

// Deterministic RNG: std::mt19937_64 (bit-exact by the standard) plus
// hand-rolled distributions, since the std:: distributions are
// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1): top 53 bits of the raw draw.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  // Inclusive [lo, hi] via 128-bit multiply-high range reduction.
  std::int64_t uniformInt(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1u;
    const auto scaled = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * span) >> 64);
    return lo + static_cast<std::int64_t>(scaled);
  }

  // Standard normal via Box-Muller; consumes exactly two uniforms per value
  // (no cached spare, so the consumption pattern is position-independent).
  double gaussian() {
    const double u1 = 1.0 - uniform01();  // (0, 1]; keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace xmcnn
