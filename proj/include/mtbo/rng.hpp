#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mtbo {

// splitmix64 step; used only for deriving stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent seed from (seed, stream, salt). Streams let every
// dispatch index / task / purpose own a reproducible generator regardless of
// scheduling order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t salt = 0) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s += stream;
  h ^= splitmix64(s);
  s += salt;
  h ^= splitmix64(s);
  return h;
}

// Stream salts. Keeping them distinct means the selection logic, latency
// model, observation noise and policy extraction never share draws.
inline constexpr std::uint64_t kSaltSelect = 0x5e1ec7ULL;
inline constexpr std::uint64_t kSaltLatency = 0x1a7e9cULL;
inline constexpr std::uint64_t kSaltNoise = 0x9015eULL;
inline constexpr std::uint64_t kSaltPolicy = 0x90011cULL;
inline constexpr std::uint64_t kSaltTruth = 0x7271aULL;
inline constexpr std::uint64_t kSaltFit = 0xf17f17ULL;
inline constexpr std::uint64_t kSaltDesign = 0xde519ULL;

// Deterministic generator with portable output. Normal draws avoid
// std::normal_distribution so the exact sequence is implementation
// independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  int uniform_int(int n) {
    const auto wide =
        static_cast<unsigned __int128>(eng_()) * static_cast<unsigned __int128>(n);
    return static_cast<int>(wide >> 64);
  }

  // Box-Muller without caching; consumes exactly two uniforms per draw.
  double normal() {
    const double u1 = std::max(uniform(), 0x1.0p-53);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 eng_;
};

inline Rng make_stream(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t salt = 0) {
  return Rng(mix_seed(seed, stream, salt));
}

}  // namespace mtbo
