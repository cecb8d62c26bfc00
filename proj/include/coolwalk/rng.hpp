#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace coolwalk {

// SplitMix64 step; used as a seed expander and (key, counter) mixer.
inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) { return splitmix64(x); }

// SplitMix64 stream with a per-stream gamma: output m is the mix of
// state0 + m * gamma, a pure counter-based function of (master_seed, stream
// index). Distinct indices get distinct gammas (the SplittableRandom split
// construction), so replica k sees the same stream no matter which thread
// runs it.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t s = master_seed;
    (void)splitmix64(s);
    s ^= 0xbf58476d1ce4e5b9ull * (stream_index + 1);
    state_ = splitmix64(s);
    s ^= stream_index;
    std::uint64_t g = splitmix64(s) | 1ull;
    // require enough bit transitions in the gamma (SplittableRandom fixup)
    if (__builtin_popcountll(g ^ (g >> 1)) < 24) g ^= 0xaaaaaaaaaaaaaaaaull;
    gamma_ = g;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += gamma_);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform on [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0,1), safe for log/tan
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential() { return -std::log(uniform_open()); }

  // Marsaglia polar method, one value cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform_open() - 1.0;
      v = 2.0 * uniform_open() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // Marsaglia-Tsang; shape > 0, unit scale.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform_open();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t gamma_ = 0x9e3779b97f4a7c15ull;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Counter-style stream derivation: a pure function of (seed, index), identical
// across platforms and thread counts.
inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t replica_index) {
  return RngStream(master_seed, replica_index);
}

// Namespaced sub-seed, e.g. one seed per lattice size in a lookup table.
inline std::uint64_t sub_seed(std::uint64_t master_seed, std::uint64_t tag) {
  std::uint64_t s = master_seed ^ (0x94d049bb133111ebull * (tag + 1));
  return splitmix64(s);
}

}  // namespace coolwalk
