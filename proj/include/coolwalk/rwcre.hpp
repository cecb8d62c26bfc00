#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "coolwalk/cooling.hpp"
#include "coolwalk/env_dist.hpp"
#include "coolwalk/error.hpp"
#include "coolwalk/parallel.hpp"
#include "coolwalk/variance_lookup.hpp"
#include "coolwalk/walk.hpp"

namespace coolwalk {

struct RwcreSample {
  std::int64_t n = 0;
  std::int64_t x = 0;
  std::vector<std::int64_t> per_block;  // block endpoints, when recorded
};

// One annealed sample of the composed walk: independent annealed endpoints
// over the effective increments, each with a fresh environment, all on the
// caller's stream.
inline RwcreSample simulate_x(const EnvDist& dist, const CoolingMap& map, std::int64_t n,
                              RngStream& rng, bool record_blocks = false) {
  if (n < 0) fail("bad_argument", "horizon must be >= 0");
  RwcreSample out;
  out.n = n;
  EnvBuffers env;
  for (const std::int64_t T : map.effective_increments(n)) {
    const std::int64_t z = detail::annealed_endpoint(dist, T, rng, env, nullptr);
    out.x += z;
    if (record_blocks) out.per_block.push_back(z);
  }
  return out;
}

inline std::vector<std::int64_t> mc_x_endpoints(const EnvDist& dist, const CoolingMap& map,
                                                std::int64_t n, std::int64_t replicas,
                                                std::uint64_t seed,
                                                int threads = default_threads()) {
  const auto blocks = map.effective_increments(n);
  std::vector<std::int64_t> x(static_cast<std::size_t>(replicas));
  const detail::SiteSampler sampler(dist);
  for_each_block(replicas, kDefaultBlockSize, threads,
                 [&](std::int64_t, std::int64_t begin, std::int64_t end) {
                   EnvBuffers env;
                   for (std::int64_t r = begin; r < end; ++r) {
                     RngStream rng = derive_stream(seed, static_cast<std::uint64_t>(r));
                     std::int64_t acc = 0;
                     for (const std::int64_t T : blocks) {
                       acc += detail::annealed_endpoint(sampler, T, rng, env, nullptr);
                     }
                     x[static_cast<std::size_t>(r)] = acc;
                   }
                 });
  return x;
}

struct XStats {
  MomentEstimate moments;
  double independence_variance = 0.0;  // sum over blocks of Var(Z_{T_{k,n}})
};

inline MomentEstimate moments_of_i64(const std::vector<std::int64_t>& x, std::int64_t n,
                                     std::uint64_t seed) {
  MomentEstimate est;
  est.n = n;
  est.replicas = static_cast<std::int64_t>(x.size());
  est.seed = seed;
  if (x.empty()) return est;
  __int128 s1 = 0;
  long double s2 = 0.0L, s3 = 0.0L, s4 = 0.0L;
  for (const std::int64_t v : x) {
    const long double d = static_cast<long double>(v);
    s1 += v;
    s2 += d * d;
    s3 += d * d * d;
    s4 += d * d * d * d;
  }
  const long double R = static_cast<long double>(x.size());
  const double m1 = static_cast<double>(static_cast<long double>(s1) / R);
  const double m2 = static_cast<double>(s2 / R);
  const double m3 = static_cast<double>(s3 / R);
  const double m4 = static_cast<double>(s4 / R);
  est.mean = m1;
  est.second_moment = m2;
  const double var_b = std::max(0.0, m2 - m1 * m1);
  est.variance = x.size() > 1 ? var_b * static_cast<double>(x.size()) /
                                    static_cast<double>(x.size() - 1)
                              : 0.0;
  est.stderr_mean = std::sqrt(var_b / static_cast<double>(x.size()));
  const double c4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1 * m1 * m1 * m1;
  est.stderr_var =
      std::sqrt(std::max(0.0, c4 - var_b * var_b) / static_cast<double>(x.size()));
  return est;
}

// Sample moments of X_n plus the block-independence variance identity
// Var(X_n) = sum_k Var(Z_{T_{k,n}}), evaluated through the lookup.
inline XStats mc_stats_x(const EnvDist& dist, const CoolingMap& map, std::int64_t n,
                         std::int64_t replicas, std::uint64_t seed, VarianceLookup& lookup,
                         int threads = default_threads()) {
  if (replicas < 2) fail("bad_argument", "need at least two replicas");
  XStats out;
  out.moments = moments_of_i64(mc_x_endpoints(dist, map, n, replicas, seed, threads), n, seed);
  for (const auto& [T, count] : map.increment_histogram(n)) {
    out.independence_variance += static_cast<double>(count) * lookup.variance(T);
  }
  return out;
}

enum class Scaling { kStdev, kCustom };

// (x_i - mean)/(scale * sd) with the sample's own mean and sd. With kCustom
// the divisor is additionally multiplied by beta. `smooth` dithers the
// integer endpoints uniformly over their lattice span before normalizing,
// for comparison against continuous reference laws.
inline std::vector<double> normalized_samples(const EnvDist& dist, const CoolingMap& map,
                                              std::int64_t n, std::int64_t replicas,
                                              std::uint64_t seed, Scaling scaling,
                                              double beta = 1.0,
                                              int threads = default_threads(),
                                              bool smooth = false) {
  const auto x = mc_x_endpoints(dist, map, n, replicas, seed, threads);
  const MomentEstimate est = moments_of_i64(x, n, seed);
  if (!(est.variance > 0.0)) fail("zero_variance", "normalization needs positive variance");
  const double scale = (scaling == Scaling::kCustom ? beta : 1.0) * std::sqrt(est.variance);
  if (!(scale > 0.0)) fail("zero_variance", "scale must be positive");
  std::vector<double> out(x.size());
  const std::uint64_t dither_seed = sub_seed(seed, 0x5eedu);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = static_cast<double>(x[i]);
    if (smooth) {
      RngStream rng = derive_stream(dither_seed, static_cast<std::uint64_t>(i));
      v += 2.0 * rng.uniform() - 1.0;  // endpoint lattice has span 2
    }
    out[i] = (v - est.mean) / scale;
  }
  return out;
}

}  // namespace coolwalk
