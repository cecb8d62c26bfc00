#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <variant>
#include <vector>

#include "coolwalk/env_dist.hpp"
#include "coolwalk/error.hpp"
#include "coolwalk/parallel.hpp"
#include "coolwalk/rng.hpp"

namespace coolwalk {

struct WalkOutcome {
  std::int64_t n = 0;
  std::int64_t z = 0;
  std::vector<std::int32_t> path;  // positions, length n+1 when recorded
};

// Reusable per-thread site storage: one flat array indexed by x + center.
// Because the walk is nearest-neighbour from 0, the visited set is always an
// interval [lo, hi]; cells outside it are stale and never read, so replicas
// reuse the allocation without clearing.
struct EnvBuffers {
  std::vector<double> flat;
  std::int64_t center = 0;

  void ensure(std::int64_t n) {
    const std::int64_t need = 2 * n + 3;
    if (static_cast<std::int64_t>(flat.size()) < need) {
      flat.resize(static_cast<std::size_t>(need));
      center = n + 1;
    }
  }
};

namespace detail {

// Site sampler with the family dispatch hoisted out of the step loop.
class SiteSampler {
 public:
  explicit SiteSampler(const EnvDist& dist) {
    if (const auto* tp = std::get_if<TwoPoint>(&dist.family())) {
      kind_ = Kind::kTwoPoint;
      hi_ = tp->omega_hi;
      lo_ = tp->omega_lo;
      p_ = tp->p;
    } else if (const auto* bl = std::get_if<BetaLaw>(&dist.family())) {
      kind_ = Kind::kBeta;
      a_ = bl->a;
      b_ = bl->b;
    } else {
      kind_ = Kind::kDiscrete;
      disc_ = &std::get<Discrete>(dist.family());
    }
  }

  double operator()(RngStream& rng) const {
    switch (kind_) {
      case Kind::kTwoPoint:
        return rng.uniform() < p_ ? hi_ : lo_;
      case Kind::kBeta:
        return rng.beta(a_, b_);
      default: {
        double u = rng.uniform();
        for (std::size_t i = 0; i + 1 < disc_->omega.size(); ++i) {
          if (u < disc_->prob[i]) return disc_->omega[i];
          u -= disc_->prob[i];
        }
        return disc_->omega.back();
      }
    }
  }

 private:
  enum class Kind { kTwoPoint, kBeta, kDiscrete };
  Kind kind_ = Kind::kTwoPoint;
  double hi_ = 0.5, lo_ = 0.5, p_ = 1.0, a_ = 1.0, b_ = 1.0;
  const Discrete* disc_ = nullptr;
};

// One annealed endpoint. Sites are drawn from `rng` on first visit and cached
// for revisits, so environment and step randomness share the stream. The
// visited set of a nearest-neighbour walk is an interval, so materialization
// is a push_back at whichever edge the walk crosses.
inline std::int64_t annealed_endpoint(const SiteSampler& sample, std::int64_t n,
                                      RngStream& rng, EnvBuffers& env,
                                      std::vector<std::int32_t>* path) {
  if (n <= 0) {
    if (path) path->assign(1, 0);
    return 0;
  }
  env.ensure(n);
  double* sites = env.flat.data() + env.center;
  std::int64_t x = 0;
  std::int64_t lo = 0, hi = 0;
  sites[0] = sample(rng);
  if (path) {
    path->clear();
    path->reserve(static_cast<std::size_t>(n) + 1);
    path->push_back(0);
  }
  for (std::int64_t i = 0; i < n; ++i) {
    if (x > hi) {
      sites[x] = sample(rng);
      hi = x;
    } else if (x < lo) {
      sites[x] = sample(rng);
      lo = x;
    }
    const double diff = sites[x] - rng.uniform();
    x += 1 - 2 * static_cast<std::int64_t>(std::signbit(diff));
    if (path) path->push_back(static_cast<std::int32_t>(x));
  }
  return x;
}

inline std::int64_t annealed_endpoint(const EnvDist& dist, std::int64_t n, RngStream& rng,
                                      EnvBuffers& env, std::vector<std::int32_t>* path) {
  return annealed_endpoint(SiteSampler(dist), n, rng, env, path);
}

// W independent replicas advanced in lockstep. Each lane owns its stream and
// site buffer, so the draws per replica are exactly those of the single-lane
// version; interleaving only overlaps the memory/compare latency.
template <int W>
inline void endpoint_lanes(const SiteSampler& sample, std::int64_t n, RngStream* rng,
                           EnvBuffers* env, std::int64_t* out) {
  double* sites[W];
  std::int64_t x[W], lo[W], hi[W];
  for (int w = 0; w < W; ++w) {
    env[w].ensure(n);
    sites[w] = env[w].flat.data() + env[w].center;
    x[w] = lo[w] = hi[w] = 0;
    sites[w][0] = sample(rng[w]);
  }
  for (std::int64_t i = 0; i < n; ++i) {
    for (int w = 0; w < W; ++w) {
      if (x[w] > hi[w]) {
        sites[w][x[w]] = sample(rng[w]);
        hi[w] = x[w];
      } else if (x[w] < lo[w]) {
        sites[w][x[w]] = sample(rng[w]);
        lo[w] = x[w];
      }
      // branchless +-1: sign of (omega - u) decides the step
      const double diff = sites[w][x[w]] - rng[w].uniform();
      x[w] += 1 - 2 * static_cast<std::int64_t>(std::signbit(diff));
    }
  }
  for (int w = 0; w < W; ++w) out[w] = x[w];
}

constexpr int kSimLanes = 4;

}  // namespace detail

inline WalkOutcome simulate_endpoint(const EnvDist& dist, std::int64_t n, RngStream& rng,
                                     bool record_path = false) {
  if (n < 0) fail("bad_argument", "step count must be non-negative");
  EnvBuffers env;
  WalkOutcome out;
  out.n = n;
  out.z = detail::annealed_endpoint(dist, n, rng, env, record_path ? &out.path : nullptr);
  return out;
}

// Quenched version: the environment is supplied as a callable site -> omega.
template <class EnvFn>
WalkOutcome simulate_endpoint_quenched(EnvFn&& env, std::int64_t n, RngStream& rng,
                                       bool record_path = false) {
  if (n < 0) fail("bad_argument", "step count must be non-negative");
  WalkOutcome out;
  out.n = n;
  std::int64_t x = 0;
  if (record_path) {
    out.path.reserve(static_cast<std::size_t>(n) + 1);
    out.path.push_back(0);
  }
  for (std::int64_t i = 0; i < n; ++i) {
    x += rng.uniform() < env(x) ? 1 : -1;
    if (record_path) out.path.push_back(static_cast<std::int32_t>(x));
  }
  out.z = x;
  return out;
}

struct MomentEstimate {
  std::int64_t n = 0;
  std::int64_t replicas = 0;
  double mean = 0.0;
  double variance = 0.0;
  double second_moment = 0.0;
  double stderr_mean = 0.0;
  double stderr_var = 0.0;
  std::uint64_t seed = 0;
};

// Independent annealed endpoints, one derived stream per replica. Output is
// in replica order and does not depend on the thread count.
inline std::vector<std::int32_t> mc_endpoints(const EnvDist& dist, std::int64_t n,
                                              std::int64_t replicas, std::uint64_t seed,
                                              int threads = default_threads()) {
  if (n < 0) fail("bad_argument", "step count must be non-negative");
  if (n > (std::int64_t{1} << 31) - 2) fail("size_limit", "endpoint exceeds int32 range");
  std::vector<std::int32_t> z(static_cast<std::size_t>(replicas));
  const detail::SiteSampler sampler(dist);
  constexpr int W = detail::kSimLanes;
  for_each_block(replicas, kDefaultBlockSize, threads,
                 [&](std::int64_t, std::int64_t begin, std::int64_t end) {
                   EnvBuffers env[W];
                   RngStream rng[W];
                   std::int64_t out[W];
                   std::int64_t r = begin;
                   for (; r + W <= end; r += W) {
                     for (int w = 0; w < W; ++w) {
                       rng[w] = derive_stream(seed, static_cast<std::uint64_t>(r + w));
                     }
                     detail::endpoint_lanes<W>(sampler, n, rng, env, out);
                     for (int w = 0; w < W; ++w) {
                       z[static_cast<std::size_t>(r + w)] = static_cast<std::int32_t>(out[w]);
                     }
                   }
                   for (; r < end; ++r) {
                     RngStream one = derive_stream(seed, static_cast<std::uint64_t>(r));
                     z[static_cast<std::size_t>(r)] = static_cast<std::int32_t>(
                         detail::annealed_endpoint(sampler, n, one, env[0], nullptr));
                   }
                 });
  return z;
}

// Moments of an integer sample with exact (order-free) integer accumulation.
inline MomentEstimate moments_of(const std::vector<std::int32_t>& z, std::int64_t n,
                                 std::uint64_t seed) {
  const std::int64_t replicas = static_cast<std::int64_t>(z.size());
  MomentEstimate est;
  est.n = n;
  est.replicas = replicas;
  est.seed = seed;
  if (replicas == 0) return est;
  __int128 s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (const std::int32_t v : z) {
    const __int128 x = v;
    const __int128 x2 = x * x;
    s1 += x;
    s2 += x2;
    s3 += x2 * x;
    s4 += x2 * x2;
  }
  const double m1 = static_cast<double>(s1) / static_cast<double>(replicas);
  const double m2 = static_cast<double>(s2) / static_cast<double>(replicas);
  const double m3 = static_cast<double>(s3) / static_cast<double>(replicas);
  const double m4 = static_cast<double>(s4) / static_cast<double>(replicas);
  est.mean = m1;
  est.second_moment = m2;
  const double var_b = std::max(0.0, m2 - m1 * m1);
  est.variance = replicas > 1 ? var_b * static_cast<double>(replicas) /
                                    static_cast<double>(replicas - 1)
                              : 0.0;
  est.stderr_mean = std::sqrt(var_b / static_cast<double>(replicas));
  // stderr of the variance from the fourth central moment
  const double c4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1 * m1 * m1 * m1;
  est.stderr_var =
      std::sqrt(std::max(0.0, c4 - var_b * var_b) / static_cast<double>(replicas));
  return est;
}

inline MomentEstimate mc_moments(const EnvDist& dist, std::int64_t n, std::int64_t replicas,
                                 std::uint64_t seed, int threads = default_threads()) {
  if (replicas < 1) fail("bad_argument", "need at least one replica");
  return moments_of(mc_endpoints(dist, n, replicas, seed, threads), n, seed);
}

// Truncation thresholds for second moments.
struct FixedThreshold {
  double x = 0.0;
};
struct SqrtLog4Threshold {};  // x = sqrt(n) log^4 n
struct AknThreshold {        // x = s/sqrt(log s) v sqrt(T) log^4 T
  double s = 0.0;
  double T = 0.0;
};
using ThresholdRule = std::variant<FixedThreshold, SqrtLog4Threshold, AknThreshold>;

inline double threshold_value(const ThresholdRule& rule, std::int64_t n) {
  if (const auto* f = std::get_if<FixedThreshold>(&rule)) {
    if (f->x < 0.0) fail("bad_argument", "threshold must be non-negative");
    return f->x;
  }
  if (std::holds_alternative<SqrtLog4Threshold>(rule)) {
    const double ln = std::log(static_cast<double>(std::max<std::int64_t>(n, 2)));
    return std::sqrt(static_cast<double>(n)) * ln * ln * ln * ln;
  }
  const auto& a = std::get<AknThreshold>(rule);
  if (!(a.s > 1.0) || !(a.T >= 1.0)) fail("bad_argument", "Akn threshold needs s > 1, T >= 1");
  const double lt = std::log(a.T);
  const double part1 = a.s / std::sqrt(std::log(a.s));
  const double part2 = std::sqrt(a.T) * lt * lt * lt * lt;
  return std::max(part1, part2);
}

struct TruncatedMoment {
  double value = 0.0;      // E[(Z - mean)^2 ; |Z - mean| <= x]
  double threshold = 0.0;  // x
  double stderr_value = 0.0;
  double mean_used = 0.0;
};

// Centered at the sample's own mean, which is what is available in practice.
inline TruncatedMoment truncated_second_moment_of(const std::vector<std::int32_t>& z,
                                                  double threshold) {
  TruncatedMoment out;
  out.threshold = threshold;
  if (z.empty()) return out;
  __int128 s1 = 0;
  for (const std::int32_t v : z) s1 += v;
  const double mean = static_cast<double>(s1) / static_cast<double>(z.size());
  out.mean_used = mean;
  double acc = 0.0, acc2 = 0.0;
  for (const std::int32_t v : z) {
    const double c = static_cast<double>(v) - mean;
    if (std::abs(c) <= threshold) {
      const double c2 = c * c;
      acc += c2;
      acc2 += c2 * c2;
    }
  }
  const double m = acc / static_cast<double>(z.size());
  const double m2 = acc2 / static_cast<double>(z.size());
  out.value = m;
  out.stderr_value = std::sqrt(std::max(0.0, m2 - m * m) / static_cast<double>(z.size()));
  return out;
}

inline TruncatedMoment truncated_second_moment(const EnvDist& dist, std::int64_t n,
                                               const ThresholdRule& rule,
                                               std::int64_t replicas, std::uint64_t seed,
                                               int threads = default_threads()) {
  const double x = threshold_value(rule, n);
  return truncated_second_moment_of(mc_endpoints(dist, n, replicas, seed, threads), x);
}

struct TailPoint {
  double x = 0.0;
  double p = 0.0;       // P(Z_n - vn < -x)
  double stderr_p = 0.0;
  bool in_window = false;  // inside the usable moderate-deviation band
};

// Empirical left tail of Z_n - vn. Points are accepted anywhere in (0, (1+v)n];
// in_window marks the moderate-deviation band [sqrt(n) log n, nv - log n]
// where the plateau statistic is meaningful.
inline std::vector<TailPoint> left_tail_curve_of(const std::vector<std::int32_t>& z,
                                                 std::int64_t n, double v,
                                                 const std::vector<double>& x_grid) {
  const double ln = std::log(static_cast<double>(std::max<std::int64_t>(n, 2)));
  const double lo = std::sqrt(static_cast<double>(n)) * ln;
  const double hi = static_cast<double>(n) * v - ln;
  std::vector<TailPoint> out;
  out.reserve(x_grid.size());
  const double R = static_cast<double>(z.size());
  for (const double x : x_grid) {
    if (!(x > 0.0)) fail("bad_argument", "tail grid values must be positive");
    std::int64_t hits = 0;
    const double cut = static_cast<double>(n) * v - x;
    for (const std::int32_t zi : z) {
      if (static_cast<double>(zi) < cut) ++hits;
    }
    TailPoint pt;
    pt.x = x;
    pt.p = static_cast<double>(hits) / R;
    pt.stderr_p = std::sqrt(std::max(pt.p * (1.0 - pt.p), 1.0 / R) / R);
    pt.in_window = x >= lo && x <= hi;
    out.push_back(pt);
  }
  return out;
}

inline std::vector<TailPoint> left_tail_curve(const EnvDist& dist, std::int64_t n,
                                              const std::vector<double>& x_grid,
                                              std::int64_t replicas, std::uint64_t seed,
                                              int threads = default_threads()) {
  return left_tail_curve_of(mc_endpoints(dist, n, replicas, seed, threads), n, dist.speed(),
                            x_grid);
}

}  // namespace coolwalk
