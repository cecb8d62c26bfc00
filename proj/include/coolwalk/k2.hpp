#pragma once

#include <cmath>
#include <cstdint>
#include <variant>
#include <vector>

#include "coolwalk/cooling.hpp"
#include "coolwalk/env_dist.hpp"
#include "coolwalk/error.hpp"
#include "coolwalk/stats.hpp"
#include "coolwalk/variance_lookup.hpp"
#include "coolwalk/walk.hpp"

namespace coolwalk {

// Estimated constants of the critical Gaussian regime: speed v, the Gaussian
// core coefficient b^2 and the slowdown-tail coefficient K0 v in
// Var(Z_n) ~ (b^2 + K0 v) n log n, and beta = b / sqrt(b^2 + K0 v).
struct K2Constants {
  double v = 0.0;
  double total = 0.0;  // b^2 + K0 v
  double b_sq = 0.0;
  double k0v = 0.0;
  double beta = 0.0;
  double stderr_total = 0.0;
  double stderr_b_sq = 0.0;
  double stderr_k0v = 0.0;
  double stderr_beta = 0.0;
  // independent cross-check from the left-tail plateau
  double k0_tail = 0.0;
  double k0v_tail = 0.0;
  double stderr_k0v_tail = 0.0;
  std::vector<std::int64_t> grid;
  std::int64_t replicas = 0;
  std::uint64_t seed = 0;
};

struct K2Options {
  double x1_mult = 4.0;   // lower truncation threshold, in units of sqrt(n log n)
  double x2_mult = 16.0;  // upper truncation threshold, capped at nv/2
  int shards = 16;        // batch-means shards for the standard errors
  int tail_points = 8;
  std::int64_t tail_replicas = 0;  // default: same as replicas
};

namespace detail {

struct PerN {
  double var = 0.0;
  double v1 = 0.0;  // truncated second moment at x1
  double v2 = 0.0;  // at x2
  double x1 = 0.0;
  double x2 = 0.0;
};

// Truncated central second moments of one endpoint batch at two thresholds,
// restricted to replicas with index % stride == shard (shard < 0: all).
inline PerN batch_stats(const std::vector<std::int32_t>& z, double mean, double x1, double x2,
                        int shard, int stride) {
  PerN out;
  out.x1 = x1;
  out.x2 = x2;
  double acc_v = 0.0, acc1 = 0.0, acc2 = 0.0;
  std::int64_t count = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (shard >= 0 && static_cast<int>(i % static_cast<std::size_t>(stride)) != shard) continue;
    const double c = static_cast<double>(z[i]) - mean;
    const double c2 = c * c;
    acc_v += c2;
    if (std::abs(c) <= x1) acc1 += c2;
    if (std::abs(c) <= x2) acc2 += c2;
    ++count;
  }
  if (count > 0) {
    out.var = acc_v / static_cast<double>(count);
    out.v1 = acc1 / static_cast<double>(count);
    out.v2 = acc2 / static_cast<double>(count);
  }
  return out;
}

struct PipelineOut {
  double total = 0.0;
  double b_sq = 0.0;
  double k0v_trunc = 0.0;
};

// total and b^2 from per-n batch statistics, averaged over the top half of
// the grid. The truncated second moment at threshold x in the moderate
// window obeys V(x) ~ b^2 n log n + 2 K0 v n log(x / sqrt(n)), so the
// difference across two thresholds isolates K0 v and the corrected V(x1)
// isolates b^2.
inline PipelineOut pipeline(const std::vector<std::int64_t>& grid, const std::vector<PerN>& per_n) {
  PipelineOut out;
  const std::size_t lo = grid.size() / 2;
  double k0v_acc = 0.0, total_acc = 0.0;
  std::size_t used = 0;
  for (std::size_t i = lo; i < grid.size(); ++i) {
    const double n = static_cast<double>(grid[i]);
    const double nlogn = n * std::log(n);
    total_acc += per_n[i].var / nlogn;
    k0v_acc += (per_n[i].v2 - per_n[i].v1) / (2.0 * n * std::log(per_n[i].x2 / per_n[i].x1));
    ++used;
  }
  out.total = total_acc / static_cast<double>(used);
  out.k0v_trunc = k0v_acc / static_cast<double>(used);
  double b_acc = 0.0;
  for (std::size_t i = lo; i < grid.size(); ++i) {
    const double n = static_cast<double>(grid[i]);
    const double nlogn = n * std::log(n);
    const double correction = 2.0 * out.k0v_trunc * n * std::log(per_n[i].x1 / std::sqrt(n));
    b_acc += (per_n[i].v1 - correction) / nlogn;
  }
  out.b_sq = b_acc / static_cast<double>(used);
  return out;
}

}  // namespace detail

inline K2Constants estimate_k2_constants(const EnvDist& dist,
                                         const std::vector<std::int64_t>& n_grid,
                                         std::int64_t replicas, std::uint64_t seed,
                                         int threads = default_threads(),
                                         const K2Options& opts = K2Options{}) {
  if (n_grid.size() < 3) fail("bad_argument", "constant estimation needs >= 3 grid points");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) fail("bad_argument", "n grid must increase");
  }
  const double v = dist.speed();
  if (!(v > 0.0) || std::abs(dist.kappa() - 2.0) > 0.05) {
    fail("bad_argument", "constant estimation needs a 2-regular (ballistic) distribution");
  }

  const int stride = opts.shards;
  std::vector<detail::PerN> full(n_grid.size());
  std::vector<std::vector<detail::PerN>> shard(static_cast<std::size_t>(stride),
                                               std::vector<detail::PerN>(n_grid.size()));
  std::vector<std::int32_t> top_batch;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const std::int64_t n = n_grid[i];
    const auto z = mc_endpoints(dist, n, replicas, sub_seed(seed, static_cast<std::uint64_t>(n)),
                                threads);
    __int128 s1 = 0;
    for (const std::int32_t zi : z) s1 += zi;
    const double mean = static_cast<double>(s1) / static_cast<double>(z.size());
    const double nlogn = std::sqrt(static_cast<double>(n) * std::log(static_cast<double>(n)));
    const double x1 = opts.x1_mult * nlogn;
    const double x2 = std::min(opts.x2_mult * nlogn, static_cast<double>(n) * v / 2.0);
    if (!(x2 > x1 * 1.05)) fail("insufficient_n", "truncation thresholds too close; grid too small");
    full[i] = detail::batch_stats(z, mean, x1, x2, -1, stride);
    for (int s = 0; s < stride; ++s) {
      shard[static_cast<std::size_t>(s)][i] = detail::batch_stats(z, mean, x1, x2, s, stride);
    }
    if (i + 1 == n_grid.size()) top_batch = z;
  }

  const auto main_fit = detail::pipeline(n_grid, full);
  K2Constants out;
  out.v = v;
  out.total = main_fit.total;
  out.b_sq = main_fit.b_sq;
  out.k0v = main_fit.total - main_fit.b_sq;
  out.beta = std::sqrt(std::max(1e-12, out.b_sq) / out.total);
  out.grid = n_grid;
  out.replicas = replicas;
  out.seed = seed;

  // batch-means standard errors: the pipeline re-run on each shard
  double va_total = 0.0, va_b = 0.0, va_k0v = 0.0, va_beta = 0.0;
  for (int s = 0; s < stride; ++s) {
    const auto f = detail::pipeline(n_grid, shard[static_cast<std::size_t>(s)]);
    const double k0v_s = f.total - f.b_sq;
    const double beta_s = std::sqrt(std::max(1e-12, f.b_sq) / std::max(1e-12, f.total));
    va_total += (f.total - out.total) * (f.total - out.total);
    va_b += (f.b_sq - out.b_sq) * (f.b_sq - out.b_sq);
    va_k0v += (k0v_s - out.k0v) * (k0v_s - out.k0v);
    va_beta += (beta_s - out.beta) * (beta_s - out.beta);
  }
  const double denom = static_cast<double>(stride) * static_cast<double>(stride - 1);
  out.stderr_total = std::sqrt(va_total / denom);
  out.stderr_b_sq = std::sqrt(va_b / denom);
  out.stderr_k0v = std::sqrt(va_k0v / denom);
  out.stderr_beta = std::sqrt(va_beta / denom);

  if (out.k0v < -3.0 * out.stderr_k0v) {
    fail("insufficient_n", "slowdown coefficient came out negative beyond noise");
  }

  // independent cross-check: left-tail plateau at the largest grid point
  {
    const std::int64_t n = n_grid.back();
    const double nv = static_cast<double>(n) * v;
    const double lo = opts.x1_mult * std::sqrt(static_cast<double>(n) * std::log(static_cast<double>(n)));
    const double hi = nv / 2.0;
    std::vector<double> xs;
    for (int i = 0; i < opts.tail_points; ++i) {
      xs.push_back(lo * std::pow(hi / lo, static_cast<double>(i) /
                                              static_cast<double>(opts.tail_points - 1)));
    }
    const std::vector<std::int32_t>* z = &top_batch;
    std::vector<std::int32_t> extra;
    if (opts.tail_replicas > replicas) {
      extra = mc_endpoints(dist, n, opts.tail_replicas, sub_seed(seed, 0x7a11u), threads);
      z = &extra;
    }
    const auto curve = left_tail_curve_of(*z, n, v, xs);
    std::vector<TailCurvePoint> pts;
    for (const auto& c : curve) pts.push_back({c.x, c.p, c.stderr_p});
    const FitReport fit = tail_plateau(pts, n, v);
    out.k0_tail = fit.estimate;
    out.k0v_tail = fit.estimate * v;
    out.stderr_k0v_tail = fit.stderr_estimate * v;
  }
  return out;
}

enum class BetaMode { kMc, kApprox };

struct BetaPoint {
  std::int64_t n = 0;
  double beta_n = 0.0;
  double b_tilde = 0.0;
  BetaMode mode = BetaMode::kMc;
  bool fallback_used = false;
};

struct BetaOptions {
  std::int64_t t_floor = 32;  // below this, the variance asymptotics are meaningless
};

// Scaling sequence beta_n = max(beta, b_n) with
//   b_n^2 = sum_k Var(Z~_{T_{k,n}} 1{|Z~| <= x_{k,n}}) / s_n^2,
//   x_{k,n} = s_n/sqrt(log s_n) v sqrt(T) log^4 T,  s_n^2 = sum_k Var(Z_{T_{k,n}}).
//
// kMc evaluates the truncated variances by Monte Carlo at the literal
// threshold. At reachable horizons sqrt(T) log^4 T exceeds the walk support
// 2T for every simulable T, so the truncation is provably inactive there and
// the mode reports the finite-n truth (b_n = 1).
//
// kApprox evaluates each block by its large-T truncated-variance asymptotics
//   Var(Z~_T 1{|Z~| <= x}) ~ b^2 T log T + 2 K0 v T log((x ^ Tv/2)/sqrt(T))
// at x = s_n/sqrt(log s_n), clamped to [0, Var(Z_T)], taking the untruncated
// variance when x >= 2T (exact). Blocks too small for the asymptotics fall
// back to Monte Carlo and are flagged.
inline std::vector<BetaPoint> beta_n_sequence(const EnvDist& dist, const CoolingMap& map,
                                              const std::vector<std::int64_t>& n_list,
                                              const K2Constants& constants, BetaMode mode,
                                              VarianceLookup& lookup,
                                              const BetaOptions& opts = BetaOptions{}) {
  if (!(constants.total > 0.0) || !(constants.beta > 0.0)) {
    fail("missing_constants", "beta_n needs estimated constants");
  }
  (void)dist;
  std::vector<BetaPoint> out;
  out.reserve(n_list.size());
  for (const std::int64_t n : n_list) {
    const auto hist = map.increment_histogram(n);
    double s2 = 0.0;
    for (const auto& [T, count] : hist) s2 += static_cast<double>(count) * lookup.variance(T);
    if (!(s2 > 0.0)) fail("zero_variance", "total variance vanished");
    const double s = std::sqrt(s2);
    if (!(s > 3.0)) fail("bad_argument", "horizon too small for the scaling sequence");
    const double x_s = s / std::sqrt(std::log(s));
    BetaPoint pt;
    pt.n = n;
    pt.mode = mode;
    double num = 0.0;
    for (const auto& [T, count] : hist) {
      const double sigma2 = lookup.variance(T);
      double vhat;
      if (mode == BetaMode::kMc) {
        const double lt = std::log(static_cast<double>(std::max<std::int64_t>(T, 2)));
        const double x_kn = std::max(x_s, std::sqrt(static_cast<double>(T)) * lt * lt * lt * lt);
        vhat = truncated_second_moment_of(lookup.endpoints(T), x_kn).value;
      } else {
        const double Td = static_cast<double>(T);
        if (x_s >= 2.0 * Td) {
          vhat = sigma2;  // |Z~_T| <= 2T: truncation provably inactive
        } else if (T >= opts.t_floor && x_s >= std::sqrt(Td)) {
          const double cap = std::min(x_s, Td * constants.v / 2.0);
          const double val = constants.b_sq * Td * std::log(Td) +
                             2.0 * constants.k0v * Td * std::log(cap / std::sqrt(Td));
          vhat = std::min(std::max(val, 0.0), sigma2);
        } else {
          const double lt = std::log(static_cast<double>(std::max<std::int64_t>(T, 2)));
          const double x_kn = std::max(x_s, std::sqrt(Td) * lt * lt * lt * lt);
          vhat = truncated_second_moment_of(lookup.endpoints(T), x_kn).value;
          pt.fallback_used = true;
        }
      }
      num += static_cast<double>(count) * vhat;
    }
    pt.b_tilde = std::sqrt(num / s2);
    pt.beta_n = std::max(constants.beta, pt.b_tilde);
    out.push_back(pt);
  }
  return out;
}

// Predicted limiting scaling constants for the named cooling families.
struct PolyScaling {
  double alpha = 1.0;
};
struct ExpScaling {};
struct OscScaling {
  double t = 0.0;
  double var_z1 = 0.0;
};
using K2ScalingExample = std::variant<PolyScaling, ExpScaling, OscScaling>;

inline double predicted_k2_scaling(const K2ScalingExample& example, const K2Constants& c) {
  if (const auto* p = std::get_if<PolyScaling>(&example)) {
    if (p->alpha <= 1.0) return 1.0;
    return std::sqrt((c.b_sq + c.k0v / p->alpha) / c.total);
  }
  if (std::holds_alternative<ExpScaling>(example)) return c.beta;
  const auto& o = std::get<OscScaling>(example);
  return std::sqrt((c.b_sq + o.t * o.var_z1) / (c.total + o.t * o.var_z1));
}

// Finite-j reference for the oscillation example: the same variance ledger
// before the j -> infinity limit discards the count of unit blocks.
inline double oscillation_scaling_finite(int j, double t, double var_z1,
                                         const K2Constants& c) {
  double w_big = 0.0;
  std::int64_t count_ones = 0;
  for (int i = 1; i <= j; ++i) {
    const auto blk = oscillation_block(i);
    w_big += static_cast<double>(blk.m) * std::log(static_cast<double>(blk.m));
  }
  const auto top = oscillation_block(j);
  const std::int64_t extra =
      static_cast<std::int64_t>(std::floor(t * static_cast<double>(top.m) *
                                           std::log(static_cast<double>(top.m))));
  count_ones = top.r + extra - j;
  const double ones = static_cast<double>(count_ones) * var_z1;
  return std::sqrt((c.b_sq * w_big + ones) / (c.total * w_big + ones));
}

}  // namespace coolwalk
