#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>

#include "coolwalk/env_dist.hpp"
#include "coolwalk/error.hpp"
#include "coolwalk/walk.hpp"

namespace coolwalk {

// Memoized per-increment moment estimates. Each distinct block length T is
// simulated once for a whole experiment; the (seed, T) pairing is fixed, so
// lookups are reproducible regardless of query order. Optionally extends
// beyond the simulation cap with the variance asymptotics
// Var(Z_T) ~ coeff * T log T, for use by the approximate scaling formulas.
class VarianceLookup {
 public:
  VarianceLookup(const EnvDist& dist, std::int64_t replicas, std::uint64_t seed,
                 int threads = default_threads())
      : dist_(dist), replicas_(replicas), seed_(seed), threads_(threads) {}

  void enable_asymptotic(double variance_coeff, std::int64_t mc_cap) {
    asymptotic_coeff_ = variance_coeff;
    mc_cap_ = mc_cap;
  }

  bool is_asymptotic(std::int64_t T) const { return asymptotic_coeff_ > 0.0 && T > mc_cap_; }

  std::int64_t mc_cap() const { return mc_cap_; }

  MomentEstimate at(std::int64_t T) {
    if (T < 0) fail("bad_argument", "block length must be >= 0");
    if (T == 0) return MomentEstimate{0, replicas_, 0, 0, 0, 0, 0, seed_};
    if (is_asymptotic(T)) {
      MomentEstimate est;
      est.n = T;
      est.replicas = 0;
      const double lt = std::log(static_cast<double>(T));
      est.variance = asymptotic_coeff_ * static_cast<double>(T) * lt;
      est.mean = dist_.speed() * static_cast<double>(T);
      est.seed = seed_;
      return est;
    }
    if (T > hard_cap_) {
      fail("mc_cap", "block length " + std::to_string(T) +
                         " exceeds the Monte Carlo cap; enable the asymptotic extension");
    }
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = memo_.find(T);
      if (it != memo_.end()) return it->second;
    }
    MomentEstimate est = mc_moments(dist_, T, replicas_, sub_seed(seed_, static_cast<std::uint64_t>(T)),
                                    threads_);
    std::lock_guard<std::mutex> lock(mu_);
    return memo_.emplace(T, est).first->second;
  }

  double variance(std::int64_t T) { return at(T).variance; }

  // Endpoint batch for a block length, memoized; used by truncated-variance
  // estimation. Only available below the cap.
  const std::vector<std::int32_t>& endpoints(std::int64_t T) {
    if (T < 1 || T > hard_cap_) fail("mc_cap", "no endpoint batch for this block length");
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = batches_.find(T);
      if (it != batches_.end()) return it->second;
    }
    auto z = mc_endpoints(dist_, T, replicas_, sub_seed(seed_, static_cast<std::uint64_t>(T)),
                          threads_);
    std::lock_guard<std::mutex> lock(mu_);
    return batches_.emplace(T, std::move(z)).first->second;
  }

  void set_hard_cap(std::int64_t cap) { hard_cap_ = cap; }

 private:
  const EnvDist& dist_;
  std::int64_t replicas_;
  std::uint64_t seed_;
  int threads_;
  double asymptotic_coeff_ = 0.0;
  std::int64_t mc_cap_ = std::int64_t{1} << 62;
  std::int64_t hard_cap_ = std::int64_t{1} << 21;
  std::map<std::int64_t, MomentEstimate> memo_;
  std::map<std::int64_t, std::vector<std::int32_t>> batches_;
  mutable std::mutex mu_;
};

}  // namespace coolwalk
