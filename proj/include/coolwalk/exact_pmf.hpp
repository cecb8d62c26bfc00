#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "coolwalk/env_dist.hpp"
#include "coolwalk/error.hpp"

namespace coolwalk {

// Exact annealed endpoint law, over z in [-n, n] (index z + n).
//
// Every one of the 2^n step strings is walked once. A path's annealed weight
// factorizes over sites as prod_x <omega^{u_x} (1-omega)^{d_x}>, with u_x/d_x
// the up/down steps taken from x, so the running product is updated with the
// ratio m(u+1,d)/m(u,d) (or the down analogue) at each step and restored on
// backtrack. n is capped at 20 (~10^6 paths).
class ExactAnnealedPmf {
 public:
  static std::vector<double> compute(const EnvDist& dist, int n) {
    if (n < 0) fail("bad_argument", "step count must be non-negative");
    if (n > 20) fail("size_limit", "exact enumeration is capped at n = 20");
    ExactAnnealedPmf state(dist, n);
    state.pmf_.assign(2 * static_cast<std::size_t>(n) + 1, 0.0);
    if (n == 0) {
      state.pmf_[0] = 1.0;
      return state.pmf_;
    }
    state.walk(0, 0, 1.0);
    return state.pmf_;
  }

 private:
  ExactAnnealedPmf(const EnvDist& dist, int n) : n_(n) {
    // moment table m[u][d] for u + d <= n, and the step ratios
    moment_.assign(static_cast<std::size_t>(n + 1) * (n + 1), 0.0);
    for (int u = 0; u <= n; ++u) {
      for (int d = 0; u + d <= n; ++d) {
        moment_[idx(u, d)] = dist.site_moment(u, d);
      }
    }
    up_count_.assign(2 * static_cast<std::size_t>(n) + 1, 0);
    down_count_.assign(2 * static_cast<std::size_t>(n) + 1, 0);
  }

  std::size_t idx(int u, int d) const {
    return static_cast<std::size_t>(u) * (n_ + 1) + static_cast<std::size_t>(d);
  }

  void walk(int step, int x, double weight) {
    if (step == n_) {
      pmf_[static_cast<std::size_t>(x + n_)] += weight;
      return;
    }
    const std::size_t site = static_cast<std::size_t>(x + n_);
    const int u = up_count_[site];
    const int d = down_count_[site];
    const double m_cur = moment_[idx(u, d)];
    // up step
    {
      const double ratio = moment_[idx(u + 1, d)] / m_cur;
      up_count_[site] = u + 1;
      walk(step + 1, x + 1, weight * ratio);
      up_count_[site] = u;
    }
    // down step
    {
      const double ratio = moment_[idx(u, d + 1)] / m_cur;
      down_count_[site] = d + 1;
      walk(step + 1, x - 1, weight * ratio);
      down_count_[site] = d;
    }
  }

  int n_;
  std::vector<double> moment_;
  std::vector<int> up_count_;
  std::vector<int> down_count_;
  std::vector<double> pmf_;
};

inline std::vector<double> exact_annealed_pmf(const EnvDist& dist, int n) {
  return ExactAnnealedPmf::compute(dist, n);
}

// Total-variation distance between an endpoint sample and a pmf over [-n, n].
inline double tv_distance(const std::vector<std::int32_t>& z, const std::vector<double>& pmf,
                          int n) {
  std::vector<double> hist(pmf.size(), 0.0);
  const double w = 1.0 / static_cast<double>(z.size());
  for (const std::int32_t v : z) hist[static_cast<std::size_t>(v + n)] += w;
  double tv = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) tv += std::abs(hist[i] - pmf[i]);
  return 0.5 * tv;
}

}  // namespace coolwalk
