#pragma once

#include <cstdint>
#include <vector>

#include "coolwalk/error.hpp"

namespace coolwalk {

struct RegenerationPoint {
  std::int64_t time = 0;   // step index R_k
  std::int64_t level = 0;  // Z_{R_k}
};

struct RegenerationSplit {
  std::vector<RegenerationPoint> points;
  bool last_censored = false;
};

// Indices n with max_{m<n} Z_m < Z_n <= min_{m>n} Z_m, the future minimum
// taken over the recorded horizon. The true definition quantifies over an
// infinite future; the last detected point is flagged censored unless the
// path's final level sits at least `margin` above it.
inline RegenerationSplit regeneration_split(const std::vector<std::int32_t>& path,
                                            std::int64_t margin = 50) {
  RegenerationSplit out;
  const std::int64_t len = static_cast<std::int64_t>(path.size());
  if (len <= 1) return out;
  std::vector<std::int32_t> suffix_min(path.size());
  suffix_min[path.size() - 1] = path.back();
  for (std::int64_t i = len - 2; i >= 0; --i) {
    suffix_min[static_cast<std::size_t>(i)] =
        std::min(path[static_cast<std::size_t>(i)], suffix_min[static_cast<std::size_t>(i) + 1]);
  }
  std::int32_t prefix_max = path[0];
  for (std::int64_t i = 1; i < len; ++i) {
    const std::int32_t z = path[static_cast<std::size_t>(i)];
    const std::int32_t future_min =
        i + 1 < len ? suffix_min[static_cast<std::size_t>(i) + 1] : z;
    if (prefix_max < z && z <= future_min) {
      out.points.push_back({i, z});
    }
    prefix_max = std::max(prefix_max, z);
  }
  if (!out.points.empty()) {
    out.last_censored = path.back() < out.points.back().level + margin;
  }
  return out;
}

}  // namespace coolwalk
