#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "coolwalk/error.hpp"
#include "coolwalk/numeric.hpp"

namespace coolwalk {

// Increment families. Asymptotic rules are concretized with max(1, ceil(.)),
// which keeps every increment a positive integer without changing the
// growth rate.
struct Constant {
  std::int64_t T = 1;
};
struct Polynomial {  // T_k = max(1, ceil(A k^alpha))
  double A = 1.0;
  double alpha = 1.0;
};
struct Exponential {  // T_k = max(1, ceil(C e^{ck}))
  double C = 1.0;
  double c = 1.0;
};
struct SuperExp {  // T_k = max(1, ceil(exp(e^{ck})))
  double c = 1.0;
};
struct InterweavedMix {  // T_{2^i} = max(1, floor(2^{(i-1)/(2 kappa)})), else 1
  double kappa = 0.5;
};
struct OscillationK2 {};  // T_{r_i} = m_i with m_i = 2^{2^i}, r_i = i m_i, else 1
struct Custom {
  std::vector<std::int64_t> increments;
};
struct Designed {  // output of the mixture designer
  std::vector<std::int64_t> increments;
  std::vector<std::int64_t> block_ends;  // N_j
  std::vector<double> lambda_head;
  double kappa = 0.0;
  int case_id = 0;
};

using CoolingFamily = std::variant<Constant, Polynomial, Exponential, SuperExp,
                                   InterweavedMix, OscillationK2, Custom, Designed>;

namespace detail {

inline std::int64_t pow2_checked(int e) {
  if (e >= 63) fail("overflow", "2^e exceeds int64");
  return std::int64_t{1} << e;
}

// Largest special index i with r_i = i 2^{2^i} representable.
constexpr int kOscMaxIndex = 5;

inline std::int64_t osc_m(int i) { return pow2_checked(1 << i); }
inline std::int64_t osc_r(int i) { return checked_mul(i, osc_m(i)); }

}  // namespace detail

// A cooling map: the deterministic increment sequence T_k (k >= 1), its
// partial sums tau(k), and the count ell(n) of completed blocks by time n.
class CoolingMap {
 public:
  explicit CoolingMap(CoolingFamily family) : family_(std::move(family)) {
    if (const auto* c = std::get_if<Custom>(&family_)) {
      validate_list(c->increments);
    } else if (const auto* d = std::get_if<Designed>(&family_)) {
      validate_list(d->increments);
    } else if (const auto* k = std::get_if<Constant>(&family_)) {
      if (k->T < 1) fail("bad_argument", "constant increment must be >= 1");
    } else if (const auto* p = std::get_if<Polynomial>(&family_)) {
      if (!(p->A > 0.0) || !(p->alpha > 0.0)) fail("bad_argument", "polynomial needs A, alpha > 0");
    } else if (const auto* e = std::get_if<Exponential>(&family_)) {
      if (!(e->C > 0.0) || !(e->c > 0.0)) fail("bad_argument", "exponential needs C, c > 0");
    } else if (const auto* s = std::get_if<SuperExp>(&family_)) {
      if (!(s->c > 0.0)) fail("bad_argument", "super-exponential needs c > 0");
    } else if (const auto* iw = std::get_if<InterweavedMix>(&family_)) {
      if (!(iw->kappa > 0.0)) fail("bad_argument", "interweaved map needs kappa > 0");
    }
  }

  const CoolingFamily& family() const { return family_; }

  bool finite() const {
    return std::holds_alternative<Custom>(family_) || std::holds_alternative<Designed>(family_);
  }

  std::int64_t increment(std::int64_t k) const {
    if (k < 1) fail("bad_argument", "increment index starts at 1");
    if (const auto* c = std::get_if<Constant>(&family_)) return c->T;
    if (const auto* p = std::get_if<Polynomial>(&family_)) {
      return ceil_to_count(p->A * std::pow(static_cast<double>(k), p->alpha));
    }
    if (const auto* e = std::get_if<Exponential>(&family_)) {
      return ceil_to_count(e->C * std::exp(e->c * static_cast<double>(k)));
    }
    if (const auto* s = std::get_if<SuperExp>(&family_)) {
      const double inner = std::exp(s->c * static_cast<double>(k));
      if (inner > 43.0) fail("overflow", "super-exponential increment exceeds int64");
      return ceil_to_count(std::exp(inner));
    }
    if (const auto* iw = std::get_if<InterweavedMix>(&family_)) {
      if ((k & (k - 1)) == 0 && k >= 2) {
        int i = 0;
        for (std::int64_t v = k; v > 1; v >>= 1) ++i;
        const double t = std::floor(std::pow(2.0, (i - 1) / (2.0 * iw->kappa)));
        return std::max<std::int64_t>(1, static_cast<std::int64_t>(t));
      }
      return 1;
    }
    if (std::holds_alternative<OscillationK2>(family_)) {
      for (int i = 1; i <= detail::kOscMaxIndex; ++i) {
        if (detail::osc_r(i) == k) return detail::osc_m(i);
        if (detail::osc_r(i) > k) break;
      }
      return 1;
    }
    const auto& list = list_of();
    if (k > static_cast<std::int64_t>(list.size())) {
      fail("bad_argument", "index beyond the end of a finite cooling map");
    }
    return list[static_cast<std::size_t>(k - 1)];
  }

  std::int64_t tau(std::int64_t k) const {
    if (k < 0) fail("bad_argument", "tau index must be >= 0");
    if (k == 0) return 0;
    if (const auto* c = std::get_if<Constant>(&family_)) return checked_mul(k, c->T);
    if (std::holds_alternative<InterweavedMix>(family_)) {
      std::int64_t total = k;
      std::int64_t idx = 2;
      while (idx <= k) {
        total = checked_add(total, increment(idx) - 1);
        if (idx > k / 2) break;
        idx *= 2;
      }
      return total;
    }
    if (std::holds_alternative<OscillationK2>(family_)) {
      std::int64_t total = k;
      for (int i = 1; i <= detail::kOscMaxIndex; ++i) {
        const std::int64_t r = detail::osc_r(i);
        if (r > k) break;
        total = checked_add(total, detail::osc_m(i) - 1);
      }
      return total;
    }
    ensure_prefix(k);
    return prefix_[static_cast<std::size_t>(k)];
  }

  // ell(n) = sup{ l : tau(l) <= n }
  std::int64_t ell(std::int64_t n) const {
    if (n < 0) fail("bad_argument", "horizon must be >= 0");
    if (n == 0) return 0;
    if (const auto* c = std::get_if<Constant>(&family_)) return n / c->T;
    if (std::holds_alternative<InterweavedMix>(family_) ||
        std::holds_alternative<OscillationK2>(family_)) {
      // tau is strictly increasing; bisect on the closed form
      std::int64_t lo = 0, hi = n;  // tau(k) >= k
      while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo + 1) / 2;
        if (tau(mid) <= n) {
          lo = mid;
        } else {
          hi = mid - 1;
        }
      }
      return lo;
    }
    std::int64_t hi_cap = std::numeric_limits<std::int64_t>::max();
    if (finite()) {
      const auto& list = list_of();
      const std::int64_t size = static_cast<std::int64_t>(list.size());
      if (tau(size) <= n) return size;
      hi_cap = size;
    }
    // fast-growing families overflow past the horizon; that counts as "beyond"
    auto tau_beyond = [this](std::int64_t k, std::int64_t horizon) {
      try {
        return tau(k) > horizon;
      } catch (const Error& e) {
        if (e.code() == "overflow") return true;
        throw;
      }
    };
    std::int64_t k = 1;
    while (k <= hi_cap && !tau_beyond(k, n)) k *= 2;
    std::int64_t lo = k / 2, hi = std::min(k, hi_cap);
    while (lo < hi) {
      const std::int64_t mid = lo + (hi - lo + 1) / 2;
      if (!tau_beyond(mid, n)) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    return lo;
  }

  // Effective block lengths [T_1, .., T_{ell}, n - tau(ell)], final entry
  // dropped when zero. Their sum is n.
  std::vector<std::int64_t> effective_increments(std::int64_t n) const {
    const std::int64_t l = ell(n);
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(l) + 1);
    for (std::int64_t k = 1; k <= l; ++k) out.push_back(increment(k));
    const std::int64_t rem = n - tau(l);
    if (rem > 0) out.push_back(rem);
    return out;
  }

  // Aggregated (T, count) pairs of the effective increments, cheap even when
  // ell(n) is huge for the structured sparse families.
  std::vector<std::pair<std::int64_t, std::int64_t>> increment_histogram(std::int64_t n) const {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    const std::int64_t l = ell(n);
    const std::int64_t rem = n - tau(l);
    auto add = [&out](std::int64_t T, std::int64_t count) {
      if (T <= 0 || count <= 0) return;
      for (auto& e : out) {
        if (e.first == T) {
          e.second += count;
          return;
        }
      }
      out.emplace_back(T, count);
    };
    if (const auto* c = std::get_if<Constant>(&family_)) {
      add(c->T, l);
    } else if (std::holds_alternative<OscillationK2>(family_)) {
      std::int64_t specials = 0;
      for (int i = 1; i <= detail::kOscMaxIndex; ++i) {
        if (detail::osc_r(i) > l) break;
        add(detail::osc_m(i), 1);
        ++specials;
      }
      add(1, l - specials);
    } else if (std::holds_alternative<InterweavedMix>(family_)) {
      std::int64_t specials = 0;
      std::int64_t idx = 2;
      while (idx <= l) {
        add(increment(idx), 1);
        ++specials;
        if (idx > l / 2) break;
        idx *= 2;
      }
      add(1, l - specials);
    } else {
      for (std::int64_t k = 1; k <= l; ++k) add(increment(k), 1);
    }
    add(rem, 1);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void validate_list(const std::vector<std::int64_t>& list) const {
    for (const std::int64_t t : list) {
      if (t < 1) fail("bad_argument", "cooling increments must be >= 1");
    }
  }

  const std::vector<std::int64_t>& list_of() const {
    if (const auto* c = std::get_if<Custom>(&family_)) return c->increments;
    return std::get<Designed>(family_).increments;
  }

  void ensure_prefix(std::int64_t k) const {
    if (prefix_.empty()) prefix_.push_back(0);
    while (static_cast<std::int64_t>(prefix_.size()) <= k) {
      const std::int64_t idx = static_cast<std::int64_t>(prefix_.size());
      prefix_.push_back(checked_add(prefix_.back(), increment(idx)));
    }
  }

  CoolingFamily family_;
  mutable std::vector<std::int64_t> prefix_;  // prefix_[k] = tau(k)
};

// Special indices of the full-oscillation map: block i sits at r_i = i 2^{2^i}
// with length m_i = 2^{2^i}.
struct OscillationBlock {
  std::int64_t r = 0;
  std::int64_t m = 0;
};

inline OscillationBlock oscillation_block(int i) {
  if (i < 1 || i > detail::kOscMaxIndex) fail("overflow", "oscillation block index out of range");
  return {detail::osc_r(i), detail::osc_m(i)};
}

// Observation times n_j(t) = tau(r_j + floor(t m_j log m_j)) used with the
// oscillation map.
inline std::int64_t oscillation_horizon(const CoolingMap& map, int j, double t) {
  const auto blk = oscillation_block(j);
  const double extra = t * static_cast<double>(blk.m) * std::log(static_cast<double>(blk.m));
  const std::int64_t k = checked_add(blk.r, static_cast<std::int64_t>(std::floor(extra)));
  return map.tau(k);
}

inline std::int64_t tau(const CoolingMap& map, std::int64_t k) { return map.tau(k); }
inline std::int64_t ell(const CoolingMap& map, std::int64_t n) { return map.ell(n); }
inline std::vector<std::int64_t> effective_increments(const CoolingMap& map, std::int64_t n) {
  return map.effective_increments(n);
}

// ---------------------------------------------------------------------------
// Mixture designer: builds a cooling map whose sorted weight vector converges
// to a prescribed lambda* along n_j = tau(N_j).

struct DesignedMixture {
  CoolingMap map;
  std::vector<std::int64_t> n_j;          // tau(N_j)
  std::vector<std::int64_t> block_ends;   // N_j
  double kappa = 0.0;
  int case_id = 0;
  std::vector<double> lambda_head;
};

namespace detail {

inline double lambda_sum_sq(const std::function<double(int)>& lambda, int* terms_used) {
  double sum = 0.0;
  int k = 1;
  double prev = std::numeric_limits<double>::infinity();
  for (; k <= 200000; ++k) {
    const double v = lambda(k);
    if (v < 0.0) fail("bad_argument", "lambda* must be non-negative");
    if (v > prev + 1e-12) fail("bad_argument", "lambda* must be non-increasing");
    prev = v;
    sum += v * v;
    if (v * v < 1e-18) break;
  }
  if (terms_used) *terms_used = k;
  return sum;
}

inline DesignedMixture build_mixture(const std::function<double(int)>& lambda, double kappa,
                                     int j_max, int case_id, int k0, double a_remainder) {
  std::vector<std::int64_t> increments;
  std::vector<std::int64_t> block_ends;
  std::vector<std::int64_t> n_values;
  double v2 = 0.0;  // sum of T^{2 kappa} over all placed blocks
  std::int64_t tau_acc = 0;
  const double inv_kappa = 1.0 / kappa;
  for (int j = 1; j <= j_max; ++j) {
    // the seed scale for the first round is 1; afterwards the realized one
    const double v_prev = j == 1 ? 1.0 : std::sqrt(v2);
    std::int64_t fillers;
    std::vector<std::int64_t> designed;
    if (case_id == 1) {
      const double lam_j = lambda(j);
      if (lam_j <= 0.0) fail("ill_posed", "case I needs lambda*(j) > 0 for every j");
      const double kd = a_remainder / lam_j;
      fillers = static_cast<std::int64_t>(std::floor(kd * kd));
      for (int l = 1; l <= j; ++l) {
        designed.push_back(ceil_to_count_tol(std::pow(v_prev * lambda(l) / lam_j, inv_kappa)));
      }
    } else {
      const double kd = static_cast<double>(j) * a_remainder;
      fillers = static_cast<std::int64_t>(std::floor(kd * kd));
      const int j0 = static_cast<int>(std::ceil(1.0 / lambda(k0)));
      if (j >= j0) {
        for (int l = 1; l <= k0; ++l) {
          designed.push_back(
              ceil_to_count_tol(std::pow(static_cast<double>(j) * v_prev * lambda(l), inv_kappa)));
        }
      } else {
        fillers += k0;  // too early for the dominance chain; keep the slot count
      }
    }
    const std::int64_t filler_value = ceil_to_count_tol(std::pow(v_prev, inv_kappa));
    for (const std::int64_t t : designed) {
      increments.push_back(t);
      tau_acc = checked_add(tau_acc, t);
      v2 += std::pow(static_cast<double>(t), 2.0 * kappa);
    }
    for (std::int64_t f = 0; f < fillers; ++f) {
      increments.push_back(filler_value);
      tau_acc = checked_add(tau_acc, filler_value);
      v2 += std::pow(static_cast<double>(filler_value), 2.0 * kappa);
    }
    block_ends.push_back(static_cast<std::int64_t>(increments.size()));
    n_values.push_back(tau_acc);
  }
  std::vector<double> head;
  for (int k = 1; k <= 16; ++k) head.push_back(lambda(k));
  DesignedMixture out{
      CoolingMap(Designed{increments, block_ends, head, kappa, case_id}),
      std::move(n_values), std::move(block_ends), kappa, case_id, std::move(head)};
  return out;
}

}  // namespace detail

// Case I: lambda*(k) > 0 for all k, supplied as a callable.
inline DesignedMixture construct_mixture_map(const std::function<double(int)>& lambda_star,
                                             double kappa, int j_max) {
  if (!(kappa > 0.0 && kappa < 1.0)) fail("bad_argument", "designer needs kappa in (0,1)");
  int terms = 0;
  const double sum2 = detail::lambda_sum_sq(lambda_star, &terms);
  if (sum2 > 1.0 + 1e-9) fail("norm_exceeded", "lambda* has l2 norm above 1");
  const double a = std::sqrt(std::max(0.0, 1.0 - sum2));
  return detail::build_mixture(lambda_star, kappa, j_max, 1, 0, a);
}

// Case II: finitely supported lambda*, supplied as the support vector.
inline DesignedMixture construct_mixture_map(const std::vector<double>& lambda_star,
                                             double kappa, int j_max) {
  if (!(kappa > 0.0 && kappa < 1.0)) fail("bad_argument", "designer needs kappa in (0,1)");
  std::vector<double> lam = lambda_star;
  while (!lam.empty() && lam.back() == 0.0) lam.pop_back();
  if (lam.empty()) fail("bad_argument", "lambda* support is empty");
  double sum2 = 0.0;
  for (std::size_t i = 0; i < lam.size(); ++i) {
    if (lam[i] <= 0.0) fail("bad_argument", "case II support must be contiguous and positive");
    if (i > 0 && lam[i] > lam[i - 1] + 1e-12) {
      fail("bad_argument", "lambda* must be non-increasing");
    }
    sum2 += lam[i] * lam[i];
  }
  if (sum2 > 1.0 + 1e-9) fail("norm_exceeded", "lambda* has l2 norm above 1");
  const double a = std::sqrt(std::max(0.0, 1.0 - sum2));
  const int k0 = static_cast<int>(lam.size());
  auto fn = [lam](int k) {
    return k <= static_cast<int>(lam.size()) ? lam[static_cast<std::size_t>(k - 1)] : 0.0;
  };
  return detail::build_mixture(fn, kappa, j_max, 2, k0, a);
}

}  // namespace coolwalk
