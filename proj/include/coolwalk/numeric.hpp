#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "coolwalk/error.hpp"

namespace coolwalk {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// P(|N(0,sigma^2)| <= x)
inline double half_normal_cdf(double x, double sigma) {
  return x <= 0.0 ? 0.0 : std::erf(x / (sigma * std::sqrt(2.0)));
}

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) fail("overflow", "int64 sum overflow");
  return out;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) fail("overflow", "int64 product overflow");
  return out;
}

// Rounds x up to an integer >= 1; rejects values outside int64 range.
inline std::int64_t ceil_to_count(double x) {
  if (!std::isfinite(x) || x >= 9.0e18) fail("overflow", "increment not representable");
  const double c = std::ceil(x);
  return c < 1.0 ? 1 : static_cast<std::int64_t>(c);
}

// Same, but absorbs floating-point slop first (exactly-integer expressions
// like (sqrt(3))^2 must not round up to the next integer).
inline std::int64_t ceil_to_count_tol(double x) {
  return ceil_to_count(x - 1e-9 * std::max(1.0, std::abs(x)));
}

// tanh-sinh quadrature of f over (0,1). The substitution
//   x = (1 + tanh((pi/2) sinh t)) / 2
// clusters points doubly-exponentially at both endpoints, so integrable
// endpoint singularities converge. Each level halves the node spacing and
// reuses previous nodes; stops when two levels agree to rel_tol.
template <class F>
double integrate_01(F&& f, double rel_tol = 1e-11, int max_level = 12) {
  constexpr double kPiHalf = 1.5707963267948966;
  constexpr double kTMax = 6.5;  // weight underflows well before this

  // Sum of f at the symmetric pair of nodes for |t|, with weight.
  auto node_pair = [&](double t) -> double {
    const double s = std::sinh(t);
    const double sech = 1.0 / std::cosh(kPiHalf * s);
    const double w = kPiHalf * std::cosh(t) * sech * sech * 0.5;
    if (w <= 0.0 || !std::isfinite(w)) return 0.0;
    // exp-form avoids cancellation near the endpoints
    const double x_lo = 0.5 * sech * std::exp(-kPiHalf * s);
    const double x_hi = 1.0 - x_lo;
    if (x_lo <= 0.0 || x_lo >= 1.0) return 0.0;
    double acc = 0.0;
    const double f_lo = f(x_lo);
    if (std::isfinite(f_lo)) acc += w * f_lo;
    if (t != 0.0) {
      const double f_hi = f(x_hi);
      if (std::isfinite(f_hi)) acc += w * f_hi;
    }
    return acc;
  };

  double h = 1.0;
  double sum = node_pair(0.0);
  for (double t = h; t <= kTMax; t += h) sum += node_pair(t);
  double total = h * sum;

  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    double add = 0.0;
    for (double t = h; t <= kTMax; t += 2.0 * h) add += node_pair(t);
    const double next = 0.5 * total + h * add;
    sum += add;
    if (level >= 3 && std::abs(next - total) <= rel_tol * std::abs(next)) {
      return next;
    }
    total = next;
  }
  return total;
}

}  // namespace coolwalk
