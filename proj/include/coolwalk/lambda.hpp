#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "coolwalk/cooling.hpp"
#include "coolwalk/error.hpp"
#include "coolwalk/variance_lookup.hpp"

namespace coolwalk {

// Non-negative weight vector, finitely supported. Unit l2 norm for the
// per-horizon weights; subsequential limits may have norm below 1, with the
// deficit going to the Gaussian remainder a(lambda).
class LambdaVector {
 public:
  LambdaVector() = default;
  explicit LambdaVector(std::vector<double> weights) : w_(std::move(weights)) {
    for (const double x : w_) {
      if (x < 0.0 || !std::isfinite(x)) fail("bad_argument", "lambda weights must be >= 0");
    }
  }

  const std::vector<double>& weights() const { return w_; }
  std::size_t size() const { return w_.size(); }
  double operator()(std::size_t k) const {  // 1-based, 0 beyond support
    return k >= 1 && k <= w_.size() ? w_[k - 1] : 0.0;
  }

  double sum_sq() const {
    double s = 0.0;
    for (const double x : w_) s += x * x;
    return s;
  }

  double norm2() const { return std::sqrt(sum_sq()); }

  std::vector<double> sorted_desc() const {
    std::vector<double> s = w_;
    std::sort(s.begin(), s.end(), std::greater<double>());
    return s;
  }

  // Gaussian remainder weight a = sqrt(1 - sum lambda^2).
  double a_remainder() const {
    const double s = sum_sq();
    if (s > 1.0 + 1e-9) fail("norm_exceeded", "lambda l2 norm exceeds 1");
    return std::sqrt(std::max(0.0, 1.0 - s));
  }

 private:
  std::vector<double> w_;
};

inline double a_of_lambda(const LambdaVector& lambda) { return lambda.a_remainder(); }

// Closed-form weights (T_{k,n})^kappa / V_n with V_n^2 = sum (T_{k,n})^{2 kappa}.
// Unit norm by construction.
inline LambdaVector tilde_lambda(const CoolingMap& map, std::int64_t n, double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) fail("bad_argument", "tilde lambda needs kappa in (0,1)");
  if (n < 1) fail("bad_argument", "horizon must be >= 1");
  const auto blocks = map.effective_increments(n);
  std::vector<double> w(blocks.size());
  double v2 = 0.0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    w[i] = std::pow(static_cast<double>(blocks[i]), kappa);
    v2 += w[i] * w[i];
  }
  const double v = std::sqrt(v2);
  for (double& x : w) x /= v;
  return LambdaVector(std::move(w));
}

// Empirical weights sqrt(Var(Z_{T_{k,n}}) / sum_j Var(Z_{T_{j,n}})), with the
// per-length variances supplied by any callable.
template <class VarianceFn>
LambdaVector empirical_lambda_with(const CoolingMap& map, std::int64_t n, VarianceFn&& var_of) {
  if (n < 1) fail("bad_argument", "horizon must be >= 1");
  const auto blocks = map.effective_increments(n);
  std::vector<double> var(blocks.size());
  double total = 0.0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    var[i] = var_of(blocks[i]);
    if (!(var[i] >= 0.0)) fail("missing_variance", "no variance estimate for a block length");
    total += var[i];
  }
  if (!(total > 0.0)) fail("zero_variance", "total variance vanished");
  std::vector<double> w(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) w[i] = std::sqrt(var[i] / total);
  return LambdaVector(std::move(w));
}

inline LambdaVector empirical_lambda(const CoolingMap& map, std::int64_t n,
                                     VarianceLookup& lookup) {
  return empirical_lambda_with(map, n, [&lookup](std::int64_t T) { return lookup.variance(T); });
}

}  // namespace coolwalk
