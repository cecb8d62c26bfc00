#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "coolwalk/error.hpp"
#include "coolwalk/lambda.hpp"
#include "coolwalk/rng.hpp"

namespace coolwalk {

// Mittag-Leffler law of the second kind: the non-negative variable with
// Laplace transform E[e^{-lambda M}] = sum_m (-b lambda)^m / Gamma(1+kappa m).
struct MittagLeffler {
  double kappa = 0.5;
  double b = 1.0;
};

struct MlMoments {
  double mean = 0.0;
  double variance = 0.0;
};

inline MlMoments ml_moments(const MittagLeffler& ml) {
  if (!(ml.kappa > 0.0 && ml.kappa < 1.0)) fail("bad_argument", "kappa must be in (0,1)");
  if (ml.b < 0.0) fail("bad_argument", "scale b must be >= 0");
  MlMoments m;
  m.mean = ml.b / std::tgamma(1.0 + ml.kappa);
  m.variance = ml.b * ml.b * (2.0 / std::tgamma(1.0 + 2.0 * ml.kappa) -
                              1.0 / std::pow(std::tgamma(1.0 + ml.kappa), 2));
  return m;
}

// Alternating series sum_m (-x)^m / Gamma(1+kappa m) with x = b lambda.
// Terms are monotone beyond m ~ x^{1/kappa}; the sum stops when a term drops
// below the absolute target. Cancellation guard: a term exceeding 1e12 times
// the running sum magnitude aborts with an instability error.
inline double ml_laplace(const MittagLeffler& ml, double lambda) {
  if (lambda < 0.0) fail("bad_argument", "Laplace argument must be >= 0");
  const double x = ml.b * lambda;
  if (x == 0.0) return 1.0;
  double sum = 1.0;
  double max_mag = 1.0;
  const double log_x = std::log(x);
  const double peak = std::pow(x, 1.0 / ml.kappa);
  for (int m = 1; m <= 100000; ++m) {
    const double log_term = m * log_x - std::lgamma(1.0 + ml.kappa * m);
    const double mag = std::exp(log_term);
    if (!std::isfinite(mag) || mag > 1e12 * std::max(std::abs(sum), 1.0)) {
      fail("ml_instability", "series cancellation beyond tolerance at b*lambda = " +
                                 std::to_string(x));
    }
    sum += (m % 2 == 0) ? mag : -mag;
    max_mag = std::max(max_mag, mag);
    if (mag < 1e-14 && static_cast<double>(m) > peak + 2.0) break;
    if (m == 100000) {
      fail("ml_instability", "series did not settle within the iteration budget");
    }
  }
  if (max_mag > 1e12 * std::max(std::abs(sum), 1e-300)) {
    fail("ml_instability", "series cancellation beyond tolerance");
  }
  return sum;
}

// Standard positive kappa-stable variate S with E[e^{-lambda S}] = e^{-lambda^kappa}
// (Kanter's representation, the one-sided Chambers-Mallows-Stuck case).
inline double sample_positive_stable(double kappa, RngStream& rng) {
  const double theta = 3.141592653589793 * rng.uniform_open();
  const double w = rng.exponential();
  const double num = std::sin((1.0 - kappa) * theta) *
                     std::pow(std::sin(kappa * theta), kappa / (1.0 - kappa));
  const double den = std::pow(std::sin(theta), 1.0 / (1.0 - kappa));
  const double a = num / den;
  return std::pow(a / w, (1.0 - kappa) / kappa);
}

// M = b S^{-kappa}; exact in law.
inline double sample_ml(const MittagLeffler& ml, RngStream& rng) {
  if (!(ml.kappa > 0.0 && ml.kappa < 1.0)) fail("bad_argument", "kappa must be in (0,1)");
  return ml.b * std::pow(sample_positive_stable(ml.kappa, rng), -ml.kappa);
}

// One draw of sum_k lambda(k) (M_k - mu)/sigma + a Phi with independent
// normalized Mittag-Leffler components. The vector is truncated at trunc_k;
// the l2 tail mass folds into the Gaussian weight, which keeps the first two
// moments exact.
inline double sample_mixture(const LambdaVector& lambda_star, double kappa, double b,
                             RngStream& rng, std::size_t trunc_k = 64) {
  const double sum_sq = lambda_star.sum_sq();
  if (sum_sq > 1.0 + 1e-9) fail("norm_exceeded", "lambda* l2 norm exceeds 1");
  const MittagLeffler ml{kappa, b};
  const auto mom = ml_moments(ml);
  const double sd = std::sqrt(mom.variance);
  const std::size_t k_max = std::min(trunc_k, lambda_star.size());
  double acc = 0.0;
  double used_sq = 0.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double lam = lambda_star(k);
    if (lam == 0.0) continue;
    acc += lam * (sample_ml(ml, rng) - mom.mean) / sd;
    used_sq += lam * lam;
  }
  const double gauss_w = std::sqrt(std::max(0.0, 1.0 - used_sq));
  return acc + gauss_w * rng.normal();
}

// Closed-form limiting weight vectors for the named cooling families.
// exponential: lambda(k) = sqrt(theta^-2 - 1) theta^k with theta = e^{-c kappa}
// polynomial:  the zero vector (pure Gaussian limit)
// super_exp:   two atoms (1, theta^kappa) / sqrt(1 + theta^{2 kappa})
// interweaved: sqrt(sigma_M^2 / (sigma_M^2 + var_z1)) 2^{-k/2}
struct LambdaStarExponential {
  double c = 0.0;
};
struct LambdaStarPolynomial {};
struct LambdaStarSuperExp {
  double theta = 0.0;
};
struct LambdaStarInterweaved {
  double sigma_m_sq = 0.0;  // limiting variance coefficient of Var(Z_T)/T^{2 kappa}
  double var_z1 = 0.0;      // Var(Z_1), same walk units
};

inline LambdaVector lambda_star_closed_form(const LambdaStarExponential& f, double kappa,
                                            std::size_t terms = 64) {
  if (!(f.c > 0.0)) fail("unsupported_family", "exponential closed form needs c > 0");
  const double theta = std::exp(-f.c * kappa);
  const double scale = std::sqrt(1.0 / (theta * theta) - 1.0);
  std::vector<double> w(terms);
  double t = theta;
  for (std::size_t k = 0; k < terms; ++k, t *= theta) w[k] = scale * t;
  return LambdaVector(std::move(w));
}

inline LambdaVector lambda_star_closed_form(const LambdaStarPolynomial&, double) {
  return LambdaVector(std::vector<double>{});
}

inline LambdaVector lambda_star_closed_form(const LambdaStarSuperExp& f, double kappa) {
  if (f.theta < 0.0) fail("unsupported_family", "super-exponential closed form needs theta >= 0");
  const double tk = std::pow(f.theta, kappa);
  const double norm = std::sqrt(1.0 + tk * tk);
  if (f.theta == 0.0) return LambdaVector(std::vector<double>{1.0});
  return LambdaVector(std::vector<double>{1.0 / norm, tk / norm});
}

inline LambdaVector lambda_star_closed_form(const LambdaStarInterweaved& f, double,
                                            std::size_t terms = 64) {
  if (!(f.sigma_m_sq > 0.0) || f.var_z1 < 0.0) {
    fail("unsupported_family", "interweaved closed form needs sigma_m_sq > 0, var_z1 >= 0");
  }
  const double scale = std::sqrt(f.sigma_m_sq / (f.sigma_m_sq + f.var_z1));
  std::vector<double> w(terms);
  for (std::size_t k = 0; k < terms; ++k) {
    w[k] = scale * std::pow(2.0, -0.5 * static_cast<double>(k + 1));
  }
  return LambdaVector(std::move(w));
}

}  // namespace coolwalk
