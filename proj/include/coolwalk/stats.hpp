#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "coolwalk/error.hpp"

namespace coolwalk {

struct FitReport {
  double estimate = 0.0;
  double stderr_estimate = 0.0;
  double residual_norm = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

namespace detail {

// Asymptotic Kolmogorov survival Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-10) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

inline double ks_p_value(double d, double ne) {
  const double rt = std::sqrt(ne);
  return kolmogorov_q((rt + 0.12 + 0.11 / rt) * d);
}

}  // namespace detail

// Two-sample Kolmogorov-Smirnov: sup distance between the ECDFs, with the
// usual asymptotic p-value at effective size n1 n2 / (n1 + n2).
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail("bad_argument", "KS needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double va = a[i], vb = b[j];
    if (va <= vb) {
      while (i < a.size() && a[i] == va) ++i;
    }
    if (vb <= va) {
      while (j < b.size() && b[j] == vb) ++j;
    }
    const double fa = static_cast<double>(i) / na;
    const double fb = static_cast<double>(j) / nb;
    d = std::max(d, std::abs(fa - fb));
  }
  KsResult out;
  out.statistic = d;
  out.p_value = detail::ks_p_value(d, na * nb / (na + nb));
  return out;
}

// One-sample KS against a callable CDF.
inline KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) fail("bad_argument", "KS needs a non-empty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  KsResult out;
  out.statistic = d;
  out.p_value = detail::ks_p_value(d, n);
  return out;
}

// Least-squares slope of log(value) against log(n).
inline FitReport loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) fail("bad_argument", "slope fit needs at least 3 points");
  std::vector<double> lx, ly;
  for (const auto& [n, v] : points) {
    if (!(n > 0.0) || !(v > 0.0)) fail("bad_argument", "slope fit needs positive coordinates");
    lx.push_back(std::log(n));
    ly.push_back(std::log(v));
  }
  const double m = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) fail("bad_argument", "slope fit needs distinct n values");
  FitReport fit;
  fit.estimate = sxy / sxx;
  double rss = 0.0;
  const double intercept = my - fit.estimate * mx;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - intercept - fit.estimate * lx[i];
    rss += r * r;
  }
  fit.residual_norm = std::sqrt(rss / m);
  fit.stderr_estimate = points.size() > 2
                            ? std::sqrt(rss / (m - 2.0) / sxx)
                            : 0.0;
  fit.window_lo = std::exp(lx.front());
  fit.window_hi = std::exp(lx.back());
  return fit;
}

struct TailCurvePoint {
  double x = 0.0;
  double p = 0.0;
  double stderr_p = 0.0;
};

// Plateau statistic K(x) = p(x) x^2 / (nv - x); inverse-variance weighted
// mean over the window, with the weighted RMS deviation (relative to the
// estimate) as the dispersion diagnostic.
inline FitReport tail_plateau(const std::vector<TailCurvePoint>& points, std::int64_t n,
                              double v) {
  if (points.empty()) fail("bad_argument", "plateau fit needs points");
  if (!(v > 0.0)) fail("bad_argument", "plateau fit needs positive speed");
  const double nv = static_cast<double>(n) * v;
  double wsum = 0.0, wk = 0.0;
  std::vector<std::pair<double, double>> kept;  // (K_i, weight)
  FitReport fit;
  fit.window_lo = points.front().x;
  fit.window_hi = points.back().x;
  for (const auto& pt : points) {
    if (!(pt.x > 0.0) || pt.x >= nv) fail("bad_argument", "plateau point outside (0, nv)");
    const double scale = pt.x * pt.x / (nv - pt.x);
    const double k = pt.p * scale;
    const double se = pt.stderr_p > 0.0 ? pt.stderr_p * scale : 1.0;
    const double w = 1.0 / (se * se);
    kept.emplace_back(k, w);
    wsum += w;
    wk += w * k;
  }
  fit.estimate = wk / wsum;
  fit.stderr_estimate = std::sqrt(1.0 / wsum);
  double disp = 0.0;
  for (const auto& [k, w] : kept) disp += w * (k - fit.estimate) * (k - fit.estimate);
  disp = std::sqrt(disp / wsum);
  fit.residual_norm = fit.estimate != 0.0 ? disp / std::abs(fit.estimate) : disp;
  return fit;
}

// Simple ECDF evaluator for plotting output.
inline std::vector<std::pair<double, double>> ecdf(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(sample.size());
  const double n = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out.emplace_back(sample[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

}  // namespace coolwalk
