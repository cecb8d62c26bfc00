#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "coolwalk/numeric.hpp"
#include "coolwalk/rng.hpp"
#include "coolwalk/stats.hpp"

using namespace coolwalk;

TEST_CASE("two-sample KS basics") {
  std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  CHECK(ks_two_sample(a, a).statistic == 0.0);

  RngStream rng = derive_stream(10, 0);
  std::vector<double> x(10000), y(10000), z(10000);
  for (auto& v : x) v = rng.normal();
  for (auto& v : y) v = rng.normal() + 3.0;
  for (auto& v : z) v = rng.normal();
  CHECK(ks_two_sample(x, y).p_value < 1e-6);
  CHECK(ks_two_sample(x, z).p_value > 0.01);

  // symmetry and invariance under a common strictly monotone transform
  const auto ab = ks_two_sample(x, y);
  const auto ba = ks_two_sample(y, x);
  CHECK(ab.statistic == ba.statistic);
  std::vector<double> ex(x.size()), ey(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) ex[i] = std::exp(x[i]);
  for (std::size_t i = 0; i < y.size(); ++i) ey[i] = std::exp(y[i]);
  CHECK(ks_two_sample(ex, ey).statistic == Catch::Approx(ab.statistic).margin(1e-15));
}

TEST_CASE("one-sample KS against a cdf") {
  RngStream rng = derive_stream(11, 0);
  std::vector<double> u(20000);
  for (auto& v : u) v = rng.uniform();
  const auto ks = ks_one_sample(u, [](double x) { return std::min(1.0, std::max(0.0, x)); });
  CHECK(ks.p_value > 0.01);
  std::vector<double> shifted(u);
  for (auto& v : shifted) v = v * 0.8;
  CHECK(ks_one_sample(shifted, [](double x) { return std::min(1.0, std::max(0.0, x)); }).p_value <
        1e-6);
}

TEST_CASE("log-log slope fits") {
  std::vector<std::pair<double, double>> pts;
  for (const double n : {16.0, 64.0, 256.0, 1024.0, 8192.0}) pts.emplace_back(n, std::pow(n, 0.7));
  const auto fit = loglog_slope(pts);
  CHECK(fit.estimate == Catch::Approx(0.7).margin(1e-12));
  CHECK(fit.residual_norm < 1e-12);

  std::vector<std::pair<double, double>> flat;
  for (const double n : {16.0, 64.0, 256.0}) flat.emplace_back(n, 5.0);
  CHECK(loglog_slope(flat).estimate == Catch::Approx(0.0).margin(1e-12));

  CHECK_THROWS_AS(loglog_slope({{1.0, 1.0}, {2.0, 2.0}}), Error);
  CHECK_THROWS_AS(loglog_slope({{1.0, 1.0}, {2.0, -2.0}, {3.0, 1.0}}), Error);
}

TEST_CASE("tail plateau statistic") {
  const std::int64_t n = 1 << 16;
  const double v = 0.25;
  const double nv = static_cast<double>(n) * v;
  std::vector<TailCurvePoint> pts;
  for (const double x : {1000.0, 2000.0, 4000.0, 8000.0}) {
    pts.push_back({x, 3.0 * (nv - x) / (x * x), 0.0});
  }
  const auto fit = tail_plateau(pts, n, v);
  CHECK(fit.estimate == Catch::Approx(3.0).margin(1e-12));
  CHECK(fit.residual_norm < 1e-12);

  std::vector<TailCurvePoint> wrong;
  for (const double x : {1000.0, 2000.0, 4000.0, 8000.0}) {
    wrong.push_back({x, (nv - x) / x, 0.0});
  }
  const auto bad = tail_plateau(wrong, n, v);
  CHECK(bad.residual_norm > 0.2);

  CHECK_THROWS_AS(tail_plateau({{nv + 1.0, 0.1, 0.0}}, n, v), Error);
}
