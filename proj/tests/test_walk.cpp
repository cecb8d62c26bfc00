#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "coolwalk/exact_pmf.hpp"
#include "coolwalk/regeneration.hpp"
#include "coolwalk/stats.hpp"
#include "coolwalk/walk.hpp"

using namespace coolwalk;

namespace {

const TwoPoint kPreset{0.75, 0.25, 0.9};

// Brute-force pmf: loop over all 2^n step strings, tally per-site up/down
// counts directly, and multiply freshly computed site moments. Slower and
// structurally different from the library's incremental-ratio enumeration.
std::vector<double> brute_force_pmf(const EnvDist& dist, int n) {
  std::vector<double> pmf(2 * static_cast<std::size_t>(n) + 1, 0.0);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::map<int, std::pair<int, int>> counts;  // site -> (up, down)
    int x = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        ++counts[x].first;
        ++x;
      } else {
        ++counts[x].second;
        --x;
      }
    }
    double weight = 1.0;
    for (const auto& [site, ud] : counts) {
      weight *= dist.site_moment(ud.first, ud.second);
    }
    pmf[static_cast<std::size_t>(x + n)] += weight;
  }
  return pmf;
}

}  // namespace

TEST_CASE("degenerate walks") {
  const EnvDist dist = EnvDist::make(kPreset);
  RngStream rng = derive_stream(7, 0);
  CHECK(simulate_endpoint(dist, 0, rng).z == 0);
  const auto out = simulate_endpoint_quenched([](std::int64_t) { return 1.0; }, 50, rng, true);
  CHECK(out.z == 50);
  CHECK(out.path.size() == 51);
  CHECK(out.path.back() == 50);
}

TEST_CASE("one-step annealed law") {
  const EnvDist dist = EnvDist::make(kPreset);
  const std::int64_t reps = 100000;
  const auto z = mc_endpoints(dist, 1, reps, 99, 1);
  std::int64_t up = 0;
  for (const auto v : z) up += v == 1;
  const double freq = static_cast<double>(up) / static_cast<double>(reps);
  const double se = std::sqrt(0.7 * 0.3 / static_cast<double>(reps));
  CHECK(std::abs(freq - 0.7) < 3.0 * se);  // <omega> = 0.9*0.75 + 0.1*0.25
}

TEST_CASE("exact pmf: hand-computed values") {
  const EnvDist dist = EnvDist::make(kPreset);
  SECTION("n = 0") {
    const auto pmf = exact_annealed_pmf(dist, 0);
    CHECK(pmf.size() == 1);
    CHECK(pmf[0] == 1.0);
  }
  SECTION("n = 2") {
    const auto pmf = exact_annealed_pmf(dist, 2);
    CHECK(pmf[4] == Catch::Approx(0.49).margin(1e-12));  // uu
    CHECK(pmf[2] == Catch::Approx(0.42).margin(1e-12));  // ud + du
    CHECK(pmf[0] == Catch::Approx(0.09).margin(1e-12));  // dd
  }
  SECTION("n = 3") {
    // P(1) = uud + udu + duu
    //      = 0.7^2*0.3 + <w^2>*0.3 + <w(1-w)>*0.7
    //      = 0.147 + 0.5125*0.3 + 0.1875*0.7 = 0.432
    const auto pmf = exact_annealed_pmf(dist, 3);
    CHECK(pmf[6] == Catch::Approx(0.343).margin(1e-12));
    CHECK(pmf[4] == Catch::Approx(0.432).margin(1e-12));
    CHECK(pmf[2] == Catch::Approx(0.198).margin(1e-12));
    CHECK(pmf[0] == Catch::Approx(0.027).margin(1e-12));
    double total = 0.0;
    for (const double p : pmf) total += p;
    CHECK(total == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("size cap") {
    CHECK_THROWS_AS(exact_annealed_pmf(dist, 21), Error);
  }
}

TEST_CASE("exact pmf agrees with a brute-force enumeration") {
  const EnvDist dist = EnvDist::make(kPreset);
  const auto fast = exact_annealed_pmf(dist, 6);
  const auto brute = brute_force_pmf(dist, 6);
  for (std::size_t i = 0; i < fast.size(); ++i) {
    CHECK(fast[i] == Catch::Approx(brute[i]).margin(1e-13));
  }
  const EnvDist beta = EnvDist::make(BetaLaw{3.0, 1.0});
  const auto fast_b = exact_annealed_pmf(beta, 4);
  const auto brute_b = brute_force_pmf(beta, 4);
  double total = 0.0;
  for (std::size_t i = 0; i < fast_b.size(); ++i) {
    CHECK(fast_b[i] == Catch::Approx(brute_b[i]).margin(1e-9));
    total += fast_b[i];
  }
  CHECK(total == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("Monte Carlo histogram matches the exact law") {
  const EnvDist dist = EnvDist::make(kPreset);
  const int n = 12;
  const auto z = mc_endpoints(dist, n, 200000, 2024, 1);
  for (const auto v : z) {
    CHECK(std::abs(v) <= n);
    CHECK((v + n) % 2 == 0);
  }
  CHECK(tv_distance(z, exact_annealed_pmf(dist, n), n) < 0.012);
}

TEST_CASE("moments are deterministic across thread counts") {
  const EnvDist dist = EnvDist::make(kPreset);
  const auto a = mc_endpoints(dist, 1024, 10000, 5150, 1);
  const auto b = mc_endpoints(dist, 1024, 10000, 5150, 3);
  const auto c = mc_endpoints(dist, 1024, 10000, 5150, 7);
  CHECK(a == b);
  CHECK(a == c);
  const auto m1 = mc_moments(dist, 1024, 10000, 5150, 1);
  const auto m4 = mc_moments(dist, 1024, 10000, 5150, 4);
  CHECK(m1.mean == m4.mean);
  CHECK(m1.variance == m4.variance);
}

TEST_CASE("mc_moments trivia and ballistic mean") {
  const EnvDist dist = EnvDist::make(kPreset);
  const auto zero = mc_moments(dist, 0, 100, 1, 1);
  CHECK(zero.mean == 0.0);
  CHECK(zero.variance == 0.0);
  const auto est = mc_moments(dist, 1 << 14, 20000, 31, 1);
  CHECK(std::abs(est.mean / (1 << 14) - 0.25) < 3.0 * est.stderr_mean / (1 << 14) + 2e-3);
}

TEST_CASE("sub-ballistic scaling exponent, small grid") {
  const EnvDist dist = calibrate_to_kappa(TwoPointTemplate{0.75, 0.25}, 0.5);
  std::vector<std::pair<double, double>> mean_pts;
  for (int p = 9; p <= 13; ++p) {
    const std::int64_t n = std::int64_t{1} << p;
    const auto est = mc_moments(dist, n, 8000, sub_seed(11, p), 1);
    mean_pts.emplace_back(static_cast<double>(n), est.mean);
  }
  const auto fit = loglog_slope(mean_pts);
  CHECK(std::abs(fit.estimate - 0.5) < 0.12);
}

TEST_CASE("sub-ballistic right tail decays monotonically") {
  const EnvDist dist = calibrate_to_kappa(TwoPointTemplate{0.75, 0.25}, 0.5);
  const std::int64_t n = 1 << 12;
  const auto z = mc_endpoints(dist, n, 40000, 88, 1);
  const double scale = std::pow(static_cast<double>(n), 0.5);
  double prev = 1.0;
  for (const double x : {0.5, 1.0, 2.0, 4.0}) {
    std::int64_t hits = 0;
    for (const auto v : z) hits += static_cast<double>(v) > x * scale;
    const double p = static_cast<double>(hits) / static_cast<double>(z.size());
    CHECK(p <= prev);
    prev = p;
  }
  CHECK(prev >= 0.0);
}

TEST_CASE("truncated second moment edge cases") {
  const EnvDist dist = EnvDist::make(kPreset);
  const std::int64_t n = 512, reps = 20000;
  const auto z = mc_endpoints(dist, n, reps, 13, 1);
  const auto wide = truncated_second_moment_of(z, 2.0 * static_cast<double>(n));
  // inactive truncation equals the plain (biased) central second moment
  const auto m = moments_of(z, n, 13);
  const double biased = m.variance * static_cast<double>(reps - 1) / static_cast<double>(reps);
  CHECK(wide.value == Catch::Approx(biased).epsilon(1e-12));
  CHECK(truncated_second_moment_of(z, 0.0).value == 0.0);
  CHECK_THROWS_AS(threshold_value(FixedThreshold{-1.0}, n), Error);
  // the a_kn rule takes the larger branch
  const double akn = threshold_value(AknThreshold{100.0, 16.0}, n);
  const double lt = std::log(16.0);
  CHECK(akn == Catch::Approx(std::max(100.0 / std::sqrt(std::log(100.0)), 4.0 * lt * lt * lt * lt)));
}

TEST_CASE("left tail curve against the exact oracle") {
  const EnvDist dist = EnvDist::make(kPreset);
  const int n = 16;
  const double v = dist.speed();
  const auto z = mc_endpoints(dist, n, 200000, 5, 1);
  const auto pmf = exact_annealed_pmf(dist, n);
  const std::vector<double> xs{1.0, 2.0, 4.0, (1.0 + v) * n + 1.0};
  const auto curve = left_tail_curve_of(z, n, v, xs);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    double exact = 0.0;
    for (int zi = -n; zi <= n; ++zi) {
      if (zi < v * n - xs[i]) exact += pmf[static_cast<std::size_t>(zi + n)];
    }
    CHECK(std::abs(curve[i].p - exact) < 3.0 * curve[i].stderr_p + 1e-9);
  }
  CHECK(curve.back().p == 0.0);  // beyond the support
}

TEST_CASE("regeneration detection on a monotone path") {
  std::vector<std::int32_t> path{0, 1, 2, 3, 4, 5};
  const auto split = regeneration_split(path, 3);
  REQUIRE(split.points.size() == 5);
  for (std::size_t i = 0; i < split.points.size(); ++i) {
    CHECK(split.points[i].time == static_cast<std::int64_t>(i + 1));
    CHECK(split.points[i].level == static_cast<std::int64_t>(i + 1));
  }
  CHECK(split.last_censored);  // final level 5 is within margin 3 of itself
}

TEST_CASE("censoring clears once the path runs past the margin") {
  // regens stop at level 8 (the tail dips to 8 and the old max 10 blocks
  // later candidates); final level 10 sits 2 above the last regen
  std::vector<std::int32_t> path{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 9, 8, 9, 10};
  const auto split = regeneration_split(path, 2);
  REQUIRE_FALSE(split.points.empty());
  CHECK(split.points.back().level == 8);
  CHECK(split.points.back().time == 8);
  CHECK_FALSE(split.last_censored);
  CHECK(regeneration_split(path, 3).last_censored);
}

TEST_CASE("regeneration statistics of the ballistic preset") {
  const EnvDist dist = EnvDist::make(kPreset);
  double sum_dz = 0.0, sum_dr = 0.0;
  std::vector<double> gaps;
  for (int rep = 0; rep < 12; ++rep) {
    RngStream rng = derive_stream(777, static_cast<std::uint64_t>(rep));
    const auto walk = simulate_endpoint(dist, 1 << 17, rng, true);
    const auto split = regeneration_split(walk.path, 50);
    REQUIRE(split.points.size() > 1000);
    // drop the first pair (different law) and any censored tail point
    const std::size_t last = split.points.size() - (split.last_censored ? 1 : 0);
    for (std::size_t i = 2; i < last; ++i) {
      sum_dz += static_cast<double>(split.points[i].level - split.points[i - 1].level);
      sum_dr += static_cast<double>(split.points[i].time - split.points[i - 1].time);
      gaps.push_back(static_cast<double>(split.points[i].time - split.points[i - 1].time));
    }
  }
  CHECK(sum_dz > 0.0);
  const double v_hat = sum_dz / sum_dr;
  CHECK(std::abs(v_hat - dist.speed()) < 0.1 * dist.speed());
  // survival tail of the gaps: log-log slope near -kappa = -2. The power
  // regime starts around gap ~ 10^2; below that the light-tail bulk bends
  // the curve.
  std::vector<std::pair<double, double>> pts;
  for (const double x : {128.0, 256.0, 512.0, 1024.0}) {
    std::int64_t hits = 0;
    for (const double g : gaps) hits += g > x;
    REQUIRE(hits > 10);
    pts.emplace_back(x, static_cast<double>(hits) / static_cast<double>(gaps.size()));
  }
  const auto fit = loglog_slope(pts);
  CHECK(fit.estimate == Catch::Approx(-2.0).margin(0.4));
}
