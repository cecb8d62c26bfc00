#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "coolwalk/cooling.hpp"
#include "coolwalk/lambda.hpp"

using namespace coolwalk;

TEST_CASE("tau and ell basics") {
  const CoolingMap unit((Constant{1}));
  CHECK(unit.tau(0) == 0);
  CHECK(unit.ell(10) == 10);
  CHECK(unit.effective_increments(4) == std::vector<std::int64_t>{1, 1, 1, 1});

  const CoolingMap tri((Polynomial{1.0, 1.0}));  // T_k = k
  for (std::int64_t k = 1; k <= 50; ++k) CHECK(tri.tau(k) == k * (k + 1) / 2);

  const CoolingMap custom((Custom{{3, 4}}));
  CHECK(custom.ell(5) == 1);  // tau(1)=3 <= 5 < tau(2)=7
  CHECK(custom.effective_increments(5) == std::vector<std::int64_t>{3, 2});
  CHECK(custom.effective_increments(7) == std::vector<std::int64_t>{3, 4});
}

TEST_CASE("effective increments always sum to the horizon") {
  const std::vector<CoolingMap> maps{
      CoolingMap(Constant{3}),         CoolingMap(Polynomial{1.5, 1.3}),
      CoolingMap(Exponential{1.0, 0.8}), CoolingMap(InterweavedMix{0.5}),
      CoolingMap(OscillationK2{}),     CoolingMap(Custom{{5, 1, 7, 2, 2, 9}})};
  RngStream rng = derive_stream(3, 3);
  for (const auto& map : maps) {
    for (int trial = 0; trial < 60; ++trial) {
      const std::int64_t n = 1 + static_cast<std::int64_t>(rng.uniform() * 300.0);
      std::int64_t total = 0;
      for (const std::int64_t t : map.effective_increments(n)) total += t;
      CHECK(total == n);
      std::int64_t hist_total = 0, hist_blocks = 0;
      for (const auto& [T, count] : map.increment_histogram(n)) {
        hist_total += T * count;
        hist_blocks += count;
      }
      CHECK(hist_total == n);
      CHECK(hist_blocks == static_cast<std::int64_t>(map.effective_increments(n).size()));
    }
  }
}

TEST_CASE("overflow guards on fast-growing families") {
  const CoolingMap se((SuperExp{1.0}));
  CHECK(se.increment(1) >= 1);
  CHECK_THROWS_AS(se.increment(5), Error);  // exp(e^5) is far beyond int64
  const CoolingMap ex((Exponential{1.0, 1.0}));
  CHECK_THROWS_AS(ex.tau(200), Error);
}

TEST_CASE("interweaved map places growing blocks at powers of two") {
  const CoolingMap map((InterweavedMix{0.5}));
  CHECK(map.increment(1) == 1);
  CHECK(map.increment(2) == 1);   // i=1: floor(2^0) = 1
  CHECK(map.increment(4) == 2);   // i=2: 2^(1/(2*0.5)) = 2
  CHECK(map.increment(8) == 4);
  CHECK(map.increment(16) == 8);
  CHECK(map.increment(15) == 1);
  // tau(16) = 16 + (1-1) + (2-1) + (4-1) + (8-1)
  CHECK(map.tau(16) == 16 + 0 + 1 + 3 + 7);
}

TEST_CASE("oscillation map bookkeeping") {
  const CoolingMap map((OscillationK2{}));
  CHECK(oscillation_block(1).r == 4);
  CHECK(oscillation_block(1).m == 4);
  CHECK(oscillation_block(4).r == 262144);
  CHECK(oscillation_block(4).m == 65536);
  CHECK(map.increment(4) == 4);
  CHECK(map.increment(32) == 16);
  CHECK(map.increment(31) == 1);
  // tau(r_4) = r_4 + sum_{i<=4} (m_i - 1)
  CHECK(map.tau(262144) == 262144 + 3 + 15 + 255 + 65535);
  CHECK(oscillation_horizon(map, 4, 0.0) == 327952);
  const auto hist = map.increment_histogram(oscillation_horizon(map, 4, 0.0));
  std::int64_t ones = 0;
  for (const auto& [T, count] : hist) {
    if (T == 1) ones = count;
  }
  CHECK(ones == 262144 - 4);
}

TEST_CASE("sorted closed-form weights") {
  const CoolingMap map((Custom{{2, 4, 8}}));
  const LambdaVector lam = tilde_lambda(map, 14, 0.5);
  const auto sorted = lam.sorted_desc();
  REQUIRE(sorted.size() == 3);
  CHECK(sorted[0] == Catch::Approx(std::sqrt(8.0 / 14.0)).margin(1e-12));
  CHECK(sorted[1] == Catch::Approx(std::sqrt(4.0 / 14.0)).margin(1e-12));
  CHECK(sorted[2] == Catch::Approx(std::sqrt(2.0 / 14.0)).margin(1e-12));
  CHECK(lam.sum_sq() == Catch::Approx(1.0).margin(1e-12));

  // single block: weight vector (1)
  CHECK(tilde_lambda(map, 2, 0.5).weights() == std::vector<double>{1.0});
  // uniform small weights for the unit map
  const auto uniform = tilde_lambda(CoolingMap(Constant{1}), 10000, 0.5);
  for (const double w : uniform.weights()) CHECK(w == Catch::Approx(0.01).margin(1e-12));
}

TEST_CASE("tilde weights converge to the exponential closed form") {
  // T_k = 4^k, kappa = 1/2: theta = 1/2, lambda*(k) = sqrt(3) 2^{-k}
  const CoolingMap map((Exponential{0.25, std::log(4.0)}));
  const std::int64_t n = map.tau(14);
  const auto head = tilde_lambda(map, n, 0.5).sorted_desc();
  for (int k = 1; k <= 4; ++k) {
    const double target = std::sqrt(3.0) * std::pow(2.0, -k);
    CHECK(head[static_cast<std::size_t>(k - 1)] == Catch::Approx(target).margin(0.01));
  }
}

TEST_CASE("empirical weights from a variance table") {
  const CoolingMap map((Custom{{4, 4, 4, 4}}));
  auto equal_var = [](std::int64_t) { return 2.5; };
  const auto lam = empirical_lambda_with(map, 16, equal_var);
  for (const double w : lam.weights()) CHECK(w == Catch::Approx(0.5).margin(1e-12));

  const CoolingMap two((Custom{{8, 4}}));
  auto ratio_var = [](std::int64_t T) { return T == 8 ? 4.0 : 1.0; };
  const auto lam2 = empirical_lambda_with(two, 12, ratio_var);
  CHECK(lam2.weights()[0] == Catch::Approx(2.0 / std::sqrt(5.0)).margin(1e-12));
  CHECK(lam2.weights()[1] == Catch::Approx(1.0 / std::sqrt(5.0)).margin(1e-12));
}

TEST_CASE("gaussian remainder weight") {
  CHECK(a_of_lambda(LambdaVector(std::vector<double>{})) == 1.0);
  CHECK(a_of_lambda(LambdaVector(std::vector<double>{1.0})) == 0.0);
  std::vector<double> geo;
  for (int k = 1; k <= 60; ++k) geo.push_back(std::pow(2.0, -(k + 1) / 2.0));
  CHECK(a_of_lambda(LambdaVector(geo)) == Catch::Approx(std::sqrt(0.5)).margin(1e-9));
  CHECK_THROWS_AS(a_of_lambda(LambdaVector(std::vector<double>{1.0, 0.2})), Error);
}

TEST_CASE("mixture designer, geometric target") {
  auto lambda_star = [](int k) { return std::pow(2.0, -(k + 1) / 2.0); };
  const DesignedMixture mix = construct_mixture_map(lambda_star, 0.5, 8);
  const auto& designed = std::get<Designed>(mix.map.family());
  // K_j = 2^j: N_1 = 3, N_2 = 9, N_3 = 20
  REQUIRE(mix.block_ends.size() == 8);
  CHECK(mix.block_ends[0] == 3);
  CHECK(mix.block_ends[1] == 9);
  CHECK(mix.block_ends[2] == 20);
  // first block all ones; second block starts 6, 3 then four fillers of 3
  CHECK(designed.increments[0] == 1);
  CHECK(designed.increments[1] == 1);
  CHECK(designed.increments[2] == 1);
  CHECK(designed.increments[3] == 6);
  CHECK(designed.increments[4] == 3);
  for (int i = 5; i < 9; ++i) CHECK(designed.increments[static_cast<std::size_t>(i)] == 3);
  CHECK(mix.n_j[0] == 3);

  // block dominance: earlier increments never exceed the fillers of block j
  for (std::size_t j = 1; j < mix.block_ends.size(); ++j) {
    std::int64_t prev_max = 0;
    for (std::int64_t k = 0; k < mix.block_ends[j - 1]; ++k) {
      prev_max = std::max(prev_max, designed.increments[static_cast<std::size_t>(k)]);
    }
    std::int64_t block_min = std::numeric_limits<std::int64_t>::max();
    for (std::int64_t k = mix.block_ends[j - 1]; k < mix.block_ends[j]; ++k) {
      block_min = std::min(block_min, designed.increments[static_cast<std::size_t>(k)]);
    }
    CHECK(prev_max <= block_min);
  }

  // sorted weights at n_j approach lambda*
  const auto head = tilde_lambda(mix.map, mix.n_j.back(), 0.5).sorted_desc();
  for (int k = 1; k <= 5; ++k) {
    CHECK(head[static_cast<std::size_t>(k - 1)] ==
          Catch::Approx(lambda_star(k)).margin(0.02));
  }
}

TEST_CASE("mixture designer, degenerate finite support") {
  const DesignedMixture mix = construct_mixture_map(std::vector<double>{1.0}, 0.5, 6);
  const auto& designed = std::get<Designed>(mix.map.family());
  // a = 0: no fillers, one growing block per round
  CHECK(designed.increments.size() == 6);
  for (std::size_t i = 1; i < designed.increments.size(); ++i) {
    CHECK(designed.increments[i] > designed.increments[i - 1]);
  }
  const auto head = tilde_lambda(mix.map, mix.n_j.back(), 0.5).sorted_desc();
  CHECK(head[0] == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("designer rejects bad targets") {
  CHECK_THROWS_AS(construct_mixture_map(std::vector<double>{0.9, 0.9}, 0.5, 3), Error);
  auto not_monotone = [](int k) { return k == 2 ? 0.9 : 0.1; };
  CHECK_THROWS_AS(construct_mixture_map(not_monotone, 0.5, 3), Error);
}
