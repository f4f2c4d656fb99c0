#include <doctest.h>

#include <cmath>
#include <random>

#include "dagmc/adapt.hpp"
#include "dagmc/error.hpp"
#include "helpers.hpp"

using namespace dagmc;
using linalg::LowerTriangular;

namespace {

AdaptState state_1d(double mean, double l) {
  return AdaptState{1.0, LowerTriangular::from_rows({{l}}), {mean}, 0};
}

}  // namespace

TEST_CASE("weight schedules") {
  CHECK(eta(WeightSchedule::reciprocal(), 1) == 0.5);
  CHECK(eta(WeightSchedule::reciprocal(), 9) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(eta(WeightSchedule::constant(0.01), 1000000) == 0.01);
  CHECK(eta(WeightSchedule::power(0.6), 99) ==
        doctest::Approx(0.06309573444801933).epsilon(1e-14));
  CHECK_THROWS_AS(WeightSchedule::constant(1.0), InvalidParameter);
  CHECK_THROWS_AS(WeightSchedule::constant(0.0), InvalidParameter);
  CHECK_THROWS_AS(WeightSchedule::power(0.5), InvalidParameter);
  CHECK_THROWS_AS(WeightSchedule::power(1.2), InvalidParameter);
  CHECK_NOTHROW(WeightSchedule::power(1.0));
  for (std::uint64_t n : {1ULL, 2ULL, 1000ULL, 1000000000ULL}) {
    for (const auto& s : {WeightSchedule::reciprocal(), WeightSchedule::power(0.7),
                          WeightSchedule::constant(0.3)}) {
      const double e = eta(s, n);
      CHECK(e > 0.0);
      CHECK(e < 1.0);
    }
  }
}

TEST_CASE("am_update examples") {
  const auto s = am_update(state_1d(0.0, 1.0), std::vector<double>{2.0}, 0.5);
  CHECK(s.mean[0] == 1.0);
  CHECK(s.shape(0, 0) == doctest::Approx(1.5811388300841898).epsilon(1e-15));
  CHECK(s.theta == 1.0);

  const auto base = AdaptState{0.7, LowerTriangular::from_rows({{2, 0}, {1, 3}}), {1.0, -2.0}, 4};
  const auto same = am_update(base, base.mean, 0.3);
  CHECK(same.mean == base.mean);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      CHECK(same.shape(i, j) == doctest::Approx(std::sqrt(0.7) * base.shape(i, j)).epsilon(1e-14));
    }
  }

  const auto two = am_update(AdaptState::initial(std::vector<double>{0, 0}, 1.0),
                             std::vector<double>{1, 1}, 0.5);
  const auto oracle = linalg::chol_factor(linalg::SymmetricMatrix::from_rows({{1, 0.5}, {0.5, 1}}));
  CHECK(testing::rel_diff(two.shape.entries(), oracle.entries()) <= 1e-15);
}

TEST_CASE("rb_am_update examples") {
  const auto base = state_1d(0.0, 1.0);
  const auto s = rb_am_update(base, std::vector<double>{0.0}, std::vector<double>{2.0}, 0.5, 0.5);
  CHECK(s.mean[0] == 0.5);
  CHECK(s.shape(0, 0) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-15));

  std::mt19937_64 rng(21);
  std::normal_distribution<double> n01;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t d = 1 + rep % 5;
    AdaptState st{1.0, testing::random_lower(d, rng), std::vector<double>(d), 3};
    for (auto& m : st.mean) m = n01(rng);
    std::vector<double> x(d);
    std::vector<double> y(d);
    for (auto& v : x) v = n01(rng);
    for (auto& v : y) v = n01(rng);
    const double e = 0.05 + 0.9 * std::uniform_real_distribution<double>()(rng);
    const auto a1 = rb_am_update(st, x, y, 1.0, e);
    const auto r1 = am_update(st, y, e);
    REQUIRE(a1.mean == r1.mean);
    REQUIRE(testing::rel_diff(a1.shape.entries(), r1.shape.entries()) <= 1e-14);
    const auto a0 = rb_am_update(st, x, y, 0.0, e);
    const auto r0 = am_update(st, x, e);
    REQUIRE(a0.mean == r0.mean);
    REQUIRE(testing::rel_diff(a0.shape.entries(), r0.shape.entries()) <= 1e-14);
  }
}

TEST_CASE("ascm_update examples") {
  CHECK(ascm_update(1.0, 0.234, 0.1, 0.234) == 1.0);
  CHECK(ascm_update(2.0, 0.0, 0.5, 0.234) == 1.0);
  CHECK(ascm_update(1.0, 0.468, 0.1, 0.234) == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(std::abs(ascm_update(1.0, 0.468, 0.1, 0.234) - 1.1) <= 1e-15);
}

TEST_CASE("amcmc_scaling examples") {
  CHECK(amcmc_scaling(1.0, 0.5, 9999) == doctest::Approx(1.010050167084168).epsilon(1e-15));
  CHECK(amcmc_scaling(1.0, 0.44, 9999) == doctest::Approx(0.9900498337491681).epsilon(1e-15));
  CHECK(amcmc_scaling(2.0, 0.0, 0) == doctest::Approx(1.9800996674983362).epsilon(1e-15));
  // Beyond k = 9999 the step is min(0.01, 1/sqrt(k+1)) <= 0.01.
  for (std::uint64_t k : {9999ULL, 20000ULL, 1000000ULL}) {
    for (double a : {0.0, 0.44, 0.45, 1.0}) {
      const double r = amcmc_scaling(3.0, a, k) / 3.0;
      CHECK(r <= std::exp(0.01) * (1 + 1e-15));
      CHECK(r >= std::exp(-0.01) * (1 - 1e-15));
    }
  }
}

TEST_CASE("default target acceptance") {
  CHECK(default_target_alpha(1) == 0.44);
  CHECK(default_target_alpha(2) == 0.234);
  CHECK(default_target_alpha(100) == 0.234);
}

TEST_CASE("mixture probability") {
  CHECK(mix_probability(MixSchedule::constant(0.0), 17) == 0.0);
  CHECK(mix_probability(MixSchedule::constant(1.0), 17) == 1.0);
  const auto seq = MixSchedule::user([](std::uint64_t n) { return 1.0 / static_cast<double>(n); });
  CHECK(mix_probability(seq, 4) == 0.25);
  CHECK(mix_probability(seq, 1000000) < 1e-5);
  const auto wild = MixSchedule::user([](std::uint64_t n) { return n == 1 ? -3.0 : 7.0; });
  CHECK(mix_probability(wild, 1) == 0.0);
  CHECK(mix_probability(wild, 2) == 1.0);
  CHECK_THROWS_AS(MixSchedule::constant(1.5), InvalidParameter);
}

TEST_CASE("burn-in strategies") {
  using K = BurninStrategy::Kind;
  CHECK(adaptation_active({K::greedy, 100}, 1) == AdaptationPhase{true, false});
  CHECK(adaptation_active({K::greedy, 100}, 500) == AdaptationPhase{true, false});
  CHECK(adaptation_active({K::traditional, 100}, 50) == AdaptationPhase{true, true});
  CHECK(adaptation_active({K::traditional, 100}, 150) == AdaptationPhase{true, false});
  CHECK(adaptation_active({K::freeze, 100}, 50) == AdaptationPhase{true, false});
  CHECK(adaptation_active({K::freeze, 100}, 150) == AdaptationPhase{false, false});
  CHECK(adaptation_active({K::freeze, 100}, 100) == AdaptationPhase{true, false});
  CHECK(adaptation_active({K::traditional, 100}, 101) == AdaptationPhase{true, false});
}

TEST_CASE("running mean equals the arithmetic mean") {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> n01;
  for (std::size_t d = 1; d <= 5; ++d) {
    std::vector<double> x0(d);
    for (auto& v : x0) v = 3.0 * n01(rng);
    auto st = AdaptState::initial(x0, 1.0);
    std::vector<double> sum = x0;
    const std::uint64_t n_steps = 1000;
    for (std::uint64_t n = 1; n <= n_steps; ++n) {
      std::vector<double> x(d);
      for (std::size_t i = 0; i < d; ++i) {
        x[i] = 3.0 * n01(rng) + static_cast<double>(i);
        sum[i] += x[i];
      }
      am_update_inplace(st, x, eta(WeightSchedule::reciprocal(), n));
    }
    for (std::size_t i = 0; i < d; ++i) {
      CHECK(std::abs(st.mean[i] - sum[i] / static_cast<double>(n_steps + 1)) <= 1e-12);
    }
  }
}

TEST_CASE("Cholesky-maintained covariance follows the direct recursion") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n01;
  for (std::size_t d = 1; d <= 5; ++d) {
    std::vector<double> x0(d, 0.0);
    auto st = AdaptState::initial(x0, 1.0);
    std::vector<double> mean = x0;
    std::vector<double> cov(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) cov[i * d + i] = 1.0;
    for (std::uint64_t n = 1; n <= 1000; ++n) {
      std::vector<double> x(d);
      for (auto& v : x) v = 2.0 * n01(rng) + 1.0;
      const double e = eta(WeightSchedule::reciprocal(), n);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          cov[i * d + j] = (1 - e) * cov[i * d + j] + e * (x[i] - mean[i]) * (x[j] - mean[j]);
        }
      }
      for (std::size_t i = 0; i < d; ++i) mean[i] = (1 - e) * mean[i] + e * x[i];
      am_update_inplace(st, x, e);
    }
    const auto g = st.shape.gram();
    CHECK(testing::rel_diff(g.entries(), cov) <= 1e-9);
    CHECK(testing::rel_diff(st.mean, mean) <= 1e-12);
  }
}

TEST_CASE("updates keep theta and the shape diagonal positive") {
  std::mt19937_64 rng(24);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;
  AdaptState st = AdaptState::initial(std::vector<double>{0, 0, 0}, 1.0);
  for (std::uint64_t n = 1; n <= 5000; ++n) {
    std::vector<double> x(3);
    std::vector<double> y(3);
    for (auto& v : x) v = n01(rng) * 1e3;
    for (auto& v : y) v = n01(rng) * 1e-3;
    const double e = std::min(0.999, u01(rng) + 1e-6);
    const double alpha = u01(rng) < 0.2 ? 0.0 : u01(rng);
    if (n % 2 == 0) {
      am_update_inplace(st, x, e);
    } else {
      rb_am_update_inplace(st, x, y, alpha, e);
    }
    st.theta = ascm_update(st.theta, alpha, e, 0.234);
    REQUIRE(st.theta > 0.0);
    for (std::size_t i = 0; i < 3; ++i) REQUIRE(st.shape(i, i) > 0.0);
  }
}

TEST_CASE("initial adaptation state") {
  const auto st = AdaptState::initial(std::vector<double>{1, 2, 3, 4}, AdaptState::default_theta(4));
  CHECK(st.theta == doctest::Approx(1.19));
  CHECK(st.shape == LowerTriangular::identity(4));
  CHECK(st.mean == std::vector<double>{1, 2, 3, 4});
  CHECK(st.step == 0);
}
