#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "ledsna/error.hpp"
#include "ledsna/metrics.hpp"

using namespace ledsna;

TEST_CASE("approximation error") {
  CHECK(approx_error(0.6076, 0.8129) == doctest::Approx(0.2053).epsilon(1e-12));
  CHECK(approx_error(0.7646, 0.7633) == doctest::Approx(0.0013).epsilon(1e-9));
  CHECK(approx_error(0.4, 0.4) == 0.0);
  CHECK(approx_error(0.1, 0.3) == approx_error(0.3, 0.1));
}

TEST_CASE("r squared") {
  const std::vector<double> f{0, 1, 1, 0};
  SUBCASE("hand example") {
    const auto r = r_squared(f, std::vector<double>{0.25, 0.75, 0.75, 0.25});
    CHECK(r.sse == doctest::Approx(0.25));
    CHECK(r.sst == doctest::Approx(1.0));
    CHECK(r.r_squared == doctest::Approx(0.75));
    CHECK(r.f_mean == 0.5);
    CHECK(r.n == 4);
  }
  SUBCASE("perfect and null models") {
    CHECK(r_squared(f, f).r_squared == 1.0);
    CHECK(r_squared(f, std::vector<double>(4, 0.5)).r_squared == 0.0);
  }
  SUBCASE("constant labels") {
    const std::vector<double> c(3, 0.7);
    const auto exact = r_squared(c, c);
    CHECK(exact.r_squared_defined);
    CHECK(exact.r_squared == 1.0);
    const auto off = r_squared(c, std::vector<double>{0.7, 0.8, 0.7});
    CHECK_FALSE(off.r_squared_defined);
    CHECK(off.r_squared == -std::numeric_limits<double>::infinity());
  }
  SUBCASE("contract") {
    CHECK_THROWS_AS(r_squared(std::vector<double>{1.0}, std::vector<double>{1.0}), ContractError);
    CHECK_THROWS_AS(r_squared(f, std::vector<double>{1.0, 2.0}), ContractError);
  }
}

TEST_CASE("r squared properties") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 50;
    std::vector<double> f(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = normal(rng);
      g[i] = f[i] + 0.5 * normal(rng);
    }
    const double r = r_squared(f, g).r_squared;
    CHECK(r <= 1.0);
    CHECK(std::abs(r - r_squared_mse_var(f, g)) <= 1e-12);
    const double a = 0.5 + 3.0 * std::abs(normal(rng)), b = normal(rng);
    std::vector<double> fa(n), ga(n);
    for (std::size_t i = 0; i < n; ++i) {
      fa[i] = a * f[i] + b;
      ga[i] = a * g[i] + b;
    }
    CHECK(std::abs(r_squared(fa, ga).r_squared - r) <= 1e-9);
  }
}
