#include <doctest.h>

#include <array>
#include <cmath>

#include "tcd/hermite.hpp"

using namespace tcd;

TEST_CASE("Hermite shapes satisfy the cardinal conditions") {
  const double h = 0.37;
  // Value shapes are 1/0 at their own/other node; derivative shapes have unit
  // slope (the h factor makes coefficients equal true nodal derivatives).
  const auto v0 = hermite_shapes(0.0, h, 0);
  CHECK(v0[0] == doctest::Approx(1.0));
  CHECK(v0[1] == doctest::Approx(0.0));
  CHECK(v0[2] == doctest::Approx(0.0));
  CHECK(v0[3] == doctest::Approx(0.0));
  const auto v1 = hermite_shapes(1.0, h, 0);
  CHECK(v1[0] == doctest::Approx(0.0));
  CHECK(v1[2] == doctest::Approx(1.0));
  const auto d0 = hermite_shapes(0.0, h, 1);
  CHECK(d0[0] == doctest::Approx(0.0));
  CHECK(d0[1] == doctest::Approx(1.0));
  CHECK(d0[3] == doctest::Approx(0.0));
  const auto d1 = hermite_shapes(1.0, h, 1);
  CHECK(d1[1] == doctest::Approx(0.0));
  CHECK(d1[3] == doctest::Approx(1.0));
}

TEST_CASE("Hermite shapes reproduce cubics exactly") {
  // p(x) = 2 - x + 3x^2 - 0.5x^3 on an element [a, a+h].
  const auto p = [](double x) { return 2.0 - x + 3.0 * x * x - 0.5 * x * x * x; };
  const auto dp = [](double x) { return -1.0 + 6.0 * x - 1.5 * x * x; };
  const auto d2p = [](double x) { return 6.0 - 3.0 * x; };
  const auto d3p = [](double) { return -3.0; };
  const double a = 0.3, h = 0.8;
  const double c[4] = {p(a), dp(a), p(a + h), dp(a + h)};
  for (double t : {0.0, 0.17, 0.5, 0.83, 1.0}) {
    const double x = a + t * h;
    for (int d = 0; d <= 3; ++d) {
      const auto s = hermite_shapes(t, h, d);
      const double val = c[0] * s[0] + c[1] * s[1] + c[2] * s[2] + c[3] * s[3];
      const double ref = d == 0 ? p(x) : d == 1 ? dp(x) : d == 2 ? d2p(x) : d3p(x);
      CHECK(val == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("Hermite derivative shapes match finite differences") {
  const double h = 1.3, t = 0.41, eps = 1e-6;
  for (int d = 0; d < 3; ++d) {
    const auto lo = hermite_shapes(t - eps, h, d);
    const auto hi = hermite_shapes(t + eps, h, d);
    const auto mid = hermite_shapes(t, h, d + 1);
    for (int k = 0; k < 4; ++k) {
      // d/dx = (1/h) d/dt.
      const double fd = (hi[k] - lo[k]) / (2.0 * eps * h);
      CHECK(mid[k] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("uniform_grid endpoints and spacing") {
  const auto g = uniform_grid(-2.0, 3.0, 10);
  REQUIRE(g.size() == 11);
  CHECK(g.front() == doctest::Approx(-2.0));
  CHECK(g.back() == doctest::Approx(3.0));
  for (std::size_t i = 1; i < g.size(); ++i)
    CHECK(g[i] - g[i - 1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("semilog_grid brackets and is strictly increasing") {
  const auto g = semilog_grid(1e-7, 0.2, 96, 50.0 / 92.0, 1.0);
  REQUIRE(g.size() == 97);
  CHECK(g.front() == doctest::Approx(1e-7).epsilon(1e-10));
  CHECK(g.back() == doctest::Approx(0.2).epsilon(1e-10));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  // Semilog packs points near the origin: first step far below the average.
  CHECK(g[1] - g[0] < 0.2 / 96 * 1e-2);
}

TEST_CASE("radial_grid prepends the origin") {
  const auto g = radial_grid(1e-7, 0.2, 97, 50.0 / 92.0, 1.0);
  REQUIRE(g.size() == 98);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == doctest::Approx(1e-7).epsilon(1e-10));
}
