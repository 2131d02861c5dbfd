#include <doctest.h>

#include <cmath>

#include "tcd/quadrature.hpp"

using tcd::gauss_legendre;

TEST_CASE("Gauss-Legendre weights sum to one") {
  for (int n : {1, 2, 5, 8, 16, 32}) {
    const auto rule = gauss_legendre(n);
    double sum = 0.0;
    for (double w : rule.w) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("Gauss-Legendre integrates monomials exactly up to degree 2n-1") {
  for (int n : {2, 4, 8}) {
    const auto rule = gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rule.x.size(); ++i)
        acc += rule.w[i] * std::pow(rule.x[i], k);
      CHECK(acc == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("Gauss-Legendre nodes are sorted and interior") {
  const auto rule = gauss_legendre(12);
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    CHECK(rule.x[i] > 0.0);
    CHECK(rule.x[i] < 1.0);
    if (i) CHECK(rule.x[i] > rule.x[i - 1]);
  }
}

TEST_CASE("Gauss-Legendre matches a transcendental reference") {
  // int_0^1 exp(x) dx = e - 1, converged by n = 8.
  const auto rule = gauss_legendre(8);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i)
    acc += rule.w[i] * std::exp(rule.x[i]);
  CHECK(acc == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
}
