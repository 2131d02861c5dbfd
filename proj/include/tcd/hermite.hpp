#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tcd {

// Local cubic Hermite shape functions on an element of width h, parametrized by
// t in [0, 1].  Slots: {left value, left derivative, right value, right
// derivative}.  The derivative-type shapes carry a factor h so that the
// associated coefficients are true derivative values.
inline std::array<double, 4> hermite_shapes(double t, double h, int deriv) {
  const double u = 1.0 - t;
  switch (deriv) {
    case 0:
      return {u * u * (1.0 + 2.0 * t), h * t * u * u, t * t * (3.0 - 2.0 * t),
              h * t * t * (t - 1.0)};
    case 1:
      return {6.0 * t * (t - 1.0) / h, u * (1.0 - 3.0 * t), 6.0 * t * u / h,
              t * (3.0 * t - 2.0)};
    case 2:
      return {(12.0 * t - 6.0) / (h * h), (6.0 * t - 4.0) / h,
              (6.0 - 12.0 * t) / (h * h), (6.0 * t - 2.0) / h};
    case 3:
      return {12.0 / (h * h * h), 6.0 / (h * h), -12.0 / (h * h * h),
              6.0 / (h * h)};
    default:
      throw std::invalid_argument("hermite_shapes: deriv must be 0..3");
  }
}

inline std::vector<double> uniform_grid(double a, double b, int n_elements) {
  if (n_elements < 1 || !(b > a))
    throw std::invalid_argument("uniform_grid: bad extent or element count");
  std::vector<double> g(n_elements + 1);
  const double h = (b - a) / n_elements;
  for (int i = 0; i <= n_elements; ++i) g[i] = a + i * h;
  g.back() = b;
  return g;
}

// Semi-logarithmic radial grid: zeta(r) = eta*r + xi*ln(r) sampled uniformly in
// zeta between r_min and r_max (N+1 nodes).  Inverted per node by a bisection-
// safeguarded Newton iteration.
inline std::vector<double> semilog_grid(double r_min, double r_max, int n_elements,
                                        double eta, double xi) {
  if (!(r_max > r_min) || r_min <= 0.0 || n_elements < 1)
    throw std::invalid_argument("semilog_grid: bad parameters");
  std::vector<double> g(n_elements + 1);
  if (xi == 0.0) return uniform_grid(r_min, r_max, n_elements);
  const double z0 = eta * r_min + xi * std::log(r_min);
  const double z1 = eta * r_max + xi * std::log(r_max);
  g.front() = r_min;
  g.back() = r_max;
  for (int i = 1; i < n_elements; ++i) {
    const double zt = z0 + (z1 - z0) * i / n_elements;
    double lo = r_min, hi = r_max;
    double r = g[i - 1];  // warm start from the previous node
    for (int it = 0; it < 200; ++it) {
      const double f = eta * r + xi * std::log(r) - zt;
      (f > 0.0 ? hi : lo) = r;
      const double step = f / (eta + xi / r);
      double rn = r - step;
      if (!(rn > lo && rn < hi)) rn = 0.5 * (lo + hi);
      if (std::abs(rn - r) <= 1e-16 * r) {
        r = rn;
        break;
      }
      r = rn;
    }
    g[i] = r;
  }
  return g;
}

// Radial grid with an origin node: {0} followed by a semilog tail.  The origin
// node carries no basis functions (both 1s-like behavior and the Dirichlet
// condition at r = 0 are represented by the excluded-node policy), but the
// first element [0, r_min] is part of the mesh so no truncation wall exists.
inline std::vector<double> radial_grid(double r_min, double r_max, int n_nodes_tail,
                                       double eta, double xi) {
  std::vector<double> tail = semilog_grid(r_min, r_max, n_nodes_tail - 1, eta, xi);
  std::vector<double> g;
  g.reserve(tail.size() + 1);
  g.push_back(0.0);
  g.insert(g.end(), tail.begin(), tail.end());
  return g;
}

}  // namespace tcd
