#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "tcd/basis1d.hpp"
#include "tcd/hermite.hpp"

using namespace tcd;

namespace {

// Adaptive Simpson quadrature: an oracle independent of the Gauss-Legendre
// machinery used by HermiteBasis::assemble.
double simpson(const std::function<double(double)>& f, double a, double b,
               double fa, double fm, double fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-13) {
  // Pre-split into 9 segments so the dyadic sample points never all coincide
  // with mesh nodes (where derivative shapes vanish identically).
  double acc = 0.0;
  for (int j = 0; j < 9; ++j) {
    const double x0 = a + (b - a) * j / 9.0;
    const double x1 = a + (b - a) * (j + 1) / 9.0;
    const double m = 0.5 * (x0 + x1);
    acc += simpson(f, x0, x1, f(x0), f(m), f(x1), tol / 9.0, 40);
  }
  return acc;
}

Eigen::VectorXd unit(int n, int i) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v[i] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("dof counts follow the end policies") {
  const std::vector<double> nodes = uniform_grid(0.0, 1.0, 4);  // 5 nodes
  CHECK(HermiteBasis(nodes, EndPolicy::kValueAndDeriv, EndPolicy::kValueAndDeriv)
            .ndof() == 10);
  CHECK(HermiteBasis(nodes, EndPolicy::kExclude, EndPolicy::kExclude).ndof() == 6);
  CHECK(HermiteBasis(nodes, EndPolicy::kDerivOnly, EndPolicy::kDerivOnly).ndof() == 8);
  CHECK(HermiteBasis(nodes, EndPolicy::kValueAndDeriv, EndPolicy::kExclude).ndof() == 8);
}

TEST_CASE("interpolation reproduces a cubic with exact derivatives") {
  const std::vector<double> nodes = {0.0, 0.3, 0.7, 1.1, 2.0};
  HermiteBasis basis(nodes, EndPolicy::kValueAndDeriv, EndPolicy::kValueAndDeriv);
  const auto p = [](double x) { return 1.0 + x - 2.0 * x * x + 0.25 * x * x * x; };
  const auto dp = [](double x) { return 1.0 - 4.0 * x + 0.75 * x * x; };
  Eigen::VectorXd coef(basis.ndof());
  HermiteBasis::DofSlot ds[2];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const int n = basis.node_dofs(static_cast<int>(i), ds);
    for (int k = 0; k < n; ++k)
      coef[ds[k].dof] = ds[k].slot == 0 ? p(nodes[i]) : dp(nodes[i]);
  }
  for (double x : {0.0, 0.1, 0.3, 0.55, 0.99, 1.7, 2.0}) {
    CHECK(basis.eval(coef, x, 0) == doctest::Approx(p(x)).epsilon(1e-13));
    CHECK(basis.eval(coef, x, 1) == doctest::Approx(dp(x)).epsilon(1e-12));
    CHECK(basis.eval(coef, x, 2) == doctest::Approx(-4.0 + 1.5 * x).epsilon(1e-11));
    CHECK(basis.eval(coef, x, 3) == doctest::Approx(1.5).epsilon(1e-10));
  }
}

TEST_CASE("assembled matrix elements match adaptive quadrature") {
  const std::vector<double> nodes = {0.0, 0.4, 1.0, 1.5};
  HermiteBasis basis(nodes, EndPolicy::kDerivOnly, EndPolicy::kExclude);
  const auto w = [](double x) { return std::exp(-x) * (1.0 + x); };
  AssembleOpts opts;
  opts.nq = 8;
  const Eigen::MatrixXd S = basis.assemble(0, 0, w, opts);
  const Eigen::MatrixXd D = basis.assemble(1, 0, w, opts);
  const int n = basis.ndof();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd ei = unit(n, i);
    for (int j = 0; j < n; ++j) {
      const Eigen::VectorXd ej = unit(n, j);
      const double sref = integrate(
          [&](double x) { return basis.eval(ei, x) * w(x) * basis.eval(ej, x); },
          nodes.front(), nodes.back());
      const double dref = integrate(
          [&](double x) { return basis.eval(ei, x, 1) * w(x) * basis.eval(ej, x); },
          nodes.front(), nodes.back());
      CHECK(S(i, j) == doctest::Approx(sref).epsilon(1e-10));
      CHECK(D(i, j) == doctest::Approx(dref).epsilon(1e-10));
    }
  }
}

TEST_CASE("derivative matrix is antisymmetric when values vanish at the walls") {
  // With kExclude / kDerivOnly ends every basis function is zero at both
  // endpoints, so integration by parts gives D + D^T = 0 with no boundary term.
  const std::vector<double> nodes = uniform_grid(-1.0, 2.0, 6);
  HermiteBasis basis(nodes, EndPolicy::kDerivOnly, EndPolicy::kExclude);
  const Eigen::MatrixXd D = basis.assemble(1, 0, [](double) { return 1.0; }, {});
  CHECK((D + D.transpose()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("window clipping is additive across an interior cut") {
  const std::vector<double> nodes = uniform_grid(0.0, 2.0, 5);
  HermiteBasis basis(nodes, EndPolicy::kValueAndDeriv, EndPolicy::kValueAndDeriv);
  const auto w = [](double x) { return 1.0 + 0.3 * x * x; };
  const double cut = 0.77;  // mid-element
  AssembleOpts full, lo_side, hi_side;
  lo_side.hi = cut;
  hi_side.lo = cut;
  const Eigen::MatrixXd M = basis.assemble(0, 0, w, full);
  const Eigen::MatrixXd A = basis.assemble(0, 0, w, lo_side);
  const Eigen::MatrixXd B = basis.assemble(0, 0, w, hi_side);
  CHECK((A + B - M).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("split breakpoints integrate a kinked weight correctly") {
  const std::vector<double> nodes = uniform_grid(0.0, 1.0, 2);
  HermiteBasis basis(nodes, EndPolicy::kValueAndDeriv, EndPolicy::kValueAndDeriv);
  const double kink = 0.31;
  const auto w = [kink](double x) { return std::abs(x - kink); };
  AssembleOpts opts;
  opts.nq = 8;
  opts.split = {kink};
  const Eigen::MatrixXd M = basis.assemble(0, 0, w, opts);
  const int n = basis.ndof();
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Eigen::VectorXd ei = unit(n, i), ej = unit(n, j);
      const double ref = integrate(
          [&](double x) { return basis.eval(ei, x) * w(x) * basis.eval(ej, x); },
          0.0, kink) +
          integrate(
              [&](double x) { return basis.eval(ei, x) * w(x) * basis.eval(ej, x); },
              kink, 1.0);
      CHECK(M(i, j) == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("refined elements capture a sharply peaked weight") {
  const std::vector<double> nodes = uniform_grid(0.0, 1.0, 4);
  HermiteBasis basis(nodes, EndPolicy::kValueAndDeriv, EndPolicy::kValueAndDeriv);
  const double c = 0.4, s = 0.02;
  const auto w = [=](double x) { return std::exp(-(x - c) * (x - c) / (2 * s * s)); };
  AssembleOpts coarse, fine;
  coarse.nq = 8;
  fine.nq = 8;
  fine.refine_center = c;
  fine.refine_radius = 0.2;
  fine.refine_sub = 16;
  const Eigen::MatrixXd M = basis.assemble(0, 0, w, fine);
  const int n = basis.ndof();
  // Check a handful of entries against the adaptive oracle.
  for (int i : {3, 4, 5}) {
    const Eigen::VectorXd ei = unit(n, i);
    const double ref = integrate(
        [&](double x) { return basis.eval(ei, x) * w(x) * basis.eval(ei, x); }, 0.0,
        1.0);
    CHECK(M(i, i) == doctest::Approx(ref).epsilon(1e-8));
  }
  // The unrefined rule visibly misses the peak (sanity that refinement matters).
  const Eigen::MatrixXd M0 = basis.assemble(0, 0, w, coarse);
  CHECK(std::abs(M0(4, 4) - M(4, 4)) > 1e-6);
}
