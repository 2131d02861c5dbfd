#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "tcd/constants.hpp"
#include "tcd/radial.hpp"

using namespace tcd;

TEST_CASE("sphere potential matches the point potential outside the nucleus") {
  const double z = 92.0, rn = uranium_sphere_radius_au();
  for (double r : {rn, 2.0 * rn, 10.0 * rn, 1e3 * rn})
    CHECK(coulomb_sphere(z, rn, r) == doctest::Approx(coulomb_point(z, r)).epsilon(1e-14));
  // Inside: parabolic, finite at the origin, -3Z/(2R) at r = 0.
  CHECK(coulomb_sphere(z, rn, 0.0) == doctest::Approx(-1.5 * z / rn));
  CHECK(coulomb_sphere(z, rn, 0.5 * rn) ==
        doctest::Approx(-z / rn * (1.5 - 0.5 * 0.25)));
  // Continuity at the surface and monotonicity inside.
  CHECK(coulomb_sphere(z, rn, rn * (1 - 1e-9)) ==
        doctest::Approx(coulomb_point(z, rn)).epsilon(1e-7));
  CHECK(coulomb_sphere(z, rn, 0.2 * rn) < coulomb_sphere(z, rn, 0.8 * rn));
}

TEST_CASE("generalized eigensolver returns an S-orthonormal basis") {
  // Random small SPD pencil as an independent check of the LAPACK wrapping.
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(12, 12);
  Eigen::MatrixXd h = 0.5 * (a + a.transpose());
  Eigen::MatrixXd b = Eigen::MatrixXd::Random(12, 12);
  Eigen::MatrixXd s = b * b.transpose() + 12.0 * Eigen::MatrixXd::Identity(12, 12);
  Eigen::VectorXd eps;
  Eigen::MatrixXd vecs;
  RadialChannel::eigh(h, s, eps, vecs);
  CHECK((vecs.transpose() * s * vecs - Eigen::MatrixXd::Identity(12, 12))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  CHECK((h * vecs - s * vecs * eps.asDiagonal()).cwiseAbs().maxCoeff() < 1e-9);
  for (int i = 1; i < eps.size(); ++i) CHECK(eps[i] >= eps[i - 1]);
}

TEST_CASE("hydrogen ground state matches the analytic Dirac energy") {
  const StationaryResult r = stationary_1s(1.0, NuclearModel::kPoint);
  CHECK(r.e_1s == doctest::Approx(sommerfeld_1s(1.0)).epsilon(5e-8));
}

TEST_CASE("U91+ point-nucleus ground state") {
  const StationaryResult r = stationary_1s(92.0, NuclearModel::kPoint);
  CHECK(r.e_1s == doctest::Approx(-4861.1979).epsilon(2e-6));
  // Sphere model binds slightly less.
  const StationaryResult rs = stationary_1s(92.0, NuclearModel::kSphere);
  CHECK(rs.e_1s > r.e_1s);
  CHECK(rs.e_1s - r.e_1s == doctest::Approx(7.314).epsilon(0.01));
}

TEST_CASE("Crank-Nicolson step is exactly unitary in the S inner product") {
  // Random Hermitian H and SPD S of dimension 20: the CN update
  // U = (S + i dt/2 H)^{-1} (S - i dt/2 H) satisfies U^H S U = S identically.
  using Mat = Eigen::MatrixXcd;
  const int n = 20;
  Mat a = Mat::Random(n, n);
  Mat h = 0.5 * (a + a.adjoint());
  Mat b = Mat::Random(n, n);
  Mat s = b * b.adjoint() + static_cast<double>(n) * Mat::Identity(n, n);
  const double dt = 0.37;
  const std::complex<double> ih(0.0, 0.5 * dt);
  const Mat u = (s + ih * h).partialPivLu().solve(s - ih * h);
  CHECK((u.adjoint() * s * u - s).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("short monopole collision conserves the norm and stays physical") {
  CollideParams p;
  p.b_fm = 50.0;
  p.steps = 300;
  p.with_pbar = false;
  p.timeseries_stride = 100;
  const CollideResult r = collide_monopole(p);
  CHECK(std::abs(r.norm_final - 1.0) < 1e-8);
  CHECK(r.p_1s > 0.0);
  CHECK(r.p_1s < 1.0);
  CHECK(r.p_minus >= 0.0);
  CHECK(r.p_minus < 0.05);
  CHECK(r.e_1s_initial == doctest::Approx(-4861.1979).epsilon(1e-5));
  // E_min/mc^2 + 1 is far below the unperturbed value at closest approach.
  CHECK(r.e_min_over_mc2 < -0.3);
  REQUIRE(r.series.size() >= 3);
  for (std::size_t i = 1; i < r.series.size(); ++i) {
    CHECK(r.series[i].t > r.series[i - 1].t);
    CHECK(std::abs(r.series[i].norm - 1.0) < 1e-8);
  }
}

TEST_CASE("null monopole run leaves the 1s state untouched") {
  CollideParams p;
  p.z_proj = 0.0;
  p.steps = 200;
  const CollideResult r = collide_monopole(p);
  CHECK(r.p_1s == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(r.norm_final - 1.0) < 1e-10);
  CHECK(r.p_minus < 1e-10);
}
