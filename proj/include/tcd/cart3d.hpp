#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "tcd/basis1d.hpp"
#include "tcd/constants.hpp"
#include "tcd/radial.hpp"  // TimePoint, stationary_1s

namespace tcd {

// Cartesian tensor box (extents in fm).  Node counts include the two wall
// nodes; walls carry no dofs, so each direction contributes 2*(n_nodes - 2)
// splines.  The target sits on the z axis, shifted a quarter box toward the
// incoming projectile.
struct CartGrid {
  double lx_fm = 6900.0;
  double ly_fm = 6900.0;
  double lz_fm = 13800.0;
  int nx_nodes = 10;
  int ny_nodes = 10;
  int nz_nodes = 18;
  double z_target_fm = -3450.0;
};

// Desk tier: 16 x 16 x 32 splines.  Paper tier: 40 x 40 x 80 splines
// (512000 unknowns).  Reduced tier: the null-test grid.
CartGrid cart_grid_desk();
CartGrid cart_grid_paper();
CartGrid cart_grid_reduced();  // 12 x 12 x 24 nodes

struct PointCharge {
  double z;        // charge
  double x, y, zz; // position (a.u.)
};

// Matrix-free three-dimensional Dirac operator on the tensor Hermite basis.
// States are stored component-major: C[((k*nxd + ix)*nyd + iy)*nzd + iz].
class Cart3D {
 public:
  using cd = std::complex<double>;

  explicit Cart3D(const CartGrid& g, int nq = 6, int refine_sub = 3);

  int nxd() const { return nxd_; }
  int nyd() const { return nyd_; }
  int nzd() const { return nzd_; }
  int spatial_dofs() const { return nsp_; }
  int ndof() const { return 4 * nsp_; }
  const HermiteBasis& x_basis() const { return bx_; }
  const HermiteBasis& y_basis() const { return by_; }
  const HermiteBasis& z_basis() const { return bz_; }
  double z_target() const { return zt_; }
  const CartGrid& grid() const { return grid_; }

  // Overlap and Hamiltonian applications (state length = ndof()).
  void apply_overlap(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
  void apply_hamiltonian(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

  // Kronecker overlap-inverse (exact, via 1D factorizations).
  void solve_overlap(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

  // Reassemble the potential block for a set of point charges; affects
  // subsequent apply_hamiltonian calls.  Elements within one element width of
  // a charge are integrated with a refine_sub-fold subdivided rule (the 1/r
  // integrand is singular there); charges must not sit on Gauss points.
  void set_potential(const std::vector<PointCharge>& charges);

  // Sparse potential data (per spatial component, CSR) for oracle tests.
  const std::vector<int>& wv_rowptr() const { return rowptr_; }
  const std::vector<int>& wv_colidx() const { return colidx_; }
  const std::vector<double>& wv_values() const { return wv_; }

  // Overlap with the z integration restricted to z >= z_divide.
  double half_space_norm(const Eigen::VectorXcd& c, double z_divide,
                         bool upper = true) const;

  double norm(const Eigen::VectorXcd& c) const;
  double rayleigh(const Eigen::VectorXcd& c) const;

  // Nodal mixed-partial interpolation of the kappa = -1, m = +1/2 central
  // field state (P, Q) centered on the target; returns the unnormalized
  // interpolant norm through raw_norm.
  Eigen::VectorXcd interpolate_1s(const HermiteBasis& radial_basis,
                                  const Eigen::VectorXd& p_coef,
                                  const Eigen::VectorXd& q_coef,
                                  double* raw_norm = nullptr) const;

  // Preconditioned iterative solve of (H - sigma S) x = b with the Kronecker
  // overlap inverse as preconditioner.  Returns iterations used.
  int shifted_solve(double sigma, const Eigen::VectorXcd& b, Eigen::VectorXcd& x,
                    double tol, int maxiter) const;

  // Inverse-iteration refinement of an approximate bound state about sigma.
  double refine_eigenstate(Eigen::VectorXcd& c, double sigma, int iterations,
                           double inner_tol = 1e-8, int inner_maxiter = 400) const;

 private:
  void build_pattern();
  template <typename Mat>
  void kron_apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out,
                  const Mat& mx, const Mat& my, const Mat& mz) const;

  CartGrid grid_;
  HermiteBasis bx_, by_, bz_;
  int nq_;
  int refine_sub_;
  int nxd_, nyd_, nzd_, nsp_;
  double zt_;
  Eigen::MatrixXd sx_, dx_, sy_, dy_, sz_, dz_;
  Eigen::MatrixXcd sxc_, dxc_, syc_, dyc_, szc_, dzc_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lux_, luy_, luz_;
  std::vector<int> rowptr_, colidx_;
  std::vector<double> wv_;
  mutable Eigen::VectorXcd scratch_a_, scratch_b_;
};

// Radial central-field ground state (kappa = -1) used to seed 3D runs.
struct RadialState {
  HermiteBasis basis;
  Eigen::VectorXd p, q;  // large/small component expansions, int (P^2+Q^2) dr = 1
  double energy;
};
RadialState radial_ground_state(double z);

struct Cart3DParams {
  CartGrid grid;
  double z_target = 92.0;
  double z_proj = 92.0;   // 0 = null test
  double b_fm = 47.6;
  double mev_per_u = 6.0;
  int steps = 256;
  int nq = 6;
  int refine_sub = 3;  // near-charge quadrature subdivision
  double bicg_tol = 1e-10;
  int bicg_maxiter = 500;
  bool purify_initial = false;  // shift-invert refinement of the interpolant
  int timeseries_stride = 0;
  // Resume support, as in AxialCollideParams.
  int start_step = 0;
  const Eigen::VectorXcd* start_state = nullptr;
  std::function<void(int, double, const Eigen::VectorXcd&)> on_step;
};

struct Cart3DResult {
  double e_interp = 0.0;       // Rayleigh quotient of the raw interpolant
  double norm_interp_raw = 0.0;
  double e_initial = 0.0;      // after optional refinement
  double p_survival = 0.0;
  double p_ct = 0.0;
  double p_keep = 0.0;         // complement half-space; p_ct + p_keep = norm
  double norm_final = 0.0;
  double z_divide_fm = 0.0;
  double avg_bicg_iters = 0.0;
  std::vector<TimePoint> series;
};

// Straight-line collision: projectile at (b, 0, v t), t spanning the box.
Cart3DResult collide_cart3d(const Cart3DParams& p);

}  // namespace tcd
