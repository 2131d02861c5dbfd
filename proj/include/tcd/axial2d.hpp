#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <functional>
#include <vector>

#include "tcd/basis1d.hpp"
#include "tcd/constants.hpp"
#include "tcd/radial.hpp"  // TimePoint

namespace tcd {

// Axially symmetric tensor-product grid (extents in fm, converted internally).
struct AxialGrid {
  double rho_max_fm = 5000.0;
  double z_min_fm = -10000.0;
  double z_max_fm = 10000.0;
  int n_rho = 26;  // elements along rho
  int n_z = 100;   // elements along z
};

// m = +1/2 axially symmetric Dirac channel on a cylindrical tensor grid.
//
// The four spinor components W^k(rho, z) are expanded directly in tensor
// products of cubic Hermite splines and all inner products carry the
// cylindrical measure rho drho dz.  In that measure the angular term
// c(d/drho + 1/rho) pairing components 1<->4 becomes c(D~ + S~) with
// D~ = int s s' rho drho and S~ = int s s' drho: every integral is bounded,
// so the axis node legitimately carries value and derivative dofs while the
// outer rho boundary and both z walls are Dirichlet in the value (the walls
// keep their derivative dofs).
class AxialChannel {
 public:
  using SpMat = Eigen::SparseMatrix<double>;
  using SpMatC = Eigen::SparseMatrix<std::complex<double>>;

  explicit AxialChannel(const AxialGrid& g, int nq = 10);

  const HermiteBasis& rho_basis() const { return brho_; }
  const HermiteBasis& z_basis() const { return bz_; }
  int spatial_dofs() const { return nsd_; }
  int ndof() const { return 4 * nsd_; }

  // Spinor overlap: blockdiag_4(kron(S_rho_w, S_z)).
  const SpMat& overlap() const { return s4_; }

  // Values of the potential-weighted block W_ij = int s_i (rho V) s_j drho dz
  // for a point charge z_charge at (rho = 0, z = z_center), laid out on the
  // fixed kron sparsity pattern (use block_pattern* accessors to interpret).
  // Elements near the charge are subdivided refine_sub x refine_sub.
  void potential_block(double z_charge, double z_center,
                       std::vector<double>& values, int refine_sub = 6) const;

  // Assembled real Hamiltonian for a potential block (stationary problems).
  SpMat hamiltonian(const std::vector<double>& wv_values) const;

  // Kinetic + rest-mass part (no potential), same block layout as hamiltonian.
  const SpMat& kinetic() const { return kin4_; }

  // Half-space overlap restricted to z >= z_divide (z_divide in a.u.).
  SpMat half_space_overlap(double z_divide) const;

  // Fixed kron block pattern (CSR over the spatial dofs).
  const std::vector<int>& block_rowptr() const { return rowptr_; }
  const std::vector<int>& block_colidx() const { return colidx_; }

 private:
  void build_pattern();
  void build_kinetic();

  HermiteBasis brho_, bz_;
  int nq_;
  int nsd_ = 0;
  Eigen::MatrixXd srho_w_, srho_u_, drho_w_, sz_, dz_;
  SpMat s4_, kin4_;
  std::vector<int> rowptr_, colidx_;          // spatial kron pattern (CSR)
  // per element-pair scatter: flat list of (slot in values, local index)
  struct ElemScatter {
    int erho, ez;
    std::vector<int> slots;   // 256 entries: value-array slot per (i,j,k,l)
  };
  std::vector<ElemScatter> scatter_;
  friend class AxialPropagator;
};

struct AxialStationaryResult {
  double e_1s = 0.0;
  Eigen::VectorXd coef;  // S-normalized
  int iterations = 0;
};

// Ground (1s-like) state by shift-inverted inverse iteration about sigma.
AxialStationaryResult axial_stationary_1s(const AxialChannel& ch, double z_charge,
                                          double z_center_fm, double sigma = -4861.0,
                                          int refine_sub = 6);

struct AxialCollideParams {
  AxialGrid grid;
  double z_target_fm = -5000.0;  // target position on the z axis
  double z_target = 92.0;        // target charge
  double z_proj = 92.0;          // projectile charge; 0 = null test
  double b_fm = 47.6;
  double mev_per_u = 6.0;
  int steps = 1000;
  int timeseries_stride = 0;
  int nq = 10;
  int refine_sub = 6;
  // Resume support: start the time loop at start_step from *start_state
  // (coefficients at that step) instead of the stationary initial state.
  int start_step = 0;
  const Eigen::VectorXcd* start_state = nullptr;
  // Called after each completed step with (steps_done, t, coefficients).
  std::function<void(int, double, const Eigen::VectorXcd&)> on_step;
};

struct AxialCollideResult {
  double e_initial = 0.0;
  double p_survival = 0.0;   // |<phi_0|S|psi(T)>|^2
  double p_ct = 0.0;         // half-space charge transfer
  double norm_final = 0.0;
  double z_divide_fm = 0.0;  // half-space boundary used for p_ct
  std::vector<TimePoint> series;
};

// Crank-Nicolson propagation of the 1s state through the collision.  The
// projectile rides the z axis at z_t + R(t), R = sqrt(b^2 + (vt)^2), entering
// and leaving through the far z wall.
AxialCollideResult collide_axial(const AxialCollideParams& p);

}  // namespace tcd
