#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "tcd/basis1d.hpp"
#include "tcd/constants.hpp"

namespace tcd {

enum class NuclearModel { kPoint, kSphere };

struct RadialGridParams {
  double r_min = 0.0;    // first semilog node (a.u.); 0 -> per-Z default
  double r_max = 0.0;    // box radius (a.u.); 0 -> default 19/Z
  int n_tail = 97;       // semilog node count (gives 96 spline-carrying nodes)
  double eta = 0.0;      // 0 -> default 50/Z
  double xi = 1.0;
};

// Point potential; sphere potential for a uniformly charged sphere of radius rn.
double coulomb_point(double z, double r);
double coulomb_sphere(double z, double rn, double r);

// Radial Dirac operator for a single kappa channel in the Hermite basis.
// Block layout: [P dofs; Q dofs], H = [[W_V, -c D + K], [c D + K, W_V - 2c^2 S]]
// with K = kappa * c * W_{1/r}.
class RadialChannel {
 public:
  RadialChannel(std::vector<double> nodes, int kappa);

  const HermiteBasis& basis() const { return basis_; }
  int kappa() const { return kappa_; }
  int ndof() const { return 2 * basis_.ndof(); }

  // Weighted single-block matrix for an arbitrary radial weight.
  Eigen::MatrixXd weight_matrix(const std::function<double(double)>& w,
                                const AssembleOpts& opts) const;

  Eigen::MatrixXd hamiltonian(const Eigen::MatrixXd& wv) const;
  const Eigen::MatrixXd& overlap_full() const { return s_full_; }
  const Eigen::MatrixXd& overlap_block() const { return s_; }
  const Eigen::MatrixXd& derivative_block() const { return d_; }
  const Eigen::MatrixXd& inv_r_block() const { return winv_; }

  // Generalized symmetric eigenproblem H psi = eps S psi with diagonal
  // normalization applied for conditioning on deep grids.
  static void eigh(const Eigen::MatrixXd& h, const Eigen::MatrixXd& s,
                   Eigen::VectorXd& eps, Eigen::MatrixXd& vecs);

 private:
  HermiteBasis basis_;
  int kappa_;
  Eigen::MatrixXd s_, d_, winv_, s_full_;
};

struct StationaryResult {
  double e_1s = 0.0;        // bound-state energy closest to the Sommerfeld value
  Eigen::VectorXd eps;      // all eigenvalues
  Eigen::MatrixXd vecs;     // S-orthonormal eigenvectors (columns)
  int index_1s = -1;
};

// Solve the target-only stationary problem.  Grid defaults give the reference
// 384-function setup with a per-Z r_min chosen for deep-potential accuracy.
StationaryResult stationary_1s(double z, NuclearModel model,
                               RadialGridParams grid = {});

RadialGridParams default_grid_for(double z);

// ---------------------------------------------------------------------------
// Monopole collision
// ---------------------------------------------------------------------------

struct CollideParams {
  double z_target = 92.0;
  double z_proj = 92.0;              // 0 turns the projectile off (null test)
  NuclearModel target_model = NuclearModel::kPoint;
  double b_fm = 15.0;                // impact parameter
  double mev_per_u = 6.0;
  int steps = 10000;
  bool with_pbar = false;            // also propagate the determinant block
  int timeseries_stride = 0;         // 0 -> no time series recording
  RadialGridParams grid;             // defaults filled from z_target
};

struct TimePoint {
  double t;
  double norm;
  double energy;
};

struct CollideResult {
  double e_min = 0.0;                // Rayleigh quotient at closest approach (a.u.)
  double e_min_over_mc2 = 0.0;       // eps/c^2 + 1 as tabulated
  double p_1s = 0.0;
  double p_minus = 0.0;              // summed negative-continuum population
  double p_bar_1s = 0.0;             // determinant-corrected survival (if requested)
  double norm_final = 0.0;
  double e_1s_initial = 0.0;
  std::vector<TimePoint> series;
};

CollideResult collide_monopole(const CollideParams& p);

}  // namespace tcd
