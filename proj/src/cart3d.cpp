#include "tcd/cart3d.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "tcd/quadrature.hpp"

namespace tcd {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

std::vector<double> uniform_nodes(double half_extent_au, int n_nodes) {
  std::vector<double> nodes(n_nodes);
  const double h = 2.0 * half_extent_au / (n_nodes - 1);
  for (int i = 0; i < n_nodes; ++i) nodes[i] = -half_extent_au + i * h;
  return nodes;
}

}  // namespace

CartGrid cart_grid_desk() { return CartGrid{}; }

CartGrid cart_grid_paper() {
  CartGrid g;
  g.nx_nodes = 22;
  g.ny_nodes = 22;
  g.nz_nodes = 42;
  return g;
}

CartGrid cart_grid_reduced() {
  CartGrid g;
  g.nx_nodes = 12;
  g.ny_nodes = 12;
  g.nz_nodes = 24;
  return g;
}

Cart3D::Cart3D(const CartGrid& g, int nq)
    : grid_(g),
      bx_(uniform_nodes(0.5 * fm_to_au(g.lx_fm), g.nx_nodes), EndPolicy::kExclude,
          EndPolicy::kExclude),
      by_(uniform_nodes(0.5 * fm_to_au(g.ly_fm), g.ny_nodes), EndPolicy::kExclude,
          EndPolicy::kExclude),
      bz_(uniform_nodes(0.5 * fm_to_au(g.lz_fm), g.nz_nodes), EndPolicy::kExclude,
          EndPolicy::kExclude),
      nq_(nq),
      zt_(fm_to_au(g.z_target_fm)) {
  nxd_ = bx_.ndof();
  nyd_ = by_.ndof();
  nzd_ = bz_.ndof();
  nsp_ = nxd_ * nyd_ * nzd_;
  AssembleOpts plain;
  plain.nq = 8;
  sx_ = bx_.assemble(0, 0, nullptr, plain);
  dx_ = bx_.assemble(0, 1, nullptr, plain);
  sy_ = by_.assemble(0, 0, nullptr, plain);
  dy_ = by_.assemble(0, 1, nullptr, plain);
  sz_ = bz_.assemble(0, 0, nullptr, plain);
  dz_ = bz_.assemble(0, 1, nullptr, plain);
  sxc_ = sx_.cast<std::complex<double>>();
  dxc_ = dx_.cast<std::complex<double>>();
  syc_ = sy_.cast<std::complex<double>>();
  dyc_ = dy_.cast<std::complex<double>>();
  szc_ = sz_.cast<std::complex<double>>();
  dzc_ = dz_.cast<std::complex<double>>();
  lux_.compute(sxc_);
  luy_.compute(syc_);
  luz_.compute(szc_);
  scratch_a_.resize(4 * nsp_);
  scratch_b_.resize(4 * nsp_);
  build_pattern();
}

// Spatial sparsity pattern: the Kronecker product of the three 1D overlap
// patterns (dofs interact iff their nodes are grid neighbors in every
// direction).  Column lists are products of per-direction sorted adjacency
// lists, so a column's slot is recoverable arithmetically during scatter.
void Cart3D::build_pattern() {
  auto adjacency = [](const HermiteBasis& b) {
    // Interior-only basis: dof d belongs to node d/2 + 1.
    const int nd = b.ndof();
    std::vector<std::vector<int>> adj(nd);
    for (int a = 0; a < nd; ++a) {
      const int na = a / 2 + 1;
      for (int bdof = 0; bdof < nd; ++bdof)
        if (std::abs(na - (bdof / 2 + 1)) <= 1) adj[a].push_back(bdof);
    }
    return adj;
  };
  const auto ax = adjacency(bx_), ay = adjacency(by_), az = adjacency(bz_);
  rowptr_.assign(nsp_ + 1, 0);
  for (int ix = 0; ix < nxd_; ++ix)
    for (int iy = 0; iy < nyd_; ++iy)
      for (int iz = 0; iz < nzd_; ++iz) {
        const int r = (ix * nyd_ + iy) * nzd_ + iz;
        rowptr_[r + 1] = static_cast<int>(ax[ix].size() * ay[iy].size() * az[iz].size());
      }
  for (int r = 0; r < nsp_; ++r) rowptr_[r + 1] += rowptr_[r];
  colidx_.resize(rowptr_[nsp_]);
  for (int ix = 0; ix < nxd_; ++ix)
    for (int iy = 0; iy < nyd_; ++iy)
      for (int iz = 0; iz < nzd_; ++iz) {
        const int r = (ix * nyd_ + iy) * nzd_ + iz;
        int s = rowptr_[r];
        for (int jx : ax[ix])
          for (int jy : ay[iy])
            for (int jz : az[iz]) colidx_[s++] = (jx * nyd_ + jy) * nzd_ + jz;
      }
  wv_.assign(colidx_.size(), 0.0);
}

template <typename Mat>
void Cart3D::kron_apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out,
                        const Mat& mx, const Mat& my, const Mat& mz) const {
  using RowMat =
      Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int nyz = nyd_ * nzd_;
  if (out.size() != in.size()) out.resize(in.size());
  // x pass: in -> scratch_a_
  for (int k = 0; k < 4; ++k) {
    Eigen::Map<const RowMat> xin(in.data() + k * nsp_, nxd_, nyz);
    Eigen::Map<RowMat> xout(scratch_a_.data() + k * nsp_, nxd_, nyz);
    xout.noalias() = mx * xin;
  }
  // y pass: scratch_a_ -> scratch_b_
  for (int k = 0; k < 4; ++k)
    for (int ix = 0; ix < nxd_; ++ix) {
      const std::ptrdiff_t off = (static_cast<std::ptrdiff_t>(k) * nxd_ + ix) * nyz;
      Eigen::Map<const RowMat> yin(scratch_a_.data() + off, nyd_, nzd_);
      Eigen::Map<RowMat> yout(scratch_b_.data() + off, nyd_, nzd_);
      yout.noalias() = my * yin;
    }
  // z pass: scratch_b_ -> out
  Eigen::Map<const RowMat> zin(scratch_b_.data(), 4 * nxd_ * nyd_, nzd_);
  Eigen::Map<RowMat> zout(out.data(), 4 * nxd_ * nyd_, nzd_);
  zout.noalias() = zin * mz.transpose();
}

void Cart3D::apply_overlap(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  kron_apply(in, out, sxc_, syc_, szc_);
}

void Cart3D::solve_overlap(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  using RowMat =
      Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int nyz = nyd_ * nzd_;
  if (out.size() != in.size()) out.resize(in.size());
  for (int k = 0; k < 4; ++k) {
    Eigen::Map<const RowMat> xin(in.data() + k * nsp_, nxd_, nyz);
    Eigen::Map<RowMat> xout(scratch_a_.data() + k * nsp_, nxd_, nyz);
    xout = lux_.solve(xin);
  }
  for (int k = 0; k < 4; ++k)
    for (int ix = 0; ix < nxd_; ++ix) {
      const std::ptrdiff_t off = (static_cast<std::ptrdiff_t>(k) * nxd_ + ix) * nyz;
      Eigen::Map<const RowMat> yin(scratch_a_.data() + off, nyd_, nzd_);
      Eigen::Map<RowMat> yout(scratch_b_.data() + off, nyd_, nzd_);
      yout = luy_.solve(yin);
    }
  // z pass: solve S_z X^T = B^T row-wise, i.e. out = B * (S_z^-1)^T.
  Eigen::Map<const RowMat> zin(scratch_b_.data(), 4 * nxd_ * nyd_, nzd_);
  Eigen::Map<RowMat> zout(out.data(), 4 * nxd_ * nyd_, nzd_);
  zout = luz_.solve(zin.transpose()).transpose();
}

void Cart3D::apply_hamiltonian(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  const double c = kSpeedOfLight;
  if (out.size() != in.size()) out.resize(in.size());
  Eigen::VectorXcd t(in.size());

  // Mass term (uses the plain overlap application).
  kron_apply(in, t, sxc_, syc_, szc_);
  out.setZero();
  out.segment(2 * nsp_, nsp_) = -2.0 * kC2 * t.segment(2 * nsp_, nsp_);
  out.segment(3 * nsp_, nsp_) = -2.0 * kC2 * t.segment(3 * nsp_, nsp_);

  const auto comp = [&](Eigen::VectorXcd& v, int k) {
    return v.segment(k * nsp_, nsp_);
  };
  // Kinetic term -i c alpha_d (x) D_d in the Dirac-Pauli representation.
  kron_apply(in, t, dxc_, syc_, szc_);
  comp(out, 0) += (-kI * c) * comp(t, 3);
  comp(out, 1) += (-kI * c) * comp(t, 2);
  comp(out, 2) += (-kI * c) * comp(t, 1);
  comp(out, 3) += (-kI * c) * comp(t, 0);
  kron_apply(in, t, sxc_, dyc_, szc_);
  comp(out, 0) += -c * comp(t, 3);
  comp(out, 1) += c * comp(t, 2);
  comp(out, 2) += -c * comp(t, 1);
  comp(out, 3) += c * comp(t, 0);
  kron_apply(in, t, sxc_, syc_, dzc_);
  comp(out, 0) += (-kI * c) * comp(t, 2);
  comp(out, 1) += (kI * c) * comp(t, 3);
  comp(out, 2) += (-kI * c) * comp(t, 0);
  comp(out, 3) += (kI * c) * comp(t, 1);

  // Potential: the same spatial CSR block acts on every spinor component.
  const std::complex<double>* xin = in.data();
  std::complex<double>* yout = out.data();
  for (int r = 0; r < nsp_; ++r) {
    std::complex<double> acc0{}, acc1{}, acc2{}, acc3{};
    for (int s = rowptr_[r]; s < rowptr_[r + 1]; ++s) {
      const double w = wv_[s];
      const int ccol = colidx_[s];
      acc0 += w * xin[ccol];
      acc1 += w * xin[nsp_ + ccol];
      acc2 += w * xin[2 * nsp_ + ccol];
      acc3 += w * xin[3 * nsp_ + ccol];
    }
    yout[r] += acc0;
    yout[nsp_ + r] += acc1;
    yout[2 * nsp_ + r] += acc2;
    yout[3 * nsp_ + r] += acc3;
  }
}

void Cart3D::set_potential(const std::vector<PointCharge>& charges) {
  std::fill(wv_.begin(), wv_.end(), 0.0);
  const GaussRule rule = gauss_legendre(nq_);
  const int nq = nq_;
  const int nq3 = nq * nq * nq;
  const auto& xn = bx_.nodes();
  const auto& yn = by_.nodes();
  const auto& zn = bz_.nodes();
  const double hx = xn[1] - xn[0], hy = yn[1] - yn[0], hz = zn[1] - zn[0];

  // Element-independent shape matrix T (64 local dof products x nq^3 points)
  // and quadrature weights; only the potential values change per element.
  Eigen::MatrixXd shx(4, nq), shy(4, nq), shz(4, nq);
  for (int q = 0; q < nq; ++q) {
    const auto bxq = hermite_shapes(rule.x[q], hx, 0);
    const auto byq = hermite_shapes(rule.x[q], hy, 0);
    const auto bzq = hermite_shapes(rule.x[q], hz, 0);
    for (int s = 0; s < 4; ++s) {
      shx(s, q) = bxq[s];
      shy(s, q) = byq[s];
      shz(s, q) = bzq[s];
    }
  }
  Eigen::MatrixXd T(64, nq3);
  Eigen::VectorXd wq3(nq3);
  for (int ax = 0; ax < 4; ++ax)
    for (int ay = 0; ay < 4; ++ay)
      for (int az = 0; az < 4; ++az) {
        const int row = (ax * 4 + ay) * 4 + az;
        for (int qx = 0; qx < nq; ++qx)
          for (int qy = 0; qy < nq; ++qy)
            for (int qz = 0; qz < nq; ++qz)
              T(row, (qx * nq + qy) * nq + qz) = shx(ax, qx) * shy(ay, qy) * shz(az, qz);
      }
  for (int qx = 0; qx < nq; ++qx)
    for (int qy = 0; qy < nq; ++qy)
      for (int qz = 0; qz < nq; ++qz)
        wq3((qx * nq + qy) * nq + qz) =
            (rule.w[qx] * hx) * (rule.w[qy] * hy) * (rule.w[qz] * hz);
  const Eigen::MatrixXd Tt = T.transpose();

  // Per-direction element dof lists and adjacency positions for the scatter.
  struct DirInfo {
    std::vector<std::vector<HermiteBasis::DofSlot>> edofs;
    std::vector<std::vector<int>> adj;
  };
  const auto dir_info = [](const HermiteBasis& b) {
    DirInfo info;
    info.edofs.resize(b.elements());
    HermiteBasis::DofSlot ds[4];
    for (int e = 0; e < b.elements(); ++e) {
      const int n = b.element_dofs(e, ds);
      info.edofs[e].assign(ds, ds + n);
    }
    const int nd = b.ndof();
    info.adj.resize(nd);
    for (int a = 0; a < nd; ++a) {
      const int na = a / 2 + 1;
      for (int bd = 0; bd < nd; ++bd)
        if (std::abs(na - (bd / 2 + 1)) <= 1) info.adj[a].push_back(bd);
    }
    return info;
  };
  const DirInfo ix = dir_info(bx_), iy = dir_info(by_), iz = dir_info(bz_);

  Eigen::VectorXd vq(nq3), xq(nq), yq(nq), zq(nq);
  Eigen::MatrixXd scaled(64, nq3), loc(64, 64);
  const auto pos_in = [](const std::vector<int>& list, int dof) {
    for (std::size_t p = 0; p < list.size(); ++p)
      if (list[p] == dof) return static_cast<int>(p);
    return -1;
  };

  for (int ex = 0; ex < bx_.elements(); ++ex) {
    for (int q = 0; q < nq; ++q) xq[q] = xn[ex] + rule.x[q] * hx;
    for (int ey = 0; ey < by_.elements(); ++ey) {
      for (int q = 0; q < nq; ++q) yq[q] = yn[ey] + rule.x[q] * hy;
      for (int ez = 0; ez < bz_.elements(); ++ez) {
        for (int q = 0; q < nq; ++q) zq[q] = zn[ez] + rule.x[q] * hz;
        for (int qx = 0; qx < nq; ++qx)
          for (int qy = 0; qy < nq; ++qy)
            for (int qz = 0; qz < nq; ++qz) {
              double v = 0.0;
              for (const PointCharge& pc : charges) {
                const double ddx = xq[qx] - pc.x;
                const double ddy = yq[qy] - pc.y;
                const double ddz = zq[qz] - pc.zz;
                const double r =
                    std::sqrt(ddx * ddx + ddy * ddy + ddz * ddz);
                v += -pc.z / std::max(r, 1e-14);
              }
              vq[(qx * nq + qy) * nq + qz] = v;
            }
        scaled.noalias() = T * (wq3.array() * vq.array()).matrix().asDiagonal();
        loc.noalias() = scaled * Tt;

        const auto& dx = ix.edofs[ex];
        const auto& dy = iy.edofs[ey];
        const auto& dz = iz.edofs[ez];
        for (const auto& ax : dx) {
          const auto& adx = ix.adj[ax.dof];
          for (const auto& ay : dy) {
            const auto& ady = iy.adj[ay.dof];
            for (const auto& az : dz) {
              const auto& adz = iz.adj[az.dof];
              const int row = (ax.dof * nyd_ + ay.dof) * nzd_ + az.dof;
              const int base = rowptr_[row];
              const int lrow = (ax.slot * 4 + ay.slot) * 4 + az.slot;
              for (const auto& bx : dx) {
                const int px = pos_in(adx, bx.dof);
                for (const auto& by : dy) {
                  const int py = pos_in(ady, by.dof);
                  for (const auto& bz : dz) {
                    const int pz = pos_in(adz, bz.dof);
                    const int slot =
                        base + (px * static_cast<int>(ady.size()) + py) *
                                   static_cast<int>(adz.size()) +
                        pz;
                    wv_[slot] += loc(lrow, (bx.slot * 4 + by.slot) * 4 + bz.slot);
                  }
                }
              }
            }
          }
        }
      }
    }
  }
}

double Cart3D::half_space_norm(const Eigen::VectorXcd& c, double z_divide,
                               bool upper) const {
  AssembleOpts opts;
  opts.nq = 12;
  if (upper)
    opts.lo = z_divide;
  else
    opts.hi = z_divide;
  const Eigen::MatrixXcd szr =
      bz_.assemble(0, 0, nullptr, opts).cast<std::complex<double>>();
  Eigen::VectorXcd t(c.size());
  kron_apply(c, t, sxc_, syc_, szr);
  return c.dot(t).real();
}

double Cart3D::norm(const Eigen::VectorXcd& c) const {
  Eigen::VectorXcd t(c.size());
  apply_overlap(c, t);
  return c.dot(t).real();
}

double Cart3D::rayleigh(const Eigen::VectorXcd& c) const {
  Eigen::VectorXcd t(c.size());
  apply_hamiltonian(c, t);
  const double num = c.dot(t).real();
  return num / norm(c);
}

Eigen::VectorXcd Cart3D::interpolate_1s(const HermiteBasis& radial_basis,
                                        const Eigen::VectorXd& p_coef,
                                        const Eigen::VectorXd& q_coef,
                                        double* raw_norm) const {
  using cdt = std::complex<double>;
  Eigen::VectorXcd C = Eigen::VectorXcd::Zero(ndof());
  const double f = 1.0 / std::sqrt(4.0 * M_PI);
  const cdt g = -kI * f;  // spin s = -1 phase convention for the lower spinor
  const double r_hi = radial_basis.hi();
  const auto& xn = bx_.nodes();
  const auto& yn = by_.nodes();
  const auto& zn = bz_.nodes();
  HermiteBasis::DofSlot dsx[2], dsy[2], dsz[2];

  for (std::size_t inx = 0; inx < xn.size(); ++inx) {
    const int ndx = bx_.node_dofs(static_cast<int>(inx), dsx);
    if (ndx == 0) continue;
    const double x = xn[inx];
    for (std::size_t iny = 0; iny < yn.size(); ++iny) {
      const int ndy = by_.node_dofs(static_cast<int>(iny), dsy);
      if (ndy == 0) continue;
      const double y = yn[iny];
      for (std::size_t inz = 0; inz < zn.size(); ++inz) {
        const int ndz = bz_.node_dofs(static_cast<int>(inz), dsz);
        if (ndz == 0) continue;
        const double z = zn[inz] - zt_;
        const double r = std::sqrt(x * x + y * y + z * z);
        if (r >= r_hi) continue;
        const double P = radial_basis.eval(p_coef, r, 0);
        const double P1 = radial_basis.eval(p_coef, r, 1);
        const double P2 = radial_basis.eval(p_coef, r, 2);
        const double P3 = radial_basis.eval(p_coef, r, 3);
        const double Q = radial_basis.eval(q_coef, r, 0);
        const double Q1 = radial_basis.eval(q_coef, r, 1);
        const double Q2 = radial_basis.eval(q_coef, r, 2);
        const double Q3 = radial_basis.eval(q_coef, r, 3);
        const double r2 = r * r, r3 = r2 * r, r4 = r2 * r2, r5 = r4 * r,
                     r6 = r4 * r2, r7 = r6 * r, r8 = r4 * r4;
        const double A0 = P / r;
        const double A1 = (r * P1 - P) / r3;
        const double A2 = (r2 * P2 - 3.0 * r * P1 + 3.0 * P) / r5;
        const double A3 = (r3 * P3 - 6.0 * r2 * P2 + 15.0 * r * P1 - 15.0 * P) / r7;
        const double B0 = Q / r2;
        const double B1 = (r * Q1 - 2.0 * Q) / r4;
        const double B2 = (r2 * Q2 - 5.0 * r * Q1 + 8.0 * Q) / r6;
        const double B3 = (r3 * Q3 - 9.0 * r2 * Q2 + 33.0 * r * Q1 - 48.0 * Q) / r8;
        const cdt w{x, y};  // x + i y

        for (int a = 0; a < ndx; ++a)
          for (int b = 0; b < ndy; ++b)
            for (int d = 0; d < ndz; ++d) {
              const int mu = dsx[a].slot, nu = dsy[b].slot, la = dsz[d].slot;
              const std::ptrdiff_t sp =
                  (static_cast<std::ptrdiff_t>(dsx[a].dof) * nyd_ + dsy[b].dof) * nzd_ +
                  dsz[d].dof;
              // Component 1: (1/sqrt(4 pi)) P/r -- mixed nodal partials.
              double c1;
              if (mu == 0 && nu == 0 && la == 0)
                c1 = A0;
              else if (mu + nu + la == 1)
                c1 = (mu ? x : (nu ? y : z)) * A1;
              else if (mu + nu + la == 2)
                c1 = (mu && nu ? x * y : (mu && la ? x * z : y * z)) * A2;
              else
                c1 = x * y * z * A3;
              C[sp] = f * c1;

              // Component 3: g z Q/r^2.
              double c3;
              if (mu == 0 && nu == 0 && la == 0)
                c3 = z * B0;
              else if (mu == 1 && nu == 0 && la == 0)
                c3 = x * z * B1;
              else if (mu == 0 && nu == 1 && la == 0)
                c3 = y * z * B1;
              else if (mu == 0 && nu == 0 && la == 1)
                c3 = B0 + z * z * B1;
              else if (mu == 1 && nu == 1 && la == 0)
                c3 = x * y * z * B2;
              else if (mu == 1 && nu == 0 && la == 1)
                c3 = x * B1 + x * z * z * B2;
              else if (mu == 0 && nu == 1 && la == 1)
                c3 = y * B1 + y * z * z * B2;
              else
                c3 = x * y * B2 + x * y * z * z * B3;
              C[2 * nsp_ + sp] = g * c3;

              // Component 4: g (x + i y) Q/r^2.
              cdt c4;
              if (mu == 0 && nu == 0 && la == 0)
                c4 = w * B0;
              else if (mu == 1 && nu == 0 && la == 0)
                c4 = B0 + x * w * B1;
              else if (mu == 0 && nu == 1 && la == 0)
                c4 = kI * B0 + y * w * B1;
              else if (mu == 0 && nu == 0 && la == 1)
                c4 = z * w * B1;
              else if (mu == 1 && nu == 1 && la == 0)
                c4 = (y + kI * x) * B1 + x * y * w * B2;
              else if (mu == 1 && nu == 0 && la == 1)
                c4 = z * B1 + x * w * z * B2;
              else if (mu == 0 && nu == 1 && la == 1)
                c4 = kI * z * B1 + y * w * z * B2;
              else
                c4 = (y + kI * x) * z * B2 + x * y * w * z * B3;
              C[3 * nsp_ + sp] = g * c4;
            }
      }
    }
  }
  const double n = norm(C);
  if (raw_norm) *raw_norm = n;
  C /= std::sqrt(n);
  return C;
}

namespace {

using Op = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

// Preconditioned BiCGSTAB; x holds the initial guess on entry and the
// solution on exit.  Returns the iteration count (maxiter if unconverged).
int bicgstab(const Op& A, const Op& prec, const Eigen::VectorXcd& b,
             Eigen::VectorXcd& x, double rtol, int maxiter) {
  using cdt = std::complex<double>;
  const Eigen::Index n = b.size();
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero(n);
    return 0;
  }
  const double tol = rtol * bnorm;
  if (x.size() != n) x.setZero(n);  // no guess supplied: start from zero
  Eigen::VectorXcd r(n), rhat(n), v(n), p(n), phat(n), s(n), shat(n), t(n), tmp(n);
  A(x, tmp);
  r = b - tmp;
  rhat = r;
  cdt rho{1.0, 0.0}, alpha{1.0, 0.0}, omega{1.0, 0.0};
  v.setZero();
  p.setZero();
  for (int it = 1; it <= maxiter; ++it) {
    const cdt rho1 = rhat.dot(r);
    if (std::abs(rho1) < 1e-300) return it;  // breakdown: return best effort
    const cdt beta = (rho1 / rho) * (alpha / omega);
    p = r + beta * (p - omega * v);
    prec(p, phat);
    A(phat, v);
    alpha = rho1 / rhat.dot(v);
    s = r - alpha * v;
    if (s.norm() <= tol) {
      x += alpha * phat;
      return it;
    }
    prec(s, shat);
    A(shat, t);
    omega = t.dot(s) / t.squaredNorm();
    x += alpha * phat + omega * shat;
    r = s - omega * t;
    if (r.norm() <= tol) return it;
    rho = rho1;
  }
  return maxiter;
}

}  // namespace

int Cart3D::shifted_solve(double sigma, const Eigen::VectorXcd& b,
                          Eigen::VectorXcd& x, double tol, int maxiter) const {
  Eigen::VectorXcd hs(b.size());
  const Op A = [&](const Eigen::VectorXcd& u, Eigen::VectorXcd& y) {
    apply_hamiltonian(u, y);
    apply_overlap(u, hs);
    y -= sigma * hs;
  };
  const Op prec = [&](const Eigen::VectorXcd& u, Eigen::VectorXcd& y) {
    solve_overlap(u, y);
  };
  return bicgstab(A, prec, b, x, tol, maxiter);
}

double Cart3D::refine_eigenstate(Eigen::VectorXcd& c, double sigma, int iterations,
                                 double inner_tol, int inner_maxiter) const {
  Eigen::VectorXcd b(c.size()), x(c.size());
  for (int it = 0; it < iterations; ++it) {
    apply_overlap(c, b);
    x = c;  // the current state is an excellent starting direction
    shifted_solve(sigma, b, x, inner_tol, inner_maxiter);
    c = x / std::sqrt(norm(x));
  }
  return rayleigh(c);
}

RadialState radial_ground_state(double z) {
  RadialGridParams gp = default_grid_for(z);
  RadialChannel ch(radial_grid(gp.r_min, gp.r_max, gp.n_tail, gp.eta, gp.xi), -1);
  AssembleOpts opts;
  opts.nq = 16;
  const Eigen::MatrixXd wv =
      ch.weight_matrix([z](double r) { return coulomb_point(z, r); }, opts);
  Eigen::VectorXd eps;
  Eigen::MatrixXd vecs;
  RadialChannel::eigh(ch.hamiltonian(wv), ch.overlap_full(), eps, vecs);
  const double ref = sommerfeld_1s(z);
  int best = 0;
  for (int i = 1; i < eps.size(); ++i)
    if (std::abs(eps[i] - ref) < std::abs(eps[best] - ref)) best = i;
  const int m = ch.basis().ndof();  // coefficients per spinor component
  Eigen::VectorXd p = vecs.col(best).head(m);
  Eigen::VectorXd q = vecs.col(best).tail(m);
  // Fix the arbitrary eigenvector sign so P > 0 at mid-range radii.
  if (ch.basis().eval(p, 0.01) < 0.0) {
    p = -p;
    q = -q;
  }
  return RadialState{ch.basis(), std::move(p), std::move(q), eps[best]};
}

Cart3DResult collide_cart3d(const Cart3DParams& par) {
  Cart3D op(par.grid, par.nq);
  Cart3DResult res;

  const RadialState rad = radial_ground_state(par.z_target);
  const double zt = op.z_target();
  op.set_potential({{par.z_target, 0.0, 0.0, zt}});
  Eigen::VectorXcd C = op.interpolate_1s(rad.basis, rad.p, rad.q, &res.norm_interp_raw);
  res.e_interp = op.rayleigh(C);
  res.e_initial = res.e_interp;
  if (par.purify_initial)
    res.e_initial = op.refine_eigenstate(C, res.e_interp, 3);
  const Eigen::VectorXcd C0 = C;

  const double v = projectile_speed(par.mev_per_u);
  const double lz = fm_to_au(par.grid.lz_fm);
  const double b_au = fm_to_au(par.b_fm);
  const double T = lz / v;
  const double dt = T / par.steps;
  const double h = 0.5 * dt;
  const std::complex<double> mass_scale =
      1.0 / (1.0 + kI * h * (-2.0 * kC2));

  const int n = op.ndof();
  Eigen::VectorXcd sc(n), hc(n), rhs(n), tmp(n);
  const Op A = [&](const Eigen::VectorXcd& u, Eigen::VectorXcd& y) {
    op.apply_hamiltonian(u, y);
    y *= kI * h;
    op.apply_overlap(u, tmp);
    y += tmp;
  };
  const Op prec = [&](const Eigen::VectorXcd& u, Eigen::VectorXcd& y) {
    op.solve_overlap(u, y);
    y.segment(2 * op.spatial_dofs(), 2 * op.spatial_dofs()) *= mass_scale;
  };

  if (par.start_state) {
    if (par.start_state->size() != C.size())
      throw std::invalid_argument("resume state size does not match the grid");
    C = *par.start_state;
  }
  long total_iters = 0;
  for (int step = par.start_step; step < par.steps; ++step) {
    const double t_mid = -0.5 * T + (step + 0.5) * dt;
    if (par.z_proj != 0.0)
      op.set_potential(
          {{par.z_target, 0.0, 0.0, zt}, {par.z_proj, b_au, 0.0, v * t_mid}});
    op.apply_overlap(C, sc);
    op.apply_hamiltonian(C, hc);
    rhs = sc - kI * h * hc;
    total_iters += bicgstab(A, prec, rhs, C, par.bicg_tol, par.bicg_maxiter);
    if (par.timeseries_stride > 0 && ((step + 1) % par.timeseries_stride == 0 ||
                                      step + 1 == par.steps)) {
      op.apply_overlap(C, sc);
      const double nrm = C.dot(sc).real();
      // M+ C = rhs after the solve, so H(t_mid) C = (rhs - S C) * (-2i/dt).
      tmp = (rhs - sc) * (std::complex<double>(0.0, -2.0 / dt));
      res.series.push_back({(step + 1) * dt - 0.5 * T, nrm, C.dot(tmp).real() / nrm});
    }
    if (par.on_step) par.on_step(step + 1, (step + 1) * dt - 0.5 * T, C);
  }
  res.avg_bicg_iters =
      static_cast<double>(total_iters) / std::max(1, par.steps - par.start_step);
  res.norm_final = op.norm(C);
  op.apply_overlap(C, sc);
  res.p_survival = std::norm(C0.dot(sc));
  const double z_div = 0.5 * (zt + 0.5 * lz);
  res.z_divide_fm = au_to_fm(z_div);
  res.p_ct = op.half_space_norm(C, z_div, true);
  res.p_keep = op.half_space_norm(C, z_div, false);
  return res;
}

}  // namespace tcd
