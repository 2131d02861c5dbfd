#include "tcd/axial2d.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tcd {

namespace {

// Node index of each dof, used to derive the band adjacency structurally.
std::vector<int> node_of_dofs(const HermiteBasis& b) {
  std::vector<int> node(b.ndof());
  HermiteBasis::DofSlot ds[2];
  for (int i = 0; i < static_cast<int>(b.nodes().size()); ++i) {
    const int c = b.node_dofs(i, ds);
    for (int k = 0; k < c; ++k) node[ds[k].dof] = i;
  }
  return node;
}

std::vector<std::vector<int>> adjacency(const HermiteBasis& b) {
  const std::vector<int> node = node_of_dofs(b);
  std::vector<std::vector<int>> adj(b.ndof());
  for (int i = 0; i < b.ndof(); ++i)
    for (int j = 0; j < b.ndof(); ++j)
      if (std::abs(node[i] - node[j]) <= 1) adj[i].push_back(j);
  return adj;
}

}  // namespace

AxialChannel::AxialChannel(const AxialGrid& g, int nq)
    : brho_(uniform_grid(0.0, fm_to_au(g.rho_max_fm), g.n_rho),
            EndPolicy::kValueAndDeriv, EndPolicy::kExclude),
      bz_(uniform_grid(fm_to_au(g.z_min_fm), fm_to_au(g.z_max_fm), g.n_z),
          EndPolicy::kDerivOnly, EndPolicy::kDerivOnly),
      nq_(nq) {
  nsd_ = brho_.ndof() * bz_.ndof();
  AssembleOpts opts;
  opts.nq = nq_;
  srho_w_ = brho_.assemble(0, 0, [](double r) { return r; }, opts);
  srho_u_ = brho_.assemble(0, 0, nullptr, opts);
  drho_w_ = brho_.assemble(0, 1, [](double r) { return r; }, opts);
  sz_ = bz_.assemble(0, 0, nullptr, opts);
  dz_ = bz_.assemble(0, 1, nullptr, opts);
  build_pattern();
  build_kinetic();
}

void AxialChannel::build_pattern() {
  const auto adj_r = adjacency(brho_);
  const auto adj_z = adjacency(bz_);
  const int nzd = bz_.ndof();
  rowptr_.assign(nsd_ + 1, 0);
  for (int ir = 0; ir < brho_.ndof(); ++ir)
    for (int iz = 0; iz < nzd; ++iz)
      rowptr_[ir * nzd + iz + 1] =
          static_cast<int>(adj_r[ir].size() * adj_z[iz].size());
  for (int r = 0; r < nsd_; ++r) rowptr_[r + 1] += rowptr_[r];
  colidx_.resize(rowptr_[nsd_]);
  for (int ir = 0; ir < brho_.ndof(); ++ir)
    for (int iz = 0; iz < nzd; ++iz) {
      int at = rowptr_[ir * nzd + iz];
      for (int jr : adj_r[ir])
        for (int jz : adj_z[iz]) colidx_[at++] = jr * nzd + jz;
    }

  // Element-pair scatter into the pattern's value array.
  HermiteBasis::DofSlot dr[4], dzs[4];
  scatter_.clear();
  scatter_.reserve(static_cast<std::size_t>(brho_.elements()) * bz_.elements());
  for (int er = 0; er < brho_.elements(); ++er) {
    const int nr = brho_.element_dofs(er, dr);
    for (int ez = 0; ez < bz_.elements(); ++ez) {
      const int nz = bz_.element_dofs(ez, dzs);
      ElemScatter es;
      es.erho = er;
      es.ez = ez;
      es.slots.reserve(static_cast<std::size_t>(nr) * nr * nz * nz * 2);
      for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nr; ++j)
          for (int k = 0; k < nz; ++k)
            for (int l = 0; l < nz; ++l) {
              const int row = dr[i].dof * nzd + dzs[k].dof;
              const int col = dr[j].dof * nzd + dzs[l].dof;
              const auto beg = colidx_.begin() + rowptr_[row];
              const auto end = colidx_.begin() + rowptr_[row + 1];
              const auto it = std::lower_bound(beg, end, col);
              if (it == end || *it != col)
                throw std::logic_error("axial pattern scatter miss");
              es.slots.push_back(static_cast<int>(it - colidx_.begin()));
              es.slots.push_back(((dr[i].slot * 4 + dr[j].slot) * 4 + dzs[k].slot) * 4 +
                                 dzs[l].slot);
            }
      scatter_.push_back(std::move(es));
    }
  }
}

namespace {

// Append kron(A, B) (restricted to the band adjacency) as triplets at a block
// offset, scaled by coef.
void add_kron_block(std::vector<Eigen::Triplet<double>>& trips, int row_off,
                    int col_off, double coef, const Eigen::MatrixXd& a,
                    const std::vector<std::vector<int>>& adj_r,
                    const Eigen::MatrixXd& b,
                    const std::vector<std::vector<int>>& adj_z) {
  const int nzd = static_cast<int>(b.rows());
  for (int ir = 0; ir < a.rows(); ++ir)
    for (int jr : adj_r[ir])
      for (int iz = 0; iz < nzd; ++iz)
        for (int jz : adj_z[iz])
          trips.emplace_back(row_off + ir * nzd + iz, col_off + jr * nzd + jz,
                             coef * a(ir, jr) * b(iz, jz));
}

}  // namespace

void AxialChannel::build_kinetic() {
  const auto adj_r = adjacency(brho_);
  const auto adj_z = adjacency(bz_);
  const double c = kSpeedOfLight;
  const Eigen::MatrixXd a14 = drho_w_ + srho_u_;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(colidx_.size()) * 12);
  auto blk = [&](int bi, int bj, double coef, const Eigen::MatrixXd& ar,
                 const Eigen::MatrixXd& bz) {
    add_kron_block(trips, bi * nsd_, bj * nsd_, coef, ar, adj_r, bz, adj_z);
  };
  // Row/column spinor blocks: [W, 0, +c dz, +c(dr + 1/r); 0, W, +c dr, -c dz;
  //                            -c dz, -c(dr + 1/r), G, 0; -c dr, +c dz, 0, G]
  blk(0, 2, c, srho_w_, dz_);
  blk(0, 3, c, a14, sz_);
  blk(1, 2, c, drho_w_, sz_);
  blk(1, 3, -c, srho_w_, dz_);
  blk(2, 0, -c, srho_w_, dz_);
  blk(2, 1, -c, a14, sz_);
  blk(3, 0, -c, drho_w_, sz_);
  blk(3, 1, c, srho_w_, dz_);
  blk(2, 2, -2.0 * kC2, srho_w_, sz_);
  blk(3, 3, -2.0 * kC2, srho_w_, sz_);
  kin4_.resize(ndof(), ndof());
  kin4_.setFromTriplets(trips.begin(), trips.end());

  trips.clear();
  for (int k = 0; k < 4; ++k) blk(k, k, 1.0, srho_w_, sz_);
  s4_.resize(ndof(), ndof());
  s4_.setFromTriplets(trips.begin(), trips.end());
}

void AxialChannel::potential_block(double z_charge, double z_center,
                                   std::vector<double>& values,
                                   int refine_sub) const {
  values.assign(colidx_.size(), 0.0);
  const GaussRule rule = gauss_legendre(nq_);
  const double hr = brho_.nodes()[1] - brho_.nodes()[0];
  const double hz = bz_.nodes()[1] - bz_.nodes()[0];
  const double rad = hr + hz;

  Eigen::MatrixXd pr(16, nq_), pz(16, nq_), wq(nq_, nq_), tmp(16, nq_),
      loc(16, 16);
  std::vector<double> rq(nq_), zq(nq_);

  for (const ElemScatter& es : scatter_) {
    const double ar = brho_.nodes()[es.erho];
    const double az = bz_.nodes()[es.ez];
    int sub = 1;
    if (refine_sub > 1 && ar < rad &&
        std::abs(az + 0.5 * hz - z_center) < rad + hz)
      sub = refine_sub;
    loc.setZero();
    for (int sr = 0; sr < sub; ++sr) {
      for (int q = 0; q < nq_; ++q) {
        const double t = (sr + rule.x[q]) / sub;
        rq[q] = ar + t * hr;
        const auto sh = hermite_shapes(t, hr, 0);
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) pr(i * 4 + j, q) = sh[i] * sh[j];
      }
      for (int sz = 0; sz < sub; ++sz) {
        for (int q = 0; q < nq_; ++q) {
          const double t = (sz + rule.x[q]) / sub;
          zq[q] = az + t * hz;
          const auto sh = hermite_shapes(t, hz, 0);
          for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) pz(i * 4 + j, q) = sh[i] * sh[j];
        }
        const double jac = (hr / sub) * (hz / sub);
        for (int qa = 0; qa < nq_; ++qa)
          for (int qb = 0; qb < nq_; ++qb) {
            const double dzc = zq[qb] - z_center;
            const double v = -z_charge / std::sqrt(rq[qa] * rq[qa] + dzc * dzc);
            wq(qa, qb) = rule.w[qa] * rule.w[qb] * jac * rq[qa] * v;
          }
        tmp.noalias() = pr * wq;
        loc.noalias() += tmp * pz.transpose();
      }
    }
    const int n_entries = static_cast<int>(es.slots.size()) / 2;
    for (int e = 0; e < n_entries; ++e) {
      const int slot = es.slots[2 * e];
      const int lidx = es.slots[2 * e + 1];
      values[slot] += loc(lidx >> 4, lidx & 15);
    }
  }
}

AxialChannel::SpMat AxialChannel::hamiltonian(
    const std::vector<double>& wv_values) const {
  SpMat h = kin4_;
  // Scatter the potential into the four diagonal blocks via triplets.
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(wv_values.size() * 4);
  for (int r = 0; r < nsd_; ++r)
    for (int s = rowptr_[r]; s < rowptr_[r + 1]; ++s)
      for (int k = 0; k < 4; ++k)
        trips.emplace_back(k * nsd_ + r, k * nsd_ + colidx_[s], wv_values[s]);
  SpMat wv4(ndof(), ndof());
  wv4.setFromTriplets(trips.begin(), trips.end());
  h += wv4;
  return h;
}

AxialChannel::SpMat AxialChannel::half_space_overlap(double z_divide) const {
  AssembleOpts opts;
  opts.nq = 12;
  opts.lo = z_divide;
  const Eigen::MatrixXd szr = bz_.assemble(0, 0, nullptr, opts);
  const auto adj_r = adjacency(brho_);
  const auto adj_z = adjacency(bz_);
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < 4; ++k)
    add_kron_block(trips, k * nsd_, k * nsd_, 1.0, srho_w_, adj_r, szr, adj_z);
  SpMat s(ndof(), ndof());
  s.setFromTriplets(trips.begin(), trips.end());
  return s;
}

AxialStationaryResult axial_stationary_1s(const AxialChannel& ch, double z_charge,
                                          double z_center_fm, double sigma,
                                          int refine_sub) {
  std::vector<double> wv;
  ch.potential_block(z_charge, fm_to_au(z_center_fm), wv, refine_sub);
  const AxialChannel::SpMat h = ch.hamiltonian(wv);
  const AxialChannel::SpMat& s4 = ch.overlap();
  AxialChannel::SpMat a = h - sigma * s4;
  a.makeCompressed();
  Eigen::SparseLU<AxialChannel::SpMat> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("axial stationary: LU factorization failed");

  Eigen::VectorXd x = Eigen::VectorXd::Ones(ch.ndof());
  x /= std::sqrt(x.dot(s4 * x));
  AxialStationaryResult res;
  double e_prev = 0.0;
  for (int it = 0; it < 50; ++it) {
    Eigen::VectorXd y = lu.solve(s4 * x);
    y /= std::sqrt(y.dot(s4 * y));
    x = y;
    const double e = x.dot(h * x);
    res.iterations = it + 1;
    if (it > 0 && std::abs(e - e_prev) < 1e-10 * std::abs(e) + 1e-12) {
      e_prev = e;
      break;
    }
    e_prev = e;
  }
  res.e_1s = e_prev;
  res.coef = x;
  return res;
}

// ---------------------------------------------------------------------------
// Crank-Nicolson propagation
// ---------------------------------------------------------------------------

// Owns the CN matrix M+ = S + i(dt/2)H(t) on a fixed sparsity pattern; per
// step only the potential values change, written through precomputed maps into
// the compressed value array, so the symbolic factorization is reused.
class AxialPropagator {
 public:
  using SpMatC = AxialChannel::SpMatC;
  using cd = std::complex<double>;

  AxialPropagator(const AxialChannel& ch, double dt) : ch_(ch), dt_(dt) {
    const int n = ch.ndof();
    const int nsd = ch.spatial_dofs();
    s4c_ = ch.overlap().cast<cd>();
    // Base = S4 + i dt/2 * kinetic, with the diagonal blocks padded to the
    // full kron pattern so potential updates never change the structure.
    std::vector<Eigen::Triplet<cd>> trips;
    const cd ih(0.0, 0.5 * dt);
    for (int j = 0; j < n; ++j)
      for (AxialChannel::SpMat::InnerIterator it(ch.overlap(), j); it; ++it)
        trips.emplace_back(static_cast<int>(it.row()), j, cd(it.value()));
    for (int j = 0; j < n; ++j)
      for (AxialChannel::SpMat::InnerIterator it(ch.kinetic(), j); it; ++it)
        trips.emplace_back(static_cast<int>(it.row()), j, ih * it.value());
    const auto& rowptr = ch.block_rowptr();
    const auto& colidx = ch.block_colidx();
    for (int r = 0; r < nsd; ++r)
      for (int s = rowptr[r]; s < rowptr[r + 1]; ++s)
        for (int k = 0; k < 4; ++k)
          trips.emplace_back(k * nsd + r, k * nsd + colidx[s], cd(0.0));
    m_.resize(n, n);
    m_.setFromTriplets(trips.begin(), trips.end());
    m_.makeCompressed();
    base_ = Eigen::Map<const Eigen::VectorXcd>(m_.valuePtr(), m_.nonZeros());

    // Value-array indices of every diagonal-block pattern slot.
    map_.resize(4);
    for (int k = 0; k < 4; ++k) {
      map_[k].resize(colidx.size());
      for (int r = 0; r < nsd; ++r)
        for (int s = rowptr[r]; s < rowptr[r + 1]; ++s) {
          const int row = k * nsd + r, col = k * nsd + colidx[s];
          const int* ib = m_.innerIndexPtr() + m_.outerIndexPtr()[col];
          const int* ie = m_.innerIndexPtr() + m_.outerIndexPtr()[col + 1];
          const int* it = std::lower_bound(ib, ie, row);
          if (it == ie || *it != row)
            throw std::logic_error("propagator map miss");
          map_[k][s] = static_cast<int>(m_.outerIndexPtr()[col] + (it - ib));
        }
    }
    lu_.analyzePattern(m_);
  }

  // Load H(t) potential values (spatial block) and factorize.
  void set_potential(const std::vector<double>& wv) {
    Eigen::Map<Eigen::VectorXcd>(m_.valuePtr(), m_.nonZeros()) = base_;
    const cd ih(0.0, 0.5 * dt_);
    cd* val = m_.valuePtr();
    for (int k = 0; k < 4; ++k) {
      const auto& mk = map_[k];
      for (std::size_t s = 0; s < wv.size(); ++s) val[mk[s]] += ih * wv[s];
    }
    lu_.factorize(m_);
    if (lu_.info() != Eigen::Success)
      throw std::runtime_error("axial CN factorization failed");
  }

  // One CN step; returns the pre-solve right-hand side for diagnostics.
  void step(Eigen::VectorXcd& c, Eigen::VectorXcd& rhs) const {
    rhs = 2.0 * (s4c_ * c) - m_ * c;
    c = lu_.solve(rhs);
  }

  const SpMatC& overlap() const { return s4c_; }
  double dt() const { return dt_; }

 private:
  const AxialChannel& ch_;
  double dt_;
  SpMatC s4c_, m_;
  Eigen::VectorXcd base_;
  std::vector<std::vector<int>> map_;
  Eigen::SparseLU<SpMatC> lu_;
};

AxialCollideResult collide_axial(const AxialCollideParams& p) {
  AxialChannel ch(p.grid, p.nq);
  const double zt = fm_to_au(p.z_target_fm);
  std::vector<double> wv_t, wv_b, wv_sum;
  ch.potential_block(p.z_target, zt, wv_t, p.refine_sub);

  AxialStationaryResult init = axial_stationary_1s(ch, p.z_target, p.z_target_fm,
                                                   -4861.0, p.refine_sub);
  AxialCollideResult res;
  res.e_initial = init.e_1s;

  const double v = projectile_speed(p.mev_per_u);
  const double b = fm_to_au(p.b_fm);
  const double r_max = fm_to_au(p.grid.z_max_fm) - zt;
  if (b >= r_max)
    throw std::invalid_argument("impact parameter exceeds the z headroom");
  const double t_max = std::sqrt(r_max * r_max - b * b) / v;
  const double dt = 2.0 * t_max / p.steps;

  AxialPropagator prop(ch, dt);
  Eigen::VectorXcd c = init.coef.cast<std::complex<double>>();
  if (p.start_state) {
    if (p.start_state->size() != c.size())
      throw std::invalid_argument("resume state size does not match the grid");
    c = *p.start_state;
  }
  Eigen::VectorXcd rhs(ch.ndof());

  const bool has_proj = p.z_proj != 0.0;
  bool loaded = false;
  for (int n = p.start_step; n < p.steps; ++n) {
    const double tm = -t_max + (n + 0.5) * dt;
    const double rr = std::sqrt(b * b + (v * tm) * (v * tm));
    if (has_proj) {
      ch.potential_block(p.z_proj, zt + rr, wv_b, p.refine_sub);
      wv_sum.resize(wv_t.size());
      for (std::size_t i = 0; i < wv_t.size(); ++i)
        wv_sum[i] = wv_t[i] + wv_b[i];
      prop.set_potential(wv_sum);
    } else if (!loaded) {
      prop.set_potential(wv_t);
      loaded = true;
    }
    prop.step(c, rhs);
    if (p.timeseries_stride > 0 && (n + 1) % p.timeseries_stride == 0) {
      const Eigen::VectorXcd sc = prop.overlap() * c;
      const double norm = c.dot(sc).real();
      // H(t_mid) c is free from the solved system: (rhs - S c) * 2/(i dt)
      const std::complex<double> hc = c.dot(rhs - sc);
      const double energy = (hc * std::complex<double>(0.0, -2.0 / dt)).real();
      res.series.push_back({tm, norm, energy / norm});
    }
    if (p.on_step) p.on_step(n + 1, -t_max + (n + 1) * dt, c);
  }

  const Eigen::VectorXcd sc = prop.overlap() * c;
  res.norm_final = c.dot(sc).real();
  const Eigen::VectorXcd phi0 = init.coef.cast<std::complex<double>>();
  res.p_survival = std::norm(phi0.dot(sc));

  const double z_div = zt + 0.5 * r_max;
  res.z_divide_fm = au_to_fm(z_div);
  const AxialChannel::SpMat shalf = ch.half_space_overlap(z_div);
  res.p_ct = c.dot(shalf.cast<std::complex<double>>() * c).real();
  return res;
}

}  // namespace tcd
