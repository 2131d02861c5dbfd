#include "tcd/radial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tcd/banded.hpp"

namespace tcd {

double coulomb_point(double z, double r) { return -z / r; }

double coulomb_sphere(double z, double rn, double r) {
  if (r >= rn) return -z / r;
  return -z * (3.0 - (r * r) / (rn * rn)) / (2.0 * rn);
}

RadialChannel::RadialChannel(std::vector<double> nodes, int kappa)
    : basis_(std::move(nodes), EndPolicy::kExclude, EndPolicy::kExclude),
      kappa_(kappa) {
  AssembleOpts plain;
  plain.nq = 8;
  s_ = basis_.assemble(0, 0, nullptr, plain);
  d_ = basis_.assemble(0, 1, nullptr, plain);
  AssembleOpts sing;
  sing.nq = 16;
  winv_ = basis_.assemble(0, 0, [](double r) { return 1.0 / r; }, sing);
  const int m = basis_.ndof();
  s_full_ = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  s_full_.topLeftCorner(m, m) = s_;
  s_full_.bottomRightCorner(m, m) = s_;
}

Eigen::MatrixXd RadialChannel::weight_matrix(const std::function<double(double)>& w,
                                             const AssembleOpts& opts) const {
  return basis_.assemble(0, 0, w, opts);
}

Eigen::MatrixXd RadialChannel::hamiltonian(const Eigen::MatrixXd& wv) const {
  const int m = basis_.ndof();
  const double c = kSpeedOfLight;
  Eigen::MatrixXd k = kappa_ * c * winv_;
  Eigen::MatrixXd h(2 * m, 2 * m);
  h.topLeftCorner(m, m) = wv;
  h.topRightCorner(m, m) = -c * d_ + k;
  h.bottomLeftCorner(m, m) = c * d_ + k;
  h.bottomRightCorner(m, m) = wv - 2.0 * kC2 * s_;
  return h;
}

void RadialChannel::eigh(const Eigen::MatrixXd& h, const Eigen::MatrixXd& s,
                         Eigen::VectorXd& eps, Eigen::MatrixXd& vecs) {
  // Diagonal normalization keeps the pencil well-conditioned on grids whose
  // innermost elements are many orders of magnitude smaller than the box.
  const Eigen::VectorXd d = s.diagonal().array().sqrt().inverse().matrix();
  const Eigen::MatrixXd hs = d.asDiagonal() * h * d.asDiagonal();
  const Eigen::MatrixXd ss = d.asDiagonal() * s * d.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(hs, ss);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("generalized eigensolver failed");
  eps = solver.eigenvalues();
  vecs = d.asDiagonal() * solver.eigenvectors();
}

RadialGridParams default_grid_for(double z) {
  RadialGridParams g;
  g.r_max = 19.0 / z;
  g.eta = 50.0 / z;
  g.xi = 1.0;
  g.n_tail = 97;
  // Deeper potentials need the semilog tail to start closer to the origin to
  // resolve the r^(gamma-1) behavior; chosen to hit displayed-digit accuracy.
  if (z <= 95.0)
    g.r_min = 1e-7;
  else if (z <= 115.0)
    g.r_min = 1e-8;
  else
    g.r_min = 1e-13;
  return g;
}

namespace {

void fill_grid_defaults(RadialGridParams& g, double z) {
  const RadialGridParams d = default_grid_for(z);
  if (g.r_max <= 0.0) g.r_max = d.r_max;
  if (g.eta <= 0.0) g.eta = d.eta;
  if (g.r_min <= 0.0) g.r_min = d.r_min;
}

Eigen::MatrixXd target_weight(const RadialChannel& ch, double z, NuclearModel model) {
  AssembleOpts opts;
  opts.nq = 16;
  if (model == NuclearModel::kSphere) {
    const double rn = uranium_sphere_radius_au();
    opts.split = {rn};
    return ch.weight_matrix([z, rn](double r) { return coulomb_sphere(z, rn, r); },
                            opts);
  }
  return ch.weight_matrix([z](double r) { return coulomb_point(z, r); }, opts);
}

// Projectile monopole term: -Z_B / max(r, R), kinked at r = R.
Eigen::MatrixXd projectile_weight(const RadialChannel& ch, double zb, double rr) {
  AssembleOpts opts;
  opts.nq = 16;
  opts.split = {rr};
  return ch.weight_matrix(
      [zb, rr](double r) { return -zb / std::max(r, rr); }, opts);
}

}  // namespace

StationaryResult stationary_1s(double z, NuclearModel model, RadialGridParams grid) {
  fill_grid_defaults(grid, z);
  RadialChannel ch(radial_grid(grid.r_min, grid.r_max, grid.n_tail, grid.eta, grid.xi),
                   -1);
  const Eigen::MatrixXd wv = target_weight(ch, z, model);
  const Eigen::MatrixXd h = ch.hamiltonian(wv);
  StationaryResult res;
  RadialChannel::eigh(h, ch.overlap_full(), res.eps, res.vecs);
  const double ref = sommerfeld_1s(z);
  int best = 0;
  for (int i = 1; i < res.eps.size(); ++i)
    if (std::abs(res.eps[i] - ref) < std::abs(res.eps[best] - ref)) best = i;
  res.index_1s = best;
  res.e_1s = res.eps[best];
  return res;
}

namespace {

// Interleaved permutation: node-major ordering [P, P', Q, Q'] per spline node
// keeps the Crank-Nicolson matrix banded with half-bandwidth 7.
struct BandLayout {
  int m;                      // dofs per component
  std::vector<int> perm;      // perm[component * m + dof] -> banded index
  static constexpr int kHalfBand = 7;

  explicit BandLayout(int m_) : m(m_), perm(2 * m_) {
    for (int c = 0; c < 2; ++c)
      for (int d = 0; d < m_; ++d)
        perm[c * m_ + d] = 4 * (d / 2) + 2 * c + (d % 2);
  }
};

// Dense block quartet describing H (and S) in component-block form.
struct BlockRefs {
  const Eigen::MatrixXd& hpp;
  const Eigen::MatrixXd& hpq;
  const Eigen::MatrixXd& hqp;
  const Eigen::MatrixXd& hqq;
};

// Fill AB = S + i*(dt/2)*H in banded storage (both matrices share the block
// sparsity of the spline overlap).
void fill_cn_matrix(BandedComplex& ab, const BandLayout& lay,
                    const Eigen::MatrixXd& s, const BlockRefs& h, double half_dt) {
  ab.zero();
  const int m = lay.m;
  const std::complex<double> ih(0.0, half_dt);
  for (int d1 = 0; d1 < m; ++d1) {
    const int jlo = std::max(0, d1 - 3), jhi = std::min(m - 1, d1 + 3);
    for (int d2 = jlo; d2 <= jhi; ++d2) {
      const double sv = s(d1, d2);
      const int ip = lay.perm[d1], iq = lay.perm[m + d1];
      const int jp = lay.perm[d2], jq = lay.perm[m + d2];
      ab.at(ip, jp) += sv + ih * h.hpp(d1, d2);
      ab.at(ip, jq) += ih * h.hpq(d1, d2);
      ab.at(iq, jp) += ih * h.hqp(d1, d2);
      ab.at(iq, jq) += sv + ih * h.hqq(d1, d2);
    }
  }
}

// y = (2S - M) x where M is the banded CN matrix: implemented as
// y = 2*S*x - M*x with a band-limited multiply in the permuted ordering.
void cn_rhs(const BandLayout& lay, const Eigen::MatrixXd& s,
            const BlockRefs& h, double half_dt,
            const Eigen::VectorXcd& x_perm, Eigen::VectorXcd& y_perm) {
  const int m = lay.m;
  y_perm.setZero();
  const std::complex<double> ih(0.0, half_dt);
  for (int d1 = 0; d1 < m; ++d1) {
    const int jlo = std::max(0, d1 - 3), jhi = std::min(m - 1, d1 + 3);
    const int ip = lay.perm[d1], iq = lay.perm[m + d1];
    std::complex<double> accp = 0.0, accq = 0.0;
    for (int d2 = jlo; d2 <= jhi; ++d2) {
      const double sv = s(d1, d2);
      const int jp = lay.perm[d2], jq = lay.perm[m + d2];
      accp += (sv - ih * h.hpp(d1, d2)) * x_perm[jp] - ih * h.hpq(d1, d2) * x_perm[jq];
      accq += (sv - ih * h.hqq(d1, d2)) * x_perm[jq] - ih * h.hqp(d1, d2) * x_perm[jp];
    }
    y_perm[ip] = accp;
    y_perm[iq] = accq;
  }
}

}  // namespace

CollideResult collide_monopole(const CollideParams& p) {
  CollideParams par = p;
  fill_grid_defaults(par.grid, par.z_target);
  if (par.steps % 2 != 0) ++par.steps;  // closest approach must be a step boundary

  RadialChannel ch(radial_grid(par.grid.r_min, par.grid.r_max, par.grid.n_tail,
                               par.grid.eta, par.grid.xi),
                   -1);
  const int m = ch.basis().ndof();
  const int n = 2 * m;
  const Eigen::MatrixXd& s = ch.overlap_block();
  const Eigen::MatrixXd wt = target_weight(ch, par.z_target, par.target_model);
  const Eigen::MatrixXd ha = ch.hamiltonian(wt);

  Eigen::VectorXd eps;
  Eigen::MatrixXd vecs;
  RadialChannel::eigh(ha, ch.overlap_full(), eps, vecs);
  const double ref = sommerfeld_1s(par.z_target);
  int i1s = 0;
  for (int i = 1; i < eps.size(); ++i)
    if (std::abs(eps[i] - ref) < std::abs(eps[i1s] - ref)) i1s = i;

  CollideResult res;
  res.e_1s_initial = eps[i1s];

  const double v = projectile_speed(par.mev_per_u);
  const double b = fm_to_au(par.b_fm);
  const double r_box = ch.basis().hi();
  if (b >= r_box) throw std::invalid_argument("impact parameter exceeds the box");
  const double t_max = std::sqrt(r_box * r_box - b * b) / v;
  const double dt = 2.0 * t_max / par.steps;

  // Precomputed H_A blocks; the projectile adds W_B to both diagonal blocks.
  const double c = kSpeedOfLight;
  const Eigen::MatrixXd k = ch.kappa() * c * ch.inv_r_block();
  const Eigen::MatrixXd hpq0 = -c * ch.derivative_block() + k;
  const Eigen::MatrixXd hqp0 = c * ch.derivative_block() + k;
  const Eigen::MatrixXd hqq_t = wt - 2.0 * kC2 * s;

  BandLayout lay(m);
  BandedComplex ab(n, BandLayout::kHalfBand, BandLayout::kHalfBand);

  // Determinant-correction block: negative-continuum states plus the 1s.
  std::vector<int> det_cols;
  if (par.with_pbar) {
    for (int i = 0; i < eps.size(); ++i)
      if (eps[i] <= -2.0 * kC2) det_cols.push_back(i);
    det_cols.push_back(i1s);
  }

  // State vectors live in the permuted (banded) ordering.
  auto to_perm = [&](const Eigen::VectorXcd& x) {
    Eigen::VectorXcd y(n);
    for (int i = 0; i < n; ++i) y[lay.perm[i]] = x[i];
    return y;
  };
  auto from_perm = [&](const Eigen::VectorXcd& y) {
    Eigen::VectorXcd x(n);
    for (int i = 0; i < n; ++i) x[i] = y[lay.perm[i]];
    return x;
  };

  Eigen::VectorXcd cvec = vecs.col(i1s).cast<std::complex<double>>();
  Eigen::VectorXcd cperm = to_perm(cvec);
  Eigen::MatrixXcd block_perm;
  if (par.with_pbar) {
    block_perm.resize(n, det_cols.size());
    for (std::size_t j = 0; j < det_cols.size(); ++j)
      block_perm.col(j) = to_perm(vecs.col(det_cols[j]).cast<std::complex<double>>());
  }

  auto norm_of = [&](const Eigen::VectorXcd& x) {
    const Eigen::VectorXcd sx0 = s * x.head(m);
    const Eigen::VectorXcd sx1 = s * x.tail(m);
    return (x.head(m).dot(sx0) + x.tail(m).dot(sx1)).real();
  };
  auto energy_of = [&](const Eigen::VectorXcd& x, const Eigen::MatrixXd& wb) {
    // <x|H_A + W_B|x> / <x|S|x>
    const Eigen::VectorXcd hx = ha * x + [&] {
      Eigen::VectorXcd add(n);
      add.head(m) = wb * x.head(m);
      add.tail(m) = wb * x.tail(m);
      return add;
    }();
    return x.dot(hx).real() / norm_of(x);
  };

  Eigen::VectorXcd rhs(n), work(n);
  const double half_dt = 0.5 * dt;
  const bool has_proj = par.z_proj != 0.0;
  bool factored_static = false;

  for (int step = 0; step < par.steps; ++step) {
    const double tm = -t_max + (step + 0.5) * dt;
    const double rr = std::sqrt(b * b + (v * tm) * (v * tm));
    Eigen::MatrixXd wb;
    const Eigen::MatrixXd* hpp = &wt;
    Eigen::MatrixXd hpp_store, hqq_store;
    if (has_proj) {
      wb = projectile_weight(ch, par.z_proj, rr);
      hpp_store = wt + wb;
      hqq_store = hqq_t + wb;
      hpp = &hpp_store;
    }
    const Eigen::MatrixXd& hqq = has_proj ? hqq_store : hqq_t;
    BlockRefs href{*hpp, hpq0, hqp0, hqq};

    if (has_proj || !factored_static) {
      fill_cn_matrix(ab, lay, s, href, half_dt);
      ab.factor();
      factored_static = true;
    }
    cn_rhs(lay, s, href, half_dt, cperm, rhs);
    cperm = rhs;
    ab.solve(cperm.data(), 1);
    if (par.with_pbar) {
      Eigen::MatrixXcd brhs(n, block_perm.cols());
      for (int col = 0; col < block_perm.cols(); ++col) {
        cn_rhs(lay, s, href, half_dt, block_perm.col(col), work);
        brhs.col(col) = work;
      }
      block_perm = brhs;
      ab.solve(block_perm.data(), static_cast<int>(block_perm.cols()));
    }

    const int done = step + 1;
    if (done == par.steps / 2) {  // t = 0: closest approach
      const Eigen::VectorXcd x = from_perm(cperm);
      Eigen::MatrixXd wb0 = has_proj ? projectile_weight(ch, par.z_proj, b)
                                     : Eigen::MatrixXd::Zero(m, m);
      res.e_min = energy_of(x, wb0);
      res.e_min_over_mc2 = res.e_min / kC2 + 1.0;
    }
    if (par.timeseries_stride > 0 && done % par.timeseries_stride == 0) {
      const Eigen::VectorXcd x = from_perm(cperm);
      Eigen::MatrixXd wbs = has_proj
          ? projectile_weight(ch, par.z_proj,
                              std::sqrt(b * b + std::pow(v * (-t_max + done * dt), 2)))
          : Eigen::MatrixXd::Zero(m, m);
      res.series.push_back({-t_max + done * dt, norm_of(x), energy_of(x, wbs)});
    }
  }

  const Eigen::VectorXcd cfin = from_perm(cperm);
  res.norm_final = norm_of(cfin);

  // Project on the asymptotic (target-only) eigenbasis.
  Eigen::VectorXcd svec(n);
  svec.head(m) = s * cfin.head(m);
  svec.tail(m) = s * cfin.tail(m);
  const Eigen::VectorXcd amps = vecs.transpose() * svec;
  res.p_1s = std::norm(amps[i1s]);
  double pm = 0.0;
  for (int i = 0; i < eps.size(); ++i)
    if (eps[i] <= -2.0 * kC2) pm += std::norm(amps[i]);
  res.p_minus = pm;

  if (par.with_pbar) {
    const std::size_t nm = det_cols.size();
    Eigen::MatrixXcd mm(nm, nm);
    for (int col = 0; col < static_cast<int>(nm); ++col) {
      const Eigen::VectorXcd x = from_perm(block_perm.col(col));
      Eigen::VectorXcd sx(n);
      sx.head(m) = s * x.head(m);
      sx.tail(m) = s * x.tail(m);
      for (std::size_t row = 0; row < nm; ++row)
        mm(row, col) = vecs.col(det_cols[row]).cast<std::complex<double>>().dot(sx);
    }
    // log-scaled |det|^2 to avoid underflow in the 190+-dimensional block
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(mm);
    double log_abs = 0.0;
    for (int i = 0; i < static_cast<int>(nm); ++i)
      log_abs += std::log(std::abs(lu.matrixLU()(i, i)));
    res.p_bar_1s = std::exp(2.0 * log_abs);
  }
  return res;
}

}  // namespace tcd
