#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tcd/hermite.hpp"
#include "tcd/quadrature.hpp"

namespace tcd {

// Which degrees of freedom a boundary node contributes.
enum class EndPolicy {
  kExclude,        // no dofs: value and derivative pinned to zero
  kDerivOnly,      // derivative dof only: value pinned to zero
  kValueAndDeriv,  // both dofs free (used at the cylindrical axis)
};

struct AssembleOpts {
  int nq = 8;                     // Gauss points per (sub)interval
  std::vector<double> split;      // weight kink locations: integration split there
  double refine_center = std::numeric_limits<double>::quiet_NaN();
  double refine_radius = 0.0;     // elements within radius of center get subdivided
  int refine_sub = 1;             // number of subintervals for refined elements
  double lo = std::numeric_limits<double>::quiet_NaN();  // optional integration window
  double hi = std::numeric_limits<double>::quiet_NaN();
};

// One-dimensional cubic Hermite basis over a fixed node vector with selectable
// boundary-node policies.  Interior nodes always carry value+derivative dofs.
// Dof order: ascending node, value dof before derivative dof.
class HermiteBasis {
 public:
  struct DofSlot {
    int dof;
    int slot;  // 0..3 local Hermite slot within an element
  };

  HermiteBasis(std::vector<double> nodes, EndPolicy lo, EndPolicy hi)
      : nodes_(std::move(nodes)), lo_(lo), hi_(hi) {
    if (nodes_.size() < 3) throw std::invalid_argument("HermiteBasis: need >= 3 nodes");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      if (!(nodes_[i] > nodes_[i - 1]))
        throw std::invalid_argument("HermiteBasis: nodes must increase");
    const int n_nodes = static_cast<int>(nodes_.size());
    offsets_.assign(n_nodes, -1);
    int next = 0;
    for (int i = 0; i < n_nodes; ++i) {
      const bool boundary = (i == 0 || i == n_nodes - 1);
      const EndPolicy pol = (i == 0) ? lo_ : hi_;
      if (!boundary) {
        offsets_[i] = next;
        next += 2;
      } else if (pol == EndPolicy::kDerivOnly) {
        offsets_[i] = next;
        next += 1;
      } else if (pol == EndPolicy::kValueAndDeriv) {
        offsets_[i] = next;
        next += 2;
      }
    }
    ndof_ = next;
  }

  int ndof() const { return ndof_; }
  int elements() const { return static_cast<int>(nodes_.size()) - 1; }
  const std::vector<double>& nodes() const { return nodes_; }
  double lo() const { return nodes_.front(); }
  double hi() const { return nodes_.back(); }

  // Dofs carried by node i: returns the count (0..2) and fills (dof, kind)
  // pairs where kind 0 = value, 1 = derivative.
  int node_dofs(int i, DofSlot out[2]) const {
    const int n_nodes = static_cast<int>(nodes_.size());
    if (offsets_[i] < 0) return 0;
    const bool boundary = (i == 0 || i == n_nodes - 1);
    const EndPolicy pol = (i == 0) ? lo_ : hi_;
    if (boundary && pol == EndPolicy::kDerivOnly) {
      out[0] = {offsets_[i], 1};
      return 1;
    }
    out[0] = {offsets_[i], 0};
    out[1] = {offsets_[i] + 1, 1};
    return 2;
  }

  // Dofs supported on element e (between nodes e and e+1); slot = local
  // Hermite slot index (left value, left deriv, right value, right deriv).
  int element_dofs(int e, DofSlot out[4]) const {
    int n = 0;
    DofSlot nd[2];
    int c = node_dofs(e, nd);
    for (int k = 0; k < c; ++k) out[n++] = {nd[k].dof, nd[k].slot};
    c = node_dofs(e + 1, nd);
    for (int k = 0; k < c; ++k) out[n++] = {nd[k].dof, 2 + nd[k].slot};
    return n;
  }

  // M_ij = integral of s_i^(db) * w(x) * s_j^(dk) dx over the mesh (or over the
  // optional [lo, hi] window).  Weight kinks listed in opts.split become
  // integration breakpoints; elements near opts.refine_center are subdivided.
  Eigen::MatrixXd assemble(int db, int dk,
                           const std::function<double(double)>& weight,
                           const AssembleOpts& opts = {}) const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(ndof_, ndof_);
    const GaussRule rule = gauss_legendre(opts.nq);
    DofSlot ds[4];
    const bool windowed = std::isfinite(opts.lo) || std::isfinite(opts.hi);
    const double wlo = std::isfinite(opts.lo) ? opts.lo : nodes_.front();
    const double whi = std::isfinite(opts.hi) ? opts.hi : nodes_.back();
    for (int e = 0; e < elements(); ++e) {
      const double a = nodes_[e], b = nodes_[e + 1];
      const double h = b - a;
      double clip_a = a, clip_b = b;
      if (windowed) {
        clip_a = std::max(a, wlo);
        clip_b = std::min(b, whi);
        if (clip_b <= clip_a) continue;
      }
      // Integration breakpoints within the (possibly clipped) element.
      std::vector<double> pts = {clip_a, clip_b};
      for (double s : opts.split)
        if (s > clip_a && s < clip_b) pts.push_back(s);
      std::sort(pts.begin(), pts.end());
      int sub = 1;
      if (opts.refine_sub > 1 && std::isfinite(opts.refine_center)) {
        const double d = std::max(0.0, std::max(opts.refine_center - b,
                                                a - opts.refine_center));
        if (d <= opts.refine_radius) sub = opts.refine_sub;
      }
      const int ndof_e = element_dofs(e, ds);
      Eigen::Matrix4d loc = Eigen::Matrix4d::Zero();
      for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
        const double seg_a = pts[p], seg_len = (pts[p + 1] - pts[p]) / sub;
        for (int s = 0; s < sub; ++s) {
          const double x0 = seg_a + s * seg_len;
          for (int q = 0; q < opts.nq; ++q) {
            const double x = x0 + rule.x[q] * seg_len;
            const double wq = rule.w[q] * seg_len * (weight ? weight(x) : 1.0);
            const double t = (x - a) / h;
            const auto bi = hermite_shapes(t, h, db);
            const auto bj = hermite_shapes(t, h, dk);
            for (int i = 0; i < 4; ++i)
              for (int j = 0; j < 4; ++j) loc(i, j) += wq * bi[i] * bj[j];
          }
        }
      }
      for (int i = 0; i < ndof_e; ++i)
        for (int j = 0; j < ndof_e; ++j)
          M(ds[i].dof, ds[j].dof) += loc(ds[i].slot, ds[j].slot);
    }
    return M;
  }

  Eigen::MatrixXd assemble(int db = 0, int dk = 0) const {
    return assemble(db, dk, nullptr, AssembleOpts{});
  }

  // Evaluate an expansion (and derivatives up to 3) at x.
  double eval(const Eigen::Ref<const Eigen::VectorXd>& coef, double x,
              int deriv = 0) const {
    const int e = find_element(x);
    const double a = nodes_[e], h = nodes_[e + 1] - a;
    const double t = (x - a) / h;
    const auto B = hermite_shapes(t, h, deriv);
    DofSlot ds[4];
    const int n = element_dofs(e, ds);
    double v = 0.0;
    for (int k = 0; k < n; ++k) v += coef[ds[k].dof] * B[ds[k].slot];
    return v;
  }

  int find_element(double x) const {
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    int e = static_cast<int>(it - nodes_.begin()) - 1;
    return std::clamp(e, 0, elements() - 1);
  }

 private:
  std::vector<double> nodes_;
  EndPolicy lo_, hi_;
  std::vector<int> offsets_;
  int ndof_ = 0;
};

}  // namespace tcd
