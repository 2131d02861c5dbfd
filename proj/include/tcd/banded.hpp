#pragma once

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <vector>

#include <lapacke.h>

namespace tcd {

// Complex banded matrix in LAPACK general-band storage (column-major AB with
// leading dimension 2*kl+ku+1, factorization overwrites in place).
class BandedComplex {
 public:
  BandedComplex(int n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
        ab_(static_cast<std::size_t>(ldab_) * n), ipiv_(n) {}

  void zero() { std::fill(ab_.begin(), ab_.end(), std::complex<double>(0.0)); }

  // Entry (i, j) for |i - j| <= band; stored at AB(kl + ku + i - j, j).
  std::complex<double>& at(int i, int j) {
    return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
  }

  void factor() {
    const int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_,
                                    reinterpret_cast<lapack_complex_double*>(ab_.data()),
                                    ldab_, ipiv_.data());
    if (info != 0) throw std::runtime_error("zgbtrf failed, info=" + std::to_string(info));
  }

  // Solve in place for nrhs right-hand sides stored column-major in b (n x nrhs).
  void solve(std::complex<double>* b, int nrhs) const {
    const int info = LAPACKE_zgbtrs(
        LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, nrhs,
        reinterpret_cast<const lapack_complex_double*>(ab_.data()), ldab_,
        ipiv_.data(), reinterpret_cast<lapack_complex_double*>(b), n_);
    if (info != 0) throw std::runtime_error("zgbtrs failed, info=" + std::to_string(info));
  }

  int n() const { return n_; }
  int kl() const { return kl_; }
  int ku() const { return ku_; }

 private:
  int n_, kl_, ku_, ldab_;
  std::vector<std::complex<double>> ab_;
  std::vector<lapack_int> ipiv_;
};

}  // namespace tcd
