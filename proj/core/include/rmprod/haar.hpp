#pragma once

#include <functional>

#include "rmprod/types.hpp"

namespace rmprod {

// How an average over the closed group generated by a unitary was computed:
// exact enumeration of a finite cyclic group, an ergodic average over N
// powers, or the exact phase-selector evaluation of a character integral.
struct HaarMeta {
  enum class Method { finite_group, ergodic, phase_selector };
  Method method = Method::ergodic;
  long long order = 0;    // group size when finite (0 = none detected)
  long long samples = 0;  // ergodic length when averaging powers
};

// Eigenphase frame of a unitary: u = basis * diag(exp(i*phases)) * basis^*.
// Powers are produced by multiplying the phases, so u^n stays exactly
// unitary for any n instead of accumulating rounding over n multiplies.
struct UnitaryFrame {
  CMatrix basis;
  RVector phases;

  int dim() const { return static_cast<int>(phases.size()); }

  CMatrix power(long long n) const {
    const int d = dim();
    CVector ph(d);
    for (int j = 0; j < d; ++j)
      ph(j) = std::polar(1.0, static_cast<double>(n) * phases(j));
    return basis * ph.asDiagonal() * basis.adjoint();
  }

  static UnitaryFrame of(const CMatrix& u, double tol = 1e-10);
};

// Smallest m in [1, bound] with max_j |exp(i*m*phi_j) - 1| <= tol, else 0.
long long finite_order(const RVector& phases, long long bound = 10000,
                       double tol = 1e-10);

// Phase selector: 1 when w is (numerically) 1, else 0.  This is the exact
// value of the character average int u^w d(u) over the closed subgroup
// generated by a unitary with the given phase monomial w.
inline double phase_selector(const cplx& w, double tol = 1e-9) {
  return std::abs(w - 1.0) <= tol ? 1.0 : 0.0;
}

// Average of p over the closure of the powers of u: exact enumeration when
// u has finite order (scan capped at min(n_samples, 10^4), the phase
// rationality bound), otherwise the ergodic average (1/N) sum_k p(u^{-k}).
CMatrix haar_average(const CMatrix& u,
                     const std::function<CMatrix(const CMatrix&)>& p,
                     long long n_samples = 100000, HaarMeta* meta = nullptr);

}  // namespace rmprod
