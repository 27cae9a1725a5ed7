#pragma once

#include "rmprod/rng.hpp"
#include "rmprod/types.hpp"

namespace rmprod {

// Law of a mean-zero complex Gaussian vector z of length m, fixed by the
// covariance C = E(z z^*) (Hermitian) and pseudo-covariance R = E(z z^T)
// (symmetric).  Sampling goes through the real vector (x, y) = (Re z, Im z),
// whose 2m x 2m covariance is
//
//   Vxx = Re(C + R)/2,  Vyy = Re(C - R)/2,  Vxy = (Im R - Im C)/2,
//
// factored once at construction.  Moment matrices assembled numerically are
// PSD only up to rounding, so eigenvalues down to -1e-9 (relative) are
// clipped to zero; anything lower is a genuine inconsistency.
struct ComplexGaussianSpec {
  int dim = 0;   // m
  CMatrix C;
  CMatrix R;
  RMatrix chol;  // 2m x 2m factor: embedding = chol * chol^T

  RMatrix real_embedding() const;

  // draw with covariance scale^2 * C and pseudo-covariance scale^2 * R
  CVector sample(CounterRng& rng, double scale = 1.0) const;

  static ComplexGaussianSpec make(CMatrix C, CMatrix R, double tol = 1e-9);
};

}  // namespace rmprod
