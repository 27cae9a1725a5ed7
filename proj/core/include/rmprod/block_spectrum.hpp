#pragma once

#include "rmprod/linalg.hpp"
#include "rmprod/types.hpp"

namespace rmprod {

// Spectral data of the noiseless factor: block diagonal
//
//     T0 = diag(Gamma0, U, Gamma2^{-1})
//
// with ||Gamma0||, ||Gamma2|| <= exp(-gamma) < 1 (operator norm) and U
// unitary.  The unitary middle block is stored twice: verbatim, and as an
// eigenphase frame U = Qb diag(exp(i phi)) Qb^* so that arbitrary powers
// U^n can be applied exactly (phases are multiplied by n before
// exponentiation; no error accumulates over steps).
struct BlockSpectrum {
  int d0 = 0, d1 = 0, d2 = 0;
  CMatrix Gamma0, U, Gamma2;
  double gamma = std::numeric_limits<double>::infinity();
  CMatrix Gamma2inv;     // precomputed inverse of Gamma2 (the expanding block)
  CMatrix frame_basis;   // Qb, unitary, d1 x d1
  RVector frame_phases;  // phi, d1

  int dim() const { return d0 + d1 + d2; }

  // U^n, exactly unitary for every n (positive or negative)
  CMatrix u_power(long long n) const {
    if (d1 == 0) return CMatrix::Zero(0, 0);
    CVector ph(d1);
    for (int j = 0; j < d1; ++j)
      ph(j) = std::polar(1.0, static_cast<double>(n) * frame_phases(j));
    return frame_basis * ph.asDiagonal() * frame_basis.adjoint();
  }

  // R^n = diag(1_{d0}, U^n), the rotating frame on the first d0+d1 coords
  CMatrix r_power(long long n) const {
    CMatrix r = CMatrix::Identity(d0 + d1, d0 + d1);
    if (d1 > 0) r.bottomRightCorner(d1, d1) = u_power(n);
    return r;
  }

  // S = diag(Gamma0, 1_{d1}): the noiseless A-block in the rotating frame
  CMatrix s_matrix() const {
    CMatrix s = CMatrix::Identity(d0 + d1, d0 + d1);
    if (d0 > 0) s.topLeftCorner(d0, d0) = Gamma0;
    return s;
  }

  static BlockSpectrum make(CMatrix gamma0, CMatrix u, CMatrix gamma2,
                            double tol = 1e-10);
};

inline BlockSpectrum BlockSpectrum::make(CMatrix gamma0, CMatrix u, CMatrix gamma2,
                                         double tol) {
  BlockSpectrum s;
  s.d0 = static_cast<int>(gamma0.rows());
  s.d1 = static_cast<int>(u.rows());
  s.d2 = static_cast<int>(gamma2.rows());
  if (gamma0.cols() != s.d0 || u.cols() != s.d1 || gamma2.cols() != s.d2)
    throw ValidationError("block spectrum: blocks must be square");
  if (s.d0 + s.d1 == 0)
    throw ValidationError("block spectrum: d0 + d1 must be positive");

  double worst = 0.0;
  if (s.d0 > 0) worst = std::max(worst, op_norm(gamma0));
  if (s.d2 > 0) worst = std::max(worst, op_norm(gamma2));
  if (s.d0 + s.d2 > 0) {
    if (worst >= 1.0)
      throw ValidationError(
          "block spectrum: contraction blocks must have operator norm < 1, got " +
          std::to_string(worst));
    if (s.d0 > 0 && spectral_radius(gamma0) >= 1.0 - tol)
      throw ValidationError("block spectrum: spectral radius of Gamma0 not < 1");
    if (s.d2 > 0 && spectral_radius(gamma2) >= 1.0 - tol)
      throw ValidationError("block spectrum: spectral radius of Gamma2 not < 1");
    s.gamma = -std::log(worst);
  }

  if (s.d2 > 0) {
    Eigen::FullPivLU<CMatrix> lu(gamma2);
    if (!lu.isInvertible())
      throw ValidationError("block spectrum: Gamma2 must be invertible");
    s.Gamma2inv = lu.inverse();
  } else {
    s.Gamma2inv = CMatrix::Zero(0, 0);
  }

  if (s.d1 > 0) {
    double uerr = (u.adjoint() * u - CMatrix::Identity(s.d1, s.d1)).norm();
    if (uerr > tol)
      throw ValidationError("block spectrum: U not unitary, ||U*U - 1|| = " +
                            std::to_string(uerr));
    // Schur form of a normal matrix is diagonal; Qb comes out unitary.
    Eigen::ComplexSchur<CMatrix> schur(u);
    s.frame_basis = schur.matrixU();
    s.frame_phases.resize(s.d1);
    for (int j = 0; j < s.d1; ++j)
      s.frame_phases(j) = std::arg(schur.matrixT()(j, j));
    CVector ph(s.d1);
    for (int j = 0; j < s.d1; ++j) ph(j) = std::polar(1.0, s.frame_phases(j));
    double ferr = (s.frame_basis * ph.asDiagonal() * s.frame_basis.adjoint() - u).norm();
    if (ferr > 1e-9)
      throw ValidationError("block spectrum: eigenphase frame reconstruction failed");
  } else {
    s.frame_basis = CMatrix::Zero(0, 0);
    s.frame_phases = RVector::Zero(0);
  }

  s.Gamma0 = std::move(gamma0);
  s.U = std::move(u);
  s.Gamma2 = std::move(gamma2);
  return s;
}

}  // namespace rmprod
