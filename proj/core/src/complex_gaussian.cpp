#include "rmprod/complex_gaussian.hpp"

#include <cmath>

namespace rmprod {

RMatrix ComplexGaussianSpec::real_embedding() const {
  const int m = dim;
  RMatrix vxx = 0.5 * (C + R).real();
  RMatrix vyy = 0.5 * (C - R).real();
  RMatrix vxy = 0.5 * (R.imag() - C.imag());
  RMatrix emb(2 * m, 2 * m);
  emb.topLeftCorner(m, m) = vxx;
  emb.topRightCorner(m, m) = vxy;
  emb.bottomLeftCorner(m, m) = vxy.transpose();
  emb.bottomRightCorner(m, m) = vyy;
  return emb;
}

ComplexGaussianSpec ComplexGaussianSpec::make(CMatrix C, CMatrix R, double tol) {
  ComplexGaussianSpec s;
  s.dim = static_cast<int>(C.rows());
  if (C.cols() != s.dim || R.rows() != s.dim || R.cols() != s.dim)
    throw ValidationError("complex gaussian: C and R must be square and equal-sized");
  double scale = std::max(1.0, std::max(C.norm(), R.norm()));
  if ((C - C.adjoint()).norm() > tol * scale)
    throw InvalidCovariance("complex gaussian: C not Hermitian");
  if ((R - R.transpose()).norm() > tol * scale)
    throw InvalidCovariance("complex gaussian: R not symmetric");
  s.C = std::move(C);
  s.R = std::move(R);

  RMatrix emb = s.real_embedding();
  emb = 0.5 * (emb + emb.transpose()).eval();  // kill rounding asymmetry
  Eigen::SelfAdjointEigenSolver<RMatrix> es(emb);
  if (es.info() != Eigen::Success)
    throw InvalidCovariance("complex gaussian: embedding eigensolve failed");
  RVector lam = es.eigenvalues();
  double floor = -1e-9 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  RVector root(lam.size());
  for (int i = 0; i < lam.size(); ++i) {
    if (lam(i) < floor)
      throw InvalidCovariance(
          "complex gaussian: real embedding indefinite, eigenvalue " +
          std::to_string(lam(i)));
    root(i) = std::sqrt(std::max(lam(i), 0.0));
  }
  s.chol = es.eigenvectors() * root.asDiagonal();
  return s;
}

CVector ComplexGaussianSpec::sample(CounterRng& rng, double scale) const {
  const int m = dim;
  RVector xi(2 * m);
  for (int i = 0; i < 2 * m; ++i) xi(i) = rng.next_normal();
  RVector w = chol * xi;
  CVector z(m);
  for (int j = 0; j < m; ++j) z(j) = scale * cplx(w(j), w(m + j));
  return z;
}

}  // namespace rmprod
