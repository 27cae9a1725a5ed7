#include "rmprod/haar.hpp"

#include <cmath>

namespace rmprod {

UnitaryFrame UnitaryFrame::of(const CMatrix& u, double tol) {
  const int d = static_cast<int>(u.rows());
  if (u.cols() != d || d == 0)
    throw ValidationError("unitary frame: matrix must be square and nonempty");
  double uerr = (u.adjoint() * u - CMatrix::Identity(d, d)).norm();
  if (uerr > tol)
    throw ValidationError("unitary frame: input not unitary, ||u*u - 1|| = " +
                          std::to_string(uerr));
  // Schur form of a normal matrix is diagonal and the Schur basis unitary.
  Eigen::ComplexSchur<CMatrix> schur(u);
  UnitaryFrame f;
  f.basis = schur.matrixU();
  f.phases.resize(d);
  for (int j = 0; j < d; ++j) f.phases(j) = std::arg(schur.matrixT()(j, j));
  if ((f.power(1) - u).norm() > 1e-9)
    throw ValidationError("unitary frame: eigenphase reconstruction failed");
  return f;
}

long long finite_order(const RVector& phases, long long bound, double tol) {
  const double two_pi = 6.283185307179586476925286766559;
  for (long long m = 1; m <= bound; ++m) {
    double worst = 0.0;
    for (int j = 0; j < phases.size(); ++j) {
      double r = std::remainder(static_cast<double>(m) * phases(j), two_pi);
      worst = std::max(worst, 2.0 * std::abs(std::sin(0.5 * r)));
    }
    if (worst <= tol) return m;
  }
  return 0;
}

CMatrix haar_average(const CMatrix& u,
                     const std::function<CMatrix(const CMatrix&)>& p,
                     long long n_samples, HaarMeta* meta) {
  if (n_samples < 1) throw ValidationError("haar_average: n_samples must be >= 1");
  UnitaryFrame frame = UnitaryFrame::of(u);

  long long m = finite_order(frame.phases, std::min<long long>(n_samples, 10000));
  if (m > 0) {
    CMatrix acc = p(frame.power(1));
    for (long long k = 2; k <= m; ++k) acc += p(frame.power(k));
    if (meta) {
      meta->method = HaarMeta::Method::finite_group;
      meta->order = m;
      meta->samples = 0;
    }
    return acc / static_cast<double>(m);
  }

  CMatrix acc = p(frame.power(-1));
  for (long long k = 2; k <= n_samples; ++k) acc += p(frame.power(-k));
  if (meta) {
    meta->method = HaarMeta::Method::ergodic;
    meta->order = 0;
    meta->samples = n_samples;
  }
  return acc / static_cast<double>(n_samples);
}

}  // namespace rmprod
