#include "rmprod/flag.hpp"

#include <cmath>

namespace rmprod {

CMatrix FlagModel::t0() const {
  const int d = dim();
  CMatrix t = CMatrix::Zero(d, d);
  int off = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    t.block(off, off, dims[i], dims[i]) = magnitudes[i] * unitaries[i];
    off += dims[i];
  }
  return t;
}

CMatrix FlagModel::rhat_power(long long n) const {
  const int d = dim();
  CMatrix r = CMatrix::Zero(d, d);
  int off = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    CVector ph(dims[i]);
    for (int j = 0; j < dims[i]; ++j)
      ph(j) = std::polar(1.0, static_cast<double>(n) * frame_phases[i](j));
    r.block(off, off, dims[i], dims[i]) =
        frame_bases[i] * ph.asDiagonal() * frame_bases[i].adjoint();
    off += dims[i];
  }
  return r;
}

FlagModel FlagModel::make(std::vector<double> mags, std::vector<CMatrix> blocks,
                          double tol) {
  if (mags.empty() || mags.size() != blocks.size())
    throw ValidationError("flag model: need one magnitude per unitary block");
  FlagModel m;
  for (std::size_t i = 0; i < mags.size(); ++i) {
    if (mags[i] <= 0.0)
      throw ValidationError("flag model: magnitudes must be positive");
    if (i > 0 && mags[i] <= mags[i - 1] * (1.0 + tol))
      throw ValidationError("flag model: magnitudes must be strictly increasing");
    const CMatrix& u = blocks[i];
    if (u.rows() != u.cols() || u.rows() == 0)
      throw ValidationError("flag model: unitary blocks must be square");
    int b = static_cast<int>(u.rows());
    if ((u.adjoint() * u - CMatrix::Identity(b, b)).norm() > tol)
      throw ValidationError("flag model: block not unitary");
    Eigen::ComplexSchur<CMatrix> schur(u);
    RVector ph(b);
    for (int j = 0; j < b; ++j) ph(j) = std::arg(schur.matrixT()(j, j));
    CVector e(b);
    for (int j = 0; j < b; ++j) e(j) = std::polar(1.0, ph(j));
    if ((schur.matrixU() * e.asDiagonal() * schur.matrixU().adjoint() - u).norm() >
        1e-9)
      throw ValidationError("flag model: eigenphase frame reconstruction failed");
    m.dims.push_back(b);
    m.magnitudes.push_back(mags[i]);
    m.unitaries.push_back(u);
    m.frame_bases.push_back(schur.matrixU());
    m.frame_phases.push_back(ph);
  }
  return m;
}

RVector principal_angles(const CMatrix& a, const CMatrix& b) {
  auto thin_q = [](const CMatrix& m) {
    Eigen::ColPivHouseholderQR<CMatrix> qr(m);
    if (qr.rank() < m.cols())
      throw RankDeficient("principal_angles: rank-deficient column set");
    return CMatrix(CMatrix(qr.householderQ()).leftCols(m.cols()));
  };
  CMatrix qa = thin_q(a), qb = thin_q(b);
  const CMatrix c = qa.adjoint() * qb;
  Eigen::JacobiSVD<CMatrix> cos_svd(c);
  RVector cosv = cos_svd.singularValues();  // descending -> angles ascending
  // cosines resolve a tiny angle only to sqrt(eps); below 45 degrees read the
  // angle instead from the residual of b against a, whose singular values are
  // the sines of the same angles (largest first)
  Eigen::JacobiSVD<CMatrix> sin_svd(CMatrix(qb - qa * c));
  RVector sinv = sin_svd.singularValues();
  RVector ang(cosv.size());
  for (Eigen::Index i = 0; i < cosv.size(); ++i) {
    const double cv = std::min(1.0, cosv(i));
    if (cv * cv > 0.5)
      ang(i) = std::asin(std::min(1.0, sinv(sinv.size() - 1 - i)));
    else
      ang(i) = std::acos(cv);
  }
  return ang;
}

bool flag_attracted(const FlagModel& model, const CMatrix& f0, double tol) {
  const int d = model.dim();
  if (f0.rows() != d || f0.cols() != d)
    throw ValidationError("flag_attracted: frame must be square of model size");
  for (int p : model.flag_sizes()) {
    CMatrix minor = f0.bottomRightCorner(p, p);
    Eigen::JacobiSVD<CMatrix> svd(minor);
    if (svd.singularValues()(p - 1) <= tol) return false;
  }
  return true;
}

namespace {

// right-multiplication by a lower-triangular matrix preserves every trailing
// column span, so normalising columns and orthonormalising back-to-front are
// both legal renormalisations of a flag frame
void normalise_columns(CMatrix& f, RVector* lognorms = nullptr) {
  for (Eigen::Index j = 0; j < f.cols(); ++j) {
    double s = f.col(j).norm();
    if (s > 0) {
      f.col(j) /= s;
      if (lognorms) (*lognorms)(j) += std::log(s);
    }
  }
}

void backward_gram_schmidt(CMatrix& f) {
  for (Eigen::Index j = f.cols() - 1; j >= 0; --j) {
    for (Eigen::Index k = j + 1; k < f.cols(); ++k)
      f.col(j) -= f.col(k).dot(f.col(j)) * f.col(k);
    double s = f.col(j).norm();
    if (s > 0) f.col(j) /= s;
  }
}

}  // namespace

FlagState propagate_flag(const FlagModel& model, const NoiseModel& nm,
                         double lambda, long long n, std::uint64_t seed,
                         const CMatrix& f0, double renorm_cond) {
  const int d = model.dim();
  if (nm.dim != d) throw ValidationError("propagate_flag: noise dimension mismatch");
  if (f0.rows() != d || f0.cols() != d)
    throw ValidationError("propagate_flag: start frame must be square");

  CMatrix cdiag = CMatrix::Zero(d, d);
  int off = 0;
  for (std::size_t i = 0; i < model.dims.size(); ++i) {
    for (int j = 0; j < model.dims[i]; ++j)
      cdiag(off + j, off + j) = model.magnitudes[i];
    off += model.dims[i];
  }

  FlagState st;
  st.F = f0;
  st.attracted_start = flag_attracted(model, f0);
  st.column_lognorms = RVector::Zero(d);
  normalise_columns(st.F);
  for (long long k = 1; k <= n; ++k) {
    CMatrix v = nm.draw(seed, static_cast<std::uint64_t>(k));
    if (nm.clip_bound &&
        op_norm(v) > *nm.clip_bound * std::pow(lambda, nm.clip_exponent - 1.0))
      v.setZero();
    CMatrix step =
        cdiag + lambda * (model.rhat_power(-k) * v * model.rhat_power(k - 1));
    st.F = step * st.F;
    normalise_columns(st.F, &st.column_lognorms);
    Eigen::JacobiSVD<CMatrix> svd(st.F);
    double smin = svd.singularValues()(d - 1);
    double smax = svd.singularValues()(0);
    if (smin < 1e-12)
      throw RankCollapse("propagate_flag: frame collapsed at step " +
                         std::to_string(k));
    if (smax / smin > renorm_cond) {
      backward_gram_schmidt(st.F);
      ++st.renorms;
      smin = 1.0;
    }
    st.min_sv = smin;
    st.n = k;
  }
  return st;
}

std::vector<RVector> flag_angles_to_stable(const FlagModel& model, const CMatrix& f) {
  const int d = model.dim();
  if (f.rows() != d || f.cols() != d)
    throw ValidationError("flag_angles_to_stable: frame must be square");
  std::vector<RVector> out;
  for (int p : model.flag_sizes()) {
    CMatrix sub = f.rightCols(p);
    CMatrix axes = CMatrix::Zero(d, p);
    axes.bottomRows(p) = CMatrix::Identity(p, p);
    out.push_back(principal_angles(sub, axes));
  }
  return out;
}

}  // namespace rmprod
