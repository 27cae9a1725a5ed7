#include "rmprod/band_edge.hpp"

#include <cstdlib>
#include <vector>

namespace rmprod {

namespace {

long long checked_mul(long long a, long long b) {
  long long r;
  if (__builtin_mul_overflow(a, b, &r))
    throw OverflowError("band edge: integer multiply overflow");
  return r;
}

long long checked_add(long long a, long long b) {
  long long r;
  if (__builtin_add_overflow(a, b, &r))
    throw OverflowError("band edge: integer add overflow");
  return r;
}

IMatrix imul(const IMatrix& a, const IMatrix& b) {
  IMatrix r = IMatrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (Eigen::Index j = 0; j < b.cols(); ++j)
        r(i, j) = checked_add(r(i, j), checked_mul(a(i, k), b(k, j)));
    }
  return r;
}

// Pascal triangle up to row n
std::vector<std::vector<long long>> binomials(int n) {
  std::vector<std::vector<long long>> c(n + 1);
  for (int i = 0; i <= n; ++i) {
    c[i].assign(i + 1, 1);
    for (int j = 1; j < i; ++j) c[i][j] = checked_add(c[i - 1][j - 1], c[i - 1][j]);
  }
  return c;
}

// integer Gauss-Jordan restricted to unit pivots (with row swaps); throws
// when no +-1 pivot is available in some column
IMatrix unit_pivot_inverse(IMatrix m) {
  const Eigen::Index n = m.rows();
  IMatrix inv = IMatrix::Identity(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = -1;
    for (Eigen::Index r = c; r < n; ++r)
      if (m(r, c) == 1 || m(r, c) == -1) {
        piv = r;
        break;
      }
    if (piv < 0)
      throw ValidationError("band edge: no unit pivot in integer elimination");
    m.row(c).swap(m.row(piv));
    inv.row(c).swap(inv.row(piv));
    if (m(c, c) == -1) {
      m.row(c) = -m.row(c);
      inv.row(c) = -inv.row(c);
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c || m(r, c) == 0) continue;
      long long f = m(r, c);
      for (Eigen::Index j = 0; j < n; ++j) {
        m(r, j) = checked_add(m(r, j), -checked_mul(f, m(c, j)));
        inv(r, j) = checked_add(inv(r, j), -checked_mul(f, inv(c, j)));
      }
    }
  }
  return inv;
}

}  // namespace

BandEdgeModel build_band_edge(int d) {
  if (d < 1 || d > 15)
    throw ValidationError("band edge: width must be between 1 and 15");
  const int n = 2 * d;
  auto c = binomials(n);

  BandEdgeModel model;
  model.d = d;
  model.alpha = 2.0 / (4.0 * d - 1.0);

  model.T = IMatrix::Zero(n, n);
  for (int k = 1; k <= n; ++k)
    model.T(0, k - 1) = (k % 2 == 1 ? 1 : -1) * c[n][k];
  for (int k = 1; k < n; ++k) model.T(k, k - 1) = 1;

  model.S = IMatrix::Zero(n, n);
  model.S(0, d - 1) = 1;

  model.M = IMatrix::Zero(n, n);
  for (int j = 1; j <= n; ++j)
    for (int k = 1; j + k <= n + 1; ++k) model.M(j - 1, k - 1) = c[n - j][k - 1];

  model.Minv = unit_pivot_inverse(model.M);
  if (!imul(model.M, model.Minv).isApprox(IMatrix::Identity(n, n)))
    throw ValidationError("band edge: integer inverse failed verification");

  model.J = imul(imul(model.Minv, model.T), model.M);
  IMatrix jordan = IMatrix::Identity(n, n);
  for (int k = 0; k + 1 < n; ++k) jordan(k, k + 1) = 1;
  if (!model.J.isApprox(jordan))
    throw ValidationError("band edge: conjugation did not produce a Jordan block");

  model.MSM = imul(imul(model.Minv, model.S), model.M);
  return model;
}

}  // namespace rmprod
