#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace rmprod {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using IMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

// Flat index of the entry (i,j) of a d x d matrix, row-major.  All
// second-moment tensors E(V_ij V_kl) are stored as (d*d) x (d*d) matrices
// over these pair indices.
inline int pair_index(int i, int j, int d) { return i * d + j; }

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParabolicChannel : ValidationError {
  using ValidationError::ValidationError;
};
struct NoEllipticChannel : ValidationError {
  using ValidationError::ValidationError;
};
struct SingularStart : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularPivot : std::runtime_error {
  long long step_index;
  SingularPivot(const std::string& msg, long long step)
      : std::runtime_error(msg), step_index(step) {}
};
struct RankCollapse : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RankDeficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidCovariance : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonRealSpectrum : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooFewPoints : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SizeCap : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rmprod
