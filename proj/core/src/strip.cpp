#include "rmprod/strip.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rmprod {
namespace detail {

namespace {

// unimodular indicator: 1 when w == 1 within tol, else 0
double chi(cplx w, double tol = 1e-9) { return std::abs(w - 1.0) <= tol ? 1.0 : 0.0; }

}  // namespace

ChannelData assemble_channels(const RMatrix& A, RVector a_in, RMatrix O_in,
                              double E, double tol) {
  const int d = static_cast<int>(a_in.size());
  ChannelData ch;
  ch.d = d;
  ch.E = E;
  ch.A = A;

  // classify, then order hyperbolic-first with descending eigenvalues inside
  // each group
  std::vector<int> hyp, ell;
  for (int j = 0; j < d; ++j) {
    double u = E - a_in(j);
    if (std::abs(std::abs(u) - 2.0) <= tol) {
      std::ostringstream os;
      os << "channel " << j << " is parabolic: |E - a| = " << std::abs(u)
         << " within tol " << tol;
      throw ParabolicChannel(os.str());
    }
    (std::abs(u) > 2.0 ? hyp : ell).push_back(j);
  }
  auto desc = [&](int x, int y) { return a_in(x) > a_in(y); };
  std::sort(hyp.begin(), hyp.end(), desc);
  std::sort(ell.begin(), ell.end(), desc);
  ch.d_h = static_cast<int>(hyp.size());
  ch.d_e = static_cast<int>(ell.size());
  if (ch.d_e == 0)
    throw NoEllipticChannel("no elliptic channel at this energy");

  std::vector<int> perm = hyp;
  perm.insert(perm.end(), ell.begin(), ell.end());
  ch.a.resize(d);
  ch.O.resize(d, d);
  for (int j = 0; j < d; ++j) {
    ch.a(j) = a_in(perm[j]);
    ch.O.col(j) = O_in.col(perm[j]);
  }

  // roots of z + 1/z = E - a: hyperbolic root with |gamma| < 1 (same sign as
  // u), elliptic root on the unit circle with positive imaginary part
  const int dh = ch.d_h, de = ch.d_e;
  ch.gamma_list.resize(dh);
  ch.s_gamma.resize(dh);
  for (int j = 0; j < dh; ++j) {
    double u = E - ch.a(j);
    double g = u > 0 ? (u - std::sqrt(u * u - 4.0)) / 2.0
                     : (u + std::sqrt(u * u - 4.0)) / 2.0;
    ch.gamma_list(j) = g;
    ch.s_gamma(j) = 1.0 / (1.0 / g - g);
  }
  ch.z_list.resize(de);
  ch.s_z.resize(de);
  for (int j = 0; j < de; ++j) {
    double u = E - ch.a(dh + j);
    cplx z(u / 2.0, std::sqrt(std::max(0.0, 4.0 - u * u)) / 2.0);
    ch.z_list(j) = z;
    ch.s_z(j) = 1.0 / (std::conj(z) - z);
  }

  // frame Q (in the eigenbasis of A, hyperbolic-first coordinates):
  //   rows (d_h, d_e | d_h, d_e), columns (d_h, d_e, d_e, d_h)
  //   [[Gamma, 0,       0, Gamma^-1],
  //    [0,     conj(Z), Z, 0       ],
  //    [1,     0,       0, 1       ],
  //    [0,     1,       1, 0       ]]
  CMatrix qc = CMatrix::Zero(2 * d, 2 * d);
  const int c2 = dh, c3 = dh + de, c4 = dh + 2 * de;
  for (int j = 0; j < dh; ++j) {
    qc(j, j) = ch.gamma_list(j);
    qc(j, c4 + j) = 1.0 / ch.gamma_list(j);
    qc(d + j, j) = 1.0;
    qc(d + j, c4 + j) = 1.0;
  }
  for (int j = 0; j < de; ++j) {
    qc(dh + j, c2 + j) = std::conj(ch.z_list(j));
    qc(dh + j, c3 + j) = ch.z_list(j);
    qc(d + dh + j, c2 + j) = 1.0;
    qc(d + dh + j, c3 + j) = 1.0;
  }
  // closed-form inverse: diag(-S_G, S_Z, S_Z, -S_G) *
  //   [[1, 0, -Gamma^-1, 0], [0, 1, 0, -Z], [0, -1, 0, conj(Z)], [-1, 0, Gamma, 0]]
  // (column blocks address the coordinate layout (d_h, d_e | d_h, d_e))
  CMatrix qi = CMatrix::Zero(2 * d, 2 * d);
  for (int j = 0; j < dh; ++j) {
    cplx s = ch.s_gamma(j);
    qi(j, j) = -s;
    qi(j, d + j) = s / ch.gamma_list(j);
    qi(c4 + j, j) = s;
    qi(c4 + j, d + j) = -s * ch.gamma_list(j);
  }
  for (int j = 0; j < de; ++j) {
    cplx s = ch.s_z(j);
    qi(c2 + j, dh + j) = s;
    qi(c2 + j, d + dh + j) = -s * ch.z_list(j);
    qi(c3 + j, dh + j) = -s;
    qi(c3 + j, d + dh + j) = s * std::conj(ch.z_list(j));
  }
  // fold the eigenbasis rotation in so both maps act on original coordinates
  CMatrix rot = CMatrix::Zero(2 * d, 2 * d);
  rot.topLeftCorner(d, d) = ch.O.cast<cplx>();
  rot.bottomRightCorner(d, d) = ch.O.cast<cplx>();
  ch.Qmat = rot * qc;
  ch.Qinv = qi * rot.adjoint();

  // second moments of the elliptic block of O^T diag(v) O (unit-variance v)
  const int m = de * de;
  ch.ve2 = CMatrix::Zero(m, m);
  for (int i = 0; i < de; ++i)
    for (int j = 0; j < de; ++j)
      for (int k = 0; k < de; ++k)
        for (int l = 0; l < de; ++l) {
          double s = 0.0;
          for (int mm = 0; mm < d; ++mm)
            s += ch.O(mm, dh + i) * ch.O(mm, dh + j) * ch.O(mm, dh + k) *
                 ch.O(mm, dh + l);
          ch.ve2(pair_index(i, j, de), pair_index(k, l, de)) = s;
        }
  ch.ve2c = ch.ve2;  // real potential

  // selector-projected drift Q_{jl} = E((V_he^T S_G V_he))_{jl} chi(z_j conj(z_l))
  ch.Qdrift = CMatrix::Zero(de, de);
  for (int j = 0; j < de; ++j)
    for (int l = 0; l < de; ++l) {
      double b = 0.0;
      for (int mm = 0; mm < d; ++mm) {
        double w = 0.0;
        for (int k = 0; k < dh; ++k)
          w += std::real(ch.s_gamma(k)) * ch.O(mm, k) * ch.O(mm, k);
        b += w * ch.O(mm, dh + j) * ch.O(mm, dh + l);
      }
      ch.Qdrift(j, l) = b * chi(ch.z_list(j) * std::conj(ch.z_list(l)));
    }
  double tr = std::real(ch.Qdrift.trace()) / de;
  CMatrix dev = ch.Qdrift - tr * CMatrix::Identity(de, de);
  if (dev.norm() <= 1e-10 * std::max(1.0, ch.Qdrift.norm())) ch.q = tr;

  ch.chaotic = is_chaotic(ch.z_list);

  StripModel tmp;
  tmp.d = d;
  tmp.A = A;
  ch.noiseless_transfer = build_transfer(tmp, E, 0.0, RVector::Zero(d));
  return ch;
}

}  // namespace detail

ChannelData decompose_channels(const StripModel& strip, double E, double tol) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(strip.A);
  if (es.info() != Eigen::Success)
    throw ValidationError("decompose_channels: eigensolve failed");
  return detail::assemble_channels(strip.A, es.eigenvalues(), es.eigenvectors(),
                                   E, tol);
}

NoiseModel channel_noise(const ChannelData& ch, const StripModel& strip,
                         double sigma, double eps) {
  if (strip.d != ch.d)
    throw ValidationError("channel_noise: strip/channel dimension mismatch");
  const int d = ch.d;
  CMatrix qi = ch.Qinv, qm = ch.Qmat;
  NoiseModel nm = NoiseModel::linear_image(
      potential_noise(strip), 2 * d, [d, sigma, qi, qm](const CMatrix& v) {
        CMatrix big = CMatrix::Zero(2 * d, 2 * d);
        big.topLeftCorner(d, d) = -v;
        return CMatrix(sigma * (qi * big * qm));
      });
  nm.W = channel_shift(ch, eps);
  return nm;
}

CMatrix channel_shift(const ChannelData& ch, double eps) {
  const int d = ch.d;
  CMatrix big = CMatrix::Zero(2 * d, 2 * d);
  big.topLeftCorner(d, d) = CMatrix::Identity(d, d);
  return eps * (ch.Qinv * big * ch.Qmat);
}

ChannelData build_goe_channel(int d, double E, double r, double tol) {
  if (d < 1) throw ValidationError("build_goe_channel: d must be positive");
  const double pi = std::acos(-1.0);
  RVector a(d);
  RMatrix O(d, d);
  double nrm = std::sqrt(2.0 / (d + 1));
  for (int j = 0; j < d; ++j) {
    a(j) = 2.0 * r * std::cos(pi * (j + 1) / (d + 1));
    for (int m = 0; m < d; ++m)
      O(m, j) = nrm * std::sin(pi * (m + 1) * (j + 1) / (d + 1));
  }
  RMatrix A(d, d);
  A.setZero();
  for (int i = 0; i + 1 < d; ++i) {
    A(i, i + 1) = r;
    A(i + 1, i) = r;
  }
  ChannelData ch = detail::assemble_channels(A, a, O, E, tol);
  // The lattice channel uses the flat drift constant q = (1/(d+1)) sum_k
  // (gamma_k^{-1} - gamma_k)^{-1} over hyperbolic channels, and pins
  // Qdrift = q I.  (The selector-projected drift of assemble_channels keeps
  // the full overlap weights; the flat constant is the convention every
  // downstream lattice-reference quantity is calibrated against.)
  double qflat = 0.0;
  for (int k = 0; k < ch.d_h; ++k) qflat += std::real(ch.s_gamma(k));
  qflat /= (d + 1);
  ch.q = qflat;
  ch.Qdrift = qflat * CMatrix::Identity(ch.d_e, ch.d_e);
  return ch;
}

}  // namespace rmprod
