#pragma once

#include <array>
#include <optional>
#include <vector>

#include "rmprod/linalg.hpp"
#include "rmprod/noise.hpp"
#include "rmprod/rng.hpp"
#include "rmprod/types.hpp"

namespace rmprod {

enum class PotentialKind { gaussian, rademacher, uniform };

// Strip Hamiltonian (H psi)_k = psi_{k+1} + psi_{k-1} + (A + lambda V_k) psi_k
// with Dirichlet walls, A real symmetric d x d, V_k i.i.d. real diagonal with
// unit-variance entries.
struct StripModel {
  int d = 0;
  RMatrix A;
  PotentialKind potential = PotentialKind::gaussian;
  double E = 0.0;  // base energy of interest
  double r = 1.0;  // hopping weight when A = r * Z_d

  // diagonal potential entries at slice k (1-based step index)
  RVector sample_potential(std::uint64_t seed, std::uint64_t k) const {
    CounterRng rng(derive_key({0x706f74656e746c31ull, seed, k}));
    RVector v(d);
    for (int i = 0; i < d; ++i) {
      switch (potential) {
        case PotentialKind::gaussian: v(i) = rng.next_normal(); break;
        case PotentialKind::rademacher: v(i) = rng.next_sign(); break;
        case PotentialKind::uniform: v(i) = rng.next_uniform_unitvar(); break;
      }
    }
    return v;
  }

  // nearest-neighbour ring-free profile A = r * Z_d (1 on the off-diagonals)
  static StripModel zd(int d, double r, double E,
                       PotentialKind kind = PotentialKind::gaussian) {
    StripModel m;
    m.d = d;
    m.A = RMatrix::Zero(d, d);
    for (int i = 0; i + 1 < d; ++i) {
      m.A(i, i + 1) = r;
      m.A(i + 1, i) = r;
    }
    m.potential = kind;
    m.E = E;
    m.r = r;
    return m;
  }

  static StripModel custom(RMatrix A, double E,
                           PotentialKind kind = PotentialKind::gaussian) {
    StripModel m;
    m.d = static_cast<int>(A.rows());
    if (A.cols() != m.d) throw ValidationError("strip: A must be square");
    if ((A - A.transpose()).norm() > 1e-12)
      throw ValidationError("strip: A must be symmetric");
    m.A = std::move(A);
    m.E = E;
    m.potential = kind;
    return m;
  }
};

struct ChaoticWitness {
  bool chaotic = true;
  std::array<int, 4> idx{-1, -1, -1, -1};
  int relation = 0;  // 1: zzzz, 2: z~zzz, 3: z~z~zz with {i,j} != {k,l}
};

// Exhaustive scan over index quadruples for multiplicative relations among
// the elliptic phases.  search_bound caps the channel count the O(d_e^4)
// enumeration will accept.
inline ChaoticWitness is_chaotic(const CVector& z, double tol = 1e-9,
                                 int search_bound = 64) {
  const int n = static_cast<int>(z.size());
  if (n > search_bound)
    throw ValidationError("is_chaotic: channel count exceeds search bound");
  ChaoticWitness w;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          if (std::abs(z(i) * z(j) * z(k) * z(l) - 1.0) <= tol) {
            w.chaotic = false;
            w.idx = {i, j, k, l};
            w.relation = 1;
            return w;
          }
          if (std::abs(std::conj(z(i)) * z(j) * z(k) * z(l) - 1.0) <= tol) {
            w.chaotic = false;
            w.idx = {i, j, k, l};
            w.relation = 2;
            return w;
          }
          bool same_pair = (i == k && j == l) || (i == l && j == k);
          if (!same_pair &&
              std::abs(std::conj(z(i)) * std::conj(z(j)) * z(k) * z(l) - 1.0) <= tol) {
            w.chaotic = false;
            w.idx = {i, j, k, l};
            w.relation = 3;
            return w;
          }
        }
  return w;
}

// One energy's worth of channel data for a strip: the splitting of A's
// eigenbasis into hyperbolic/elliptic channels at energy E, the 2d x 2d
// similarity Q that block-diagonalises the noiseless transfer matrix to
// diag(Gamma, conj(Z), Z, Gamma^{-1}), and the second moments of the
// rotated potential needed by the diffusion limit.
struct ChannelData {
  int d = 0, d_h = 0, d_e = 0;
  double E = 0.0;
  RMatrix A;        // original profile
  RVector a;        // eigenvalues, hyperbolic first (descending within groups)
  RMatrix O;        // diagonaliser, columns permuted to match a
  CVector gamma_list;  // |gamma_j| < 1, one per hyperbolic channel
  CVector z_list;      // |z_j| = 1, Im z_j > 0, one per elliptic channel
  CMatrix Qmat, Qinv;  // 2d x 2d, include the O rotation
  CVector s_gamma;     // (gamma^-1 - gamma)^-1 per hyperbolic channel
  CVector s_z;         // (conj(z) - z)^-1 per elliptic channel
  CMatrix Qdrift;      // d_e x d_e Hermitian drift; selector-projected
  std::optional<double> q;  // set when Qdrift is a multiple of the identity
  ChaoticWitness chaotic;
  CMatrix ve2, ve2c;  // (d_e^2)^2 tensors: E(Ve_ij Ve_kl), E(conj(Ve_ij) Ve_kl)
  CMatrix noiseless_transfer;  // T_* at energy E, original basis

  CMatrix smat() const {  // diag(S_Z, S_Z), 2 d_e
    CMatrix s = CMatrix::Zero(2 * d_e, 2 * d_e);
    for (int j = 0; j < d_e; ++j) {
      s(j, j) = s_z(j);
      s(d_e + j, d_e + j) = s_z(j);
    }
    return s;
  }
};

// transfer matrix [[E - A - lambda diag(v), -1], [1, 0]] at energy E
inline CMatrix build_transfer(const StripModel& strip, double E, double lambda,
                              const RVector& v) {
  const int d = strip.d;
  if (v.size() != d) throw ValidationError("build_transfer: potential size mismatch");
  CMatrix t = CMatrix::Zero(2 * d, 2 * d);
  RMatrix top = -strip.A;
  for (int i = 0; i < d; ++i) top(i, i) += E - lambda * v(i);
  t.topLeftCorner(d, d) = top;
  t.topRightCorner(d, d) = -CMatrix::Identity(d, d);
  t.bottomLeftCorner(d, d) = CMatrix::Identity(d, d);
  return t;
}

namespace detail {

// classification + frame assembly shared by the numeric and the exact
// (lattice) channel constructors; a_in/O_in come in any order.
ChannelData assemble_channels(const RMatrix& A, RVector a_in, RMatrix O_in,
                              double E, double tol);

}  // namespace detail

ChannelData decompose_channels(const StripModel& strip, double E, double tol = 1e-8);

// Dirichlet lattice profile A = r Z_d diagonalised in closed form:
// O_jk = sqrt(2/(d+1)) sin(pi j k / (d+1)), a_j = 2 r cos(pi j / (d+1)).
ChannelData build_goe_channel(int d, double E, double r = 1.0, double tol = 1e-8);

// Q^{-1} T^{E + lambda^2 eps}_{lambda sigma} Q with potential v; equals
// diag(Gamma, conj Z, Z, Gamma^{-1}) + lambda sigma V + lambda^2 eps W.
inline CMatrix conjugated_transfer(const ChannelData& ch, double eps, double sigma,
                                   double lambda, const RVector& v) {
  StripModel s;
  s.d = ch.d;
  s.A = ch.A;
  CMatrix t = build_transfer(s, ch.E + lambda * lambda * eps, lambda * sigma, v);
  return ch.Qinv * t * ch.Qmat;
}

// diagonal potential slice as a d x d matrix noise with unit-variance entries
inline NoiseModel potential_noise(const StripModel& strip) {
  NoiseModel nm;
  nm.dim = strip.d;
  StripModel local = strip;
  nm.sampler = [local](std::uint64_t seed, std::uint64_t index) {
    return CMatrix(local.sample_potential(seed, index).asDiagonal().toDenseMatrix()
                       .cast<cplx>());
  };
  const int m = strip.d * strip.d;
  nm.W = CMatrix::Zero(strip.d, strip.d);
  nm.m2 = CMatrix::Zero(m, m);
  for (int i = 0; i < strip.d; ++i) {
    int p = pair_index(i, i, strip.d);
    nm.m2(p, p) = 1.0;
  }
  nm.m2c = nm.m2;
  return nm;
}

// noise entering the conjugated transfer: sigma * Q^{-1} [[-diag(v),0],[0,0]] Q
// (with the channel's eps-shift direction Q^{-1} [[1,0],[0,0]] Q as its
// deterministic companion, scaled separately by the caller)
NoiseModel channel_noise(const ChannelData& ch, const StripModel& strip,
                         double sigma, double eps);

// eps-shift image W_eps = eps * Q^{-1} [[1,0],[0,0]] Q
CMatrix channel_shift(const ChannelData& ch, double eps);

}  // namespace rmprod
