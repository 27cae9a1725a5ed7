#pragma once

#include <cstdint>
#include <vector>

#include "rmprod/band_edge.hpp"
#include "rmprod/block_spectrum.hpp"
#include "rmprod/complex_gaussian.hpp"
#include "rmprod/haar.hpp"
#include "rmprod/noise.hpp"
#include "rmprod/strip.hpp"

namespace rmprod {

// Coefficients of the diffusion limit on the unitary block,
//
//   dLambda = V Lambda dt + dB Lambda,   Lambda_0 = I,
//
// where B is a matrix Brownian motion with
//
//   E( B_ij(t) B_kl(t) )       = t * G   [(ij),(kl)]
//   E( conj(B_ij(t)) B_kl(t) ) = t * Ghat[(ij),(kl)]
//
// stored as (d1^2) x (d1^2) matrices over pair_index.
struct SDECoefficients {
  int d1 = 0;
  CMatrix V;
  CMatrix G, Ghat;
  HaarMeta haar_meta;

  cplx g(int i, int j, int k, int l) const {
    return G(pair_index(i, j, d1), pair_index(k, l, d1));
  }
  cplx ghat(int i, int j, int k, int l) const {
    return Ghat(pair_index(i, j, d1), pair_index(k, l, d1));
  }

  // g(M) = E(B^T M B)/t and ghat(M) = E(B^* M B)/t, reconstructed from the
  // tensors by linearity
  CMatrix apply_g(const CMatrix& m) const;
  CMatrix apply_ghat(const CMatrix& m) const;

  // sampling law of vec(B_1): covariance Ghat^T, pseudo-covariance G
  ComplexGaussianSpec increment_spec() const;
};

// Drift and covariance tensors evaluated in closed form from the noise
// moments: every group average reduces to a character integral over the
// closure of the powers of U, which the phase selector evaluates exactly.
// n_samples only caps the finite-order scan recorded in haar_meta.
SDECoefficients compute_coefficients(const BlockSpectrum& spectrum,
                                     const NoiseModel& noise,
                                     long long n_samples = 100000);

// One magnitude block c * U of a block-diagonal model diag(c_1 U_1, ...),
// occupying rows/cols [offset, offset + dim) of the global noise matrix.
struct MagnitudeBlock {
  double magnitude = 1.0;
  CMatrix unitary;
  int offset = 0;
  UnitaryFrame frame;

  int dim() const { return static_cast<int>(unitary.rows()); }

  static MagnitudeBlock make(double magnitude, CMatrix unitary, int offset,
                             double tol = 1e-10);
};

// Cross-covariance tensors between the limit Brownian motions of two
// magnitude blocks, averaged jointly over the closure of the powers of
// U_c + U_c' and carrying the 1/(c c') magnitude prefactor:
//
//   G   [(ab),(cd)] = E( B^c_ab(t)       B^c'_cd(t) ) / t
//   Ghat[(ab),(cd)] = E( conj(B^c_ab(t)) B^c'_cd(t) ) / t
struct CrossTensors {
  int dim_c = 0, dim_cp = 0;
  CMatrix G, Ghat;  // (dim_c^2) x (dim_cp^2)
  HaarMeta haar_meta;
};

CrossTensors cross_coefficients(const MagnitudeBlock& block_c,
                                const MagnitudeBlock& block_cp,
                                const NoiseModel& noise,
                                long long n_samples = 100000);

// Gaussian matrix increment over time dt drawn from a vectorized law;
// rows*cols must equal spec.dim, entries unflattened row-major.
CMatrix sample_increment(const ComplexGaussianSpec& spec, int rows, int cols,
                         double dt, CounterRng& rng);

struct SDEPath {
  RVector times;                // uniform grid t_k = k * dt
  std::vector<CMatrix> values;  // state at each grid time (matrix or column)
  double dt = 0.0;
  std::uint64_t seed = 0;
};

// number of uniform steps covering t_final; the grid must tile it exactly
inline long long sde_step_count(double t_final, double dt) {
  if (!(dt > 0.0) || !(t_final >= dt))
    throw ValidationError("sde: need 0 < dt <= t_final");
  long long n = std::llround(t_final / dt);
  if (n < 1 || std::abs(n * dt - t_final) > 1e-9 * std::max(1.0, t_final))
    throw ValidationError("sde: t_final must be a whole number of dt steps");
  return n;
}

// Identity of an increment stream.  Each integration step k draws from a
// fresh counter stream keyed (label, seed, path, k), so every consumer of
// the same (seed, path) sees identical noise regardless of evaluation
// order, and an eps grid can share one realization exactly.
struct NoiseStream {
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
};

// Step label of the channel SDE ("chstep01").  Shared with the operator
// discretization so that, at matched step sizes, both consume literally the
// same Brownian increments for a given (seed, path).
inline constexpr std::uint64_t kChannelStepTag = 0x6368737465703031ull;

SDEPath euler_maruyama(const SDECoefficients& coeffs, double t_final, double dt,
                       NoiseStream stream);

// --- elliptic-channel SDE family (state size 2 d_e) ---------------------

struct ChannelIncrement {
  CMatrix A, B, C;  // d_e x d_e; A, C Hermitian
};

// Joint law of (A, B, C) per unit time, assembled from the channel's
// rotated-potential second moments and the phase selector.
struct ChannelNoiseSpec {
  int d_e = 0;
  ComplexGaussianSpec joint;  // vectorized length 3 d_e^2
};

ChannelNoiseSpec channel_noise_spec(const ChannelData& channel);

// Draw over time dt.  A and C are re-Hermitized (exact projections of
// rounding left by the covariance floor); real_symmetric additionally
// enforces C = conj(A) and B = B^T, the symmetry class of a real
// symmetric profile, which the covariance tables satisfy almost surely.
ChannelIncrement sample_channel_increment(const ChannelNoiseSpec& spec,
                                          double dt, CounterRng& rng,
                                          bool real_symmetric);

// Flat lattice-reference increments: A Hermitian and B symmetric,
// independent, C = conj(A), with
//   E|A_ij|^2 = E|B_ij|^2 = E(A_ii A_jj) = (3/2) dt/(d+1)  (i = j)
//                                        =       dt/(d+1)  (i != j)
// and all other covariances zero.
ChannelIncrement sample_goe_increment(int d_e, int d, double dt,
                                      CounterRng& rng);

// drift matrix S * [[eps - sigma^2 Q, 0], [0, -eps + sigma^2 Q]]
CMatrix channel_drift(const ChannelData& channel, double eps, double sigma);

// dLambda = drift * Lambda dt + sigma * S [[dA, dB], [-dB^*, -dC]] Lambda,
// Lambda_0 = I.  sigma = 0 integrates the linear ODE exactly (the drift is
// diagonal), so the deterministic spectral lattice is produced to rounding.
SDEPath anderson_sde(const ChannelData& channel, double eps, double sigma,
                     double t_final, double dt, NoiseStream stream,
                     bool real_symmetric = true);

// Same integrator with Qdrift = q I and the flat-constant increments.
SDEPath goe_sde(const ChannelData& channel, double eps, double sigma,
                double t_final, double dt, NoiseStream stream);

// Final-time solutions Lambda_1(eps) for every eps in the grid, driven by
// one shared increment stream (the coupling surrogate in eps).
std::vector<CMatrix> channel_final_grid(const ChannelData& channel,
                                        double sigma, const RVector& eps_grid,
                                        double t_final, double dt,
                                        NoiseStream stream,
                                        bool real_symmetric = true,
                                        bool goe_flat = false);

// Reference matrix (d+1)^{-1/2} (K + b I): b standard normal, K independent
// symmetric Gaussian with E(K_ii^2) = 5/4, E(K_ij^2) = 1.
RMatrix goe_limit_matrix(int d_e, int d, CounterRng& rng);

// Companion-form band-edge SDE on 2d coordinates:
//   dLambda = (N + eps e_{2d} e_1^T) Lambda dt + e_{2d} e_1^T dB Lambda
// with N the nilpotent shift and dB a scalar increment honoring
// E(B_t^2) = exp(-2 i theta) v_var t, E|B_t|^2 = v_var t.  With x0 the path
// of the single trajectory x(t) is produced instead of the fundamental
// solution.
SDEPath band_edge_sde(const BandEdgeModel& model, double eps, double t_final,
                      double dt, NoiseStream stream,
                      const CVector* x0 = nullptr, double theta = 0.0,
                      double v_var = 1.0);

}  // namespace rmprod
