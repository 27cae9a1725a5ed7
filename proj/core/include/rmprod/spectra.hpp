#pragma once

#include <limits>
#include <string>
#include <vector>

#include "rmprod/sde.hpp"
#include "rmprod/strip.hpp"
#include "rmprod/types.hpp"

namespace rmprod {

// A sorted batch of rescaled eigenvalues (or determinant zeros) strictly
// inside a window, together with the scaling that produced it.
struct PointProcess {
  RVector points;              // ascending, strictly inside (lo, hi)
  double lo = 0.0, hi = 0.0;   // window in rescaled units
  double normalization = 1.0;  // factor applied to raw energies
  std::string provenance;      // which pipeline produced the points
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;  // near-duplicate points, missed roots

  // sorts, drops points on or outside the window boundary, flags pairs
  // closer than 1e-10
  static PointProcess make(std::vector<double> pts, double lo, double hi,
                           double normalization, std::string provenance,
                           std::uint64_t seed);
};

struct GapCounts {
  int n_points = 0;
  int n_gaps = 0;          // all consecutive gaps
  int n_used = 0;          // central half actually pooled
  double mean_gap = 0.0;   // raw mean over the used gaps
};

struct GapStatistics {
  RVector gaps;    // central gaps, normalized by their mean
  RVector ecdf_x;  // sorted normalized gaps
  RVector ecdf_y;  // k / n at each ecdf_x
  double ks_vs_reference = std::numeric_limits<double>::quiet_NaN();
  GapCounts counts;
};

// Dense eigensolve of the n d x n d strip Hamiltonian (Dirichlet walls,
// potential drawn from `seed`); returns the rescaled spectrum
// { n (E_k - E) } restricted to (-window_halfwidth, window_halfwidth).
PointProcess strip_eigenvalues(const StripModel& strip, double lambda, int n,
                               double window_halfwidth, std::uint64_t seed,
                               int dense_cap = 6000);

// Same point process as strip_eigenvalues, but computed with a banded
// symmetric eigensolver (bandwidth d) restricted to the requested energy
// window, so it has no dense size cap and scales to large n d.  Intended
// for gap-statistics runs where only the window matters.
PointProcess strip_window_eigenvalues(const StripModel& strip, double lambda,
                                      int n, double window_halfwidth,
                                      std::uint64_t seed);

// Number of strip eigenvalues below `energy` (raw units), by the block-LDLT
// inertia recursion on the shifted Hamiltonian; O(n d^3), overflow-free.
// Same seed => same potential realization as strip_eigenvalues.
int strip_count_below(const StripModel& strip, double lambda, int n,
                      double energy, std::uint64_t seed);

// Zeros of the boundary determinant det(top-left d x d of T_n ... T_1) as a
// function of the rescaled energy offset eps (energy = E + eps / n).  The
// slab of solution columns is QR-renormalized every step, so the scan sees
// the bounded, sign-carrying factor of the determinant; roots are localized
// on the grid and refined by bisection to 1e-8.  The root count is checked
// against strip_count_below; a disagreement becomes a missed-root warning.
PointProcess determinant_scan(const StripModel& strip, double lambda, int n,
                              const RVector& eps_grid, std::uint64_t seed);

// Zero process of eps -> det([conj(Z*), Z*] Lambda_1^{eps,sigma} [I; -I]):
// integrates the channel SDE across the eps grid with one shared increment
// stream, flags local minima of |det|^2 below rel_threshold x median, and
// refines each by golden-section (re-integrating with identical noise).
PointProcess sde_eigenvalue_process(const ChannelData& channel, double sigma,
                                    const CVector& z_star,
                                    const RVector& eps_grid, double dt,
                                    NoiseStream stream,
                                    double rel_threshold = 1e-6);

struct OperatorDiagnostics {
  double max_imag = 0.0;                   // largest |Im eps| over the zeros
  std::vector<double> boundary_residuals;  // relative residual of row 2 per zero
};

// Spectrum of the first-order boundary-value operator behind the channel
// SDE, discretized on a uniform mesh of [0, 1] by the midpoint rule with
// boundary rows [I, I] psi(0) = 0 and [conj(Z*), Z*] psi(1) = 0.  The
// block-bidiagonal pencil is eliminated cell by cell, which reduces the
// generalized eigenproblem to a d_e x d_e boundary determinant; its zeros
// are located on a real scan grid and polished by Newton iteration in the
// complex plane.  Imaginary parts beyond 1e-6 raise NonRealSpectrum; real
// parts inside (-window_halfwidth, window_halfwidth) are returned sorted.
// Noise increments reuse the channel-SDE stream keying, so mesh_size equal
// to 1/dt reproduces the exact increments of the SDE integration.
std::vector<double> operator_oracle(const ChannelData& channel, double sigma,
                                    const CVector& z_star, int mesh_size,
                                    NoiseStream stream,
                                    double window_halfwidth = 20.0,
                                    OperatorDiagnostics* diag = nullptr);

// Consecutive gaps of the central half of the process, normalized by their
// mean; empirical CDF over the normalized gaps.  Throws TooFewPoints below
// two points.
GapStatistics gap_statistics(const PointProcess& pp);

// Two-sample Kolmogorov-Smirnov distance sup_x |F_a(x) - F_b(x)|.
double ks_distance(const std::vector<double>& sample_a,
                   const std::vector<double>& sample_b);

// Pools the central gaps (middle half of each spectrum, normalized by their
// per-sample mean) of n_samples draws of goe_limit_matrix(d_e, d).
std::vector<double> goe_reference_gaps(int d_e, int d, int n_samples,
                                       NoiseStream stream);

}  // namespace rmprod
