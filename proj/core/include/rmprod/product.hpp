#pragma once

#include <utility>
#include <vector>

#include "rmprod/block_spectrum.hpp"
#include "rmprod/noise.hpp"
#include "rmprod/strip.hpp"

namespace rmprod {

// Markov state of the random product in the rotating frame.  The running
// matrix is tracked through its class modulo the parabolic subgroup
// [[1, 0], [C, D]]: only the Schur complement X = A - B D^{-1} C and the
// slope Z = B D^{-1} evolve autonomously.
struct ProductState {
  long long n = 0;
  CMatrix X;  // p x p, p = d0 + d1
  CMatrix Z;  // p x q, q = d2
  double max_znorm = 0.0;
  double max_cond = 1.0;
};

struct ProductSnapshot {
  long long n = 0;
  CMatrix X, Z;
  double znorm = 0.0;
  double cond = 1.0;
  double logabsdet_x = 0.0;
};

struct ProductRun {
  ProductState state;
  std::vector<ProductSnapshot> snapshots;
};

// Schur pair (X, Z) of a full square matrix w.r.t. its trailing d2 block;
// throws SingularPivot when that block is too ill-conditioned to quotient
// out.  When the input is invertible, X also equals the inverse of the
// leading principal block of the inverse.
std::pair<CMatrix, CMatrix> schur_pair(const CMatrix& full, int d2);

// default start: X = 1, Z = 0
ProductState init_state(const BlockSpectrum& bs);
// start from an explicit full matrix (its class is taken)
ProductState init_state(const BlockSpectrum& bs, const CMatrix& full);

// one multiplicative step with draw index state.n + 1; throws SingularPivot
// when the quotient direction degenerates
void product_step(ProductState& st, const BlockSpectrum& bs, const NoiseModel& nm,
                  double lambda, std::uint64_t seed);

// n_steps steps, recording about `retention` evenly spaced snapshots
ProductRun run_product(const BlockSpectrum& bs, const NoiseModel& nm, double lambda,
                       long long n_steps, std::uint64_t seed,
                       const ProductState* start = nullptr, int retention = 1000);

// Transfer matrix of n strip slices with the exponentially expanding
// directions quotiented out: equals the Schur complement (w.r.t. the
// lower-right hyperbolic block) of the full conjugated transfer product at
// energy E + lambda^2 eps with coupling lambda sigma.
CMatrix reduced_transfer(const ChannelData& ch, const StripModel& strip,
                         double sigma, double eps, double lambda, long long n,
                         std::uint64_t seed, const CMatrix* x0_full = nullptr);

// block spectrum of the conjugated noiseless channel transfer
BlockSpectrum channel_spectrum(const ChannelData& ch);

// default start for the channel quotient: [[1,0,-1],[0,1,0],[0,0,1]] in the
// (hyperbolic, elliptic pair, hyperbolic) block layout
CMatrix channel_start(const ChannelData& ch);

}  // namespace rmprod
