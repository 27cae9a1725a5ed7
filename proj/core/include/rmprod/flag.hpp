#pragma once

#include <vector>

#include "rmprod/linalg.hpp"
#include "rmprod/noise.hpp"
#include "rmprod/types.hpp"

namespace rmprod {

// Deterministic part diag(c_1 U_1, ..., c_m U_m) with strictly increasing
// positive magnitudes c_i and unitary blocks U_i.  Under small i.i.d.
// perturbations the trailing-coordinate flag (last p coordinates for each
// suffix p of the block layout) attracts the orbit of almost every start.
struct FlagModel {
  std::vector<int> dims;
  std::vector<double> magnitudes;
  std::vector<CMatrix> unitaries;
  std::vector<CMatrix> frame_bases;
  std::vector<RVector> frame_phases;

  int dim() const {
    int d = 0;
    for (int b : dims) d += b;
    return d;
  }

  // suffix sizes of the proper flag, smallest first: d_m, d_m + d_{m-1}, ...
  std::vector<int> flag_sizes() const {
    std::vector<int> sizes;
    int acc = 0;
    for (int i = static_cast<int>(dims.size()) - 1; i > 0; --i) {
      acc += dims[i];
      sizes.push_back(acc);
    }
    return sizes;
  }

  CMatrix t0() const;
  CMatrix rhat_power(long long n) const;  // diag(U_i^n), exact for every n

  static FlagModel make(std::vector<double> mags, std::vector<CMatrix> blocks,
                        double tol = 1e-10);
};

struct FlagState {
  long long n = 0;
  CMatrix F;             // square frame; the flag is its trailing column spans
  double min_sv = 1.0;   // smallest singular value after the last renormalise
  long long renorms = 0;
  bool attracted_start = true;   // start frame lay in the attracted class
  RVector column_lognorms;       // accumulated log of per-step column scalings
};

// principal angles (ascending, radians) between the column spans of a and b;
// throws RankDeficient when either set of columns is rank deficient
RVector principal_angles(const CMatrix& a, const CMatrix& b);

// true when every proper trailing minor of f0 is invertible, i.e. the start
// lies in the attracted class of the trailing-coordinate flag
bool flag_attracted(const FlagModel& model, const CMatrix& f0, double tol = 1e-12);

// evolve the frame n steps in the rotating frame with column normalisation
// (and a flag-preserving re-orthonormalisation when conditioning demands it)
FlagState propagate_flag(const FlagModel& model, const NoiseModel& nm,
                         double lambda, long long n, std::uint64_t seed,
                         const CMatrix& f0, double renorm_cond = 1e6);

// principal angles between each trailing flag subspace of f and the
// corresponding trailing-coordinate subspace, one vector per flag size
std::vector<RVector> flag_angles_to_stable(const FlagModel& model, const CMatrix& f);

}  // namespace rmprod
