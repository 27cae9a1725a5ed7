#include <algorithm>
#include <string>
#include <vector>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include "rmprod/spectra.hpp"

namespace rmprod {

// Banded counterpart of strip_eigenvalues: same Hamiltonian, same potential
// stream, but stored in LAPACK lower-banded form (bandwidth d: intra-slice
// hopping fills offsets 1..d-1, the identity coupling to the next slice sits
// exactly at offset d) and solved with dsbevx restricted to the energy
// window.  Only the points that land in the window are ever computed, so n d
// can be large.
PointProcess strip_window_eigenvalues(const StripModel& strip, double lambda,
                                      int n, double window_halfwidth,
                                      std::uint64_t seed) {
  if (strip.d < 1) throw ValidationError("strip: width must be positive");
  if (n < 1) throw ValidationError("strip: length must be positive");
  if (!(lambda >= 0.0)) throw ValidationError("strip: lambda must be >= 0");
  if (!(window_halfwidth > 0.0))
    throw ValidationError("strip eigensolve: window halfwidth must be > 0");

  const int d = strip.d;
  const long long nd = static_cast<long long>(n) * d;
  if (nd > 20'000'000)
    throw SizeCap("banded strip eigensolve: n*d = " + std::to_string(nd) +
                  " exceeds banded cap 20000000");

  const lapack_int N = static_cast<lapack_int>(nd);
  const lapack_int kd = d;
  const lapack_int ldab = kd + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * N, 0.0);
  for (int k = 0; k < n; ++k) {
    const RVector v =
        strip.sample_potential(seed, static_cast<std::uint64_t>(k) + 1);
    for (int j = 0; j < d; ++j) {
      double* col =
          ab.data() + (static_cast<std::size_t>(k) * d + j) * ldab;
      col[0] = strip.A(j, j) + lambda * v(j);
      for (int m = 1; m + j < d; ++m) col[m] = strip.A(j + m, j);
      if (k + 1 < n) col[d] = 1.0;
    }
  }

  const double vl = strip.E - window_halfwidth / n;
  const double vu = strip.E + window_halfwidth / n;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  lapack_int found = 0;
  std::vector<double> w(static_cast<std::size_t>(N));
  double z_unused = 0.0;
  std::vector<lapack_int> ifail(static_cast<std::size_t>(N), 0);
  const lapack_int info = LAPACKE_dsbevx(
      LAPACK_COL_MAJOR, 'N', 'V', 'L', N, kd, ab.data(), ldab, &z_unused, 1,
      vl, vu, 0, 0, abstol, &found, w.data(), &z_unused, 1, ifail.data());
  if (info != 0)
    throw OverflowError("banded strip eigensolve failed (LAPACK info " +
                        std::to_string(info) + ")");

  std::vector<double> rescaled;
  rescaled.reserve(static_cast<std::size_t>(found));
  for (lapack_int k = 0; k < found; ++k)
    rescaled.push_back(n * (w[static_cast<std::size_t>(k)] - strip.E));
  return PointProcess::make(std::move(rescaled), -window_halfwidth,
                            window_halfwidth, static_cast<double>(n),
                            "strip-banded", seed);
}

}  // namespace rmprod
