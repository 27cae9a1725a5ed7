#pragma once

#include "rmprod/types.hpp"

namespace rmprod {

// Band-edge (top of spectrum) degeneration of the strip transfer matrix:
// at the edge every channel is parabolic and the noiseless transfer matrix
// becomes the companion matrix of (x - 1)^{2d}.  M conjugates it to a single
// Jordan block of size 2d, exactly over the integers.
struct BandEdgeModel {
  int d = 0;        // strip width
  IMatrix T;        // 2d x 2d companion matrix of (x - 1)^{2d}
  IMatrix S;        // rank-one source: single 1 in row 1, column d
  IMatrix M;        // Jordan basis, M_{jk} = C(2d - j, k - 1) for j + k <= 2d + 1
  IMatrix Minv;     // exact integer inverse of M
  IMatrix J;        // Minv * T * M, unit upper-bidiagonal Jordan block
  IMatrix MSM;      // Minv * S * M: single nonzero row 2d with entries C(d, k-1)
  double alpha = 0.0;  // scaling exponent 2 / (4d - 1)
};

// exponent for a Jordan block of size m perturbed in its corner: 2 / (2m - 1)
inline double alpha_jordan(int m) { return 2.0 / (2 * m - 1); }

// Exact construction for 1 <= d <= 15 (entries are validated against
// overflow; the inverse is computed by integer Gauss-Jordan elimination with
// unit pivots and cross-checked against T and S conjugation identities).
BandEdgeModel build_band_edge(int d);

}  // namespace rmprod
