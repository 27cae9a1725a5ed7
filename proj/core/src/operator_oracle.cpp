#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rmprod/spectra.hpp"

namespace rmprod {

namespace {

// Midpoint-rule cells of the first-order operator: on cell j the relation
//   iK (psi_{j+1} - psi_j)/h + M_j (psi_j + psi_{j+1})/2
//     = eps (psi_j + psi_{j+1})/2
// holds, with M_j = sigma^2 diag(Q, Q) - sigma [[A, B], [B^*, C]]_j / h
// Hermitian and iK = diag(-2i Im z / h, +2i Im z / h) * h ... the iK/h
// diagonal below.  Because every cell coefficient is Hermitian and the two
// boundary subspaces are isotropic for K, all eigenvalues of the eliminated
// pencil are real up to rounding; the Newton polish measures this.
struct PencilCells {
  int de = 0;
  CVector ik_over_h;       // diagonal of i K / h, length 2 de
  std::vector<CMatrix> m;  // Hermitian cell coefficient, one per cell
};

PencilCells build_cells(const ChannelData& ch, double sigma, int mesh,
                        NoiseStream stream) {
  const int de = ch.d_e;
  const double h = 1.0 / mesh;
  PencilCells cells;
  cells.de = de;
  cells.ik_over_h.resize(2 * de);
  for (int j = 0; j < de; ++j) {
    const double imz = ch.z_list(j).imag();
    cells.ik_over_h(j) = cplx(0.0, -2.0 * imz / h);
    cells.ik_over_h(de + j) = cplx(0.0, 2.0 * imz / h);
  }
  CMatrix base = CMatrix::Zero(2 * de, 2 * de);
  base.topLeftCorner(de, de) = (sigma * sigma) * ch.Qdrift;
  base.bottomRightCorner(de, de) = (sigma * sigma) * ch.Qdrift;
  cells.m.assign(static_cast<std::size_t>(mesh), base);
  if (sigma != 0.0) {
    ChannelNoiseSpec spec = channel_noise_spec(ch);
    for (int j = 1; j <= mesh; ++j) {
      CounterRng rng(derive_key({kChannelStepTag, stream.seed, stream.path,
                                 static_cast<std::uint64_t>(j)}));
      ChannelIncrement inc =
          sample_channel_increment(spec, h, rng, /*real_symmetric=*/true);
      CMatrix bn(2 * de, 2 * de);
      bn.topLeftCorner(de, de) = inc.A;
      bn.topRightCorner(de, de) = inc.B;
      bn.bottomLeftCorner(de, de) = inc.B.adjoint();
      bn.bottomRightCorner(de, de) = inc.C;
      cells.m[static_cast<std::size_t>(j - 1)] -= (sigma / h) * bn;
    }
  }
  return cells;
}

// Eliminates the block-bidiagonal pencil cell by cell from the kernel basis
// [I; -I] of the left boundary row and applies the right boundary row; the
// determinant of the returned d_e x d_e matrix vanishes exactly at the
// eigenvalues of the discretized problem.
CMatrix pencil_boundary(const PencilCells& cells, const CVector& z_star,
                        cplx eps, CMatrix* slab_out = nullptr) {
  const int de = cells.de;
  const CMatrix ik = CMatrix(cells.ik_over_h.asDiagonal());
  CMatrix slab(2 * de, de);
  slab.topRows(de) = CMatrix::Identity(de, de);
  slab.bottomRows(de) = -CMatrix::Identity(de, de);
  for (const CMatrix& mj : cells.m) {
    CMatrix half = 0.5 * (mj - eps * CMatrix::Identity(2 * de, 2 * de));
    slab = (ik + half).partialPivLu().solve((ik - half) * slab);
  }
  if (slab_out) *slab_out = slab;
  return z_star.conjugate().asDiagonal() * slab.topRows(de) +
         z_star.asDiagonal() * slab.bottomRows(de);
}

}  // namespace

std::vector<double> operator_oracle(const ChannelData& channel, double sigma,
                                    const CVector& z_star, int mesh_size,
                                    NoiseStream stream, double window_halfwidth,
                                    OperatorDiagnostics* diag) {
  const int de = channel.d_e;
  if (de < 1)
    throw NoEllipticChannel("operator oracle: channel has no elliptic part");
  if (mesh_size < 100)
    throw ValidationError("operator oracle: mesh_size must be >= 100");
  if (z_star.size() != de)
    throw ValidationError("operator oracle: Z* size mismatch");
  for (Eigen::Index j = 0; j < z_star.size(); ++j)
    if (std::abs(std::abs(z_star(j)) - 1.0) > 1e-9)
      throw ValidationError("operator oracle: Z* must be a unitary diagonal");
  if (!(window_halfwidth > 0.0))
    throw ValidationError("operator oracle: window halfwidth must be > 0");

  PencilCells cells = build_cells(channel, sigma, mesh_size, stream);
  auto gfun = [&](cplx eps) {
    return pencil_boundary(cells, z_star, eps).determinant();
  };

  // scan resolution: beat both the window budget and the shortest noiseless
  // zero ladder (per-channel spacing 2 pi Im z_j)
  const double w = window_halfwidth;
  const double pi = std::acos(-1.0);
  double min_spacing = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < channel.z_list.size(); ++j)
    min_spacing = std::min(min_spacing, 2.0 * pi * channel.z_list(j).imag());
  double step = std::min(2.0 * w / 2048.0, min_spacing / 20.0);
  const int npts = static_cast<int>(std::ceil(2.0 * w / step)) + 1;
  step = 2.0 * w / (npts - 1);

  std::vector<double> absg(static_cast<std::size_t>(npts));
  for (int i = 0; i < npts; ++i)
    absg[static_cast<std::size_t>(i)] = std::abs(gfun(cplx(-w + i * step, 0.0)));
  std::vector<double> med_work = absg;
  auto mid = med_work.begin() + static_cast<std::ptrdiff_t>(med_work.size() / 2);
  std::nth_element(med_work.begin(), mid, med_work.end());
  const double med = *mid;
  if (!(med > 0.0))
    throw ValidationError("operator oracle: boundary determinant vanished on the whole scan");

  std::vector<cplx> zeros;
  for (int i = 1; i + 1 < npts; ++i) {
    const std::size_t s = static_cast<std::size_t>(i);
    if (!(absg[s] < absg[s - 1] && absg[s] <= absg[s + 1])) continue;
    if (!(absg[s] < 0.25 * med)) continue;
    cplx e(-w + i * step, 0.0);
    for (int it = 0; it < 40; ++it) {
      const cplx gv = gfun(e);
      if (std::abs(gv) <= 1e-12 * med) break;
      const double dstep = 1e-5;
      const cplx gp = (gfun(e + dstep) - gfun(e - dstep)) / (2.0 * dstep);
      if (gp == cplx(0.0, 0.0)) break;
      cplx delta = -gv / gp;
      if (std::abs(delta) > step) delta *= step / std::abs(delta);
      e += delta;
      if (std::abs(delta) < 1e-11 * std::max(1.0, std::abs(e))) break;
    }
    if (std::abs(gfun(e)) > 1e-8 * med) continue;  // shallow dip, not a zero
    bool duplicate = false;
    for (const cplx& zz : zeros)
      if (std::abs(zz - e) < 1e-7) duplicate = true;
    if (!duplicate) zeros.push_back(e);
  }

  for (const cplx& zz : zeros)
    if (std::abs(zz.imag()) >= 1e-6)
      throw NonRealSpectrum("operator oracle: eigenvalue " +
                            std::to_string(zz.real()) + " has imaginary part " +
                            std::to_string(zz.imag()));

  std::sort(zeros.begin(), zeros.end(),
            [](const cplx& a, const cplx& b) { return a.real() < b.real(); });
  std::vector<double> out;
  double max_imag = 0.0;
  std::vector<double> residuals;
  for (const cplx& zz : zeros) {
    if (!(zz.real() > -w && zz.real() < w)) continue;
    out.push_back(zz.real());
    max_imag = std::max(max_imag, std::abs(zz.imag()));
    if (diag) {
      CMatrix slab;
      CMatrix g = pencil_boundary(cells, z_star, cplx(zz.real(), 0.0), &slab);
      Eigen::JacobiSVD<CMatrix> svd(g, Eigen::ComputeFullV);
      CVector v = svd.matrixV().col(de - 1);
      const double scale = std::max(1e-300, (slab * v).norm());
      residuals.push_back((g * v).norm() / scale);
    }
  }
  if (diag) {
    diag->max_imag = max_imag;
    diag->boundary_residuals = std::move(residuals);
  }
  return out;
}

}  // namespace rmprod
