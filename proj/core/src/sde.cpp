#include "rmprod/sde.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

namespace rmprod {

namespace {

constexpr std::uint64_t kTagEuler = 0x656d737465703031ull;     // "emstep01"
constexpr std::uint64_t kTagBandEdge = 0x6265737465703031ull;  // "bestep01"

CVector eigenphase_units(const RVector& phases) {
  CVector z(phases.size());
  for (int j = 0; j < phases.size(); ++j) z(j) = std::polar(1.0, phases(j));
  return z;
}

// swap-symmetry / Hermiticity cleanup and PSD screening of the tensors
void finalize_tensors(SDECoefficients& co) {
  const double gs = std::max(1.0, co.G.norm());
  const double hs = std::max(1.0, co.Ghat.norm());
  if ((co.G - co.G.transpose()).norm() > 1e-9 * gs)
    throw InvalidCovariance("sde coefficients: G not swap-symmetric");
  if ((co.Ghat - co.Ghat.adjoint()).norm() > 1e-9 * hs)
    throw InvalidCovariance("sde coefficients: Ghat not Hermitian");
  co.G = 0.5 * (co.G + co.G.transpose()).eval();
  co.Ghat = 0.5 * (co.Ghat + co.Ghat.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(co.Ghat);
  if (es.info() != Eigen::Success)
    throw InvalidCovariance("sde coefficients: Ghat eigensolve failed");
  double lo = es.eigenvalues().minCoeff();
  if (lo < -1e-9 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
    throw InvalidCovariance("sde coefficients: Ghat indefinite, eigenvalue " +
                            std::to_string(lo));
  co.increment_spec();  // screens the real embedding; throws InvalidCovariance
}

}  // namespace

CMatrix SDECoefficients::apply_g(const CMatrix& m) const {
  CMatrix out = CMatrix::Zero(d1, d1);
  for (int x = 0; x < d1; ++x)
    for (int y = 0; y < d1; ++y) {
      if (m(x, y) == cplx(0, 0)) continue;
      for (int a = 0; a < d1; ++a)
        for (int b = 0; b < d1; ++b)
          out(a, b) += m(x, y) * G(pair_index(x, a, d1), pair_index(y, b, d1));
    }
  return out;
}

CMatrix SDECoefficients::apply_ghat(const CMatrix& m) const {
  CMatrix out = CMatrix::Zero(d1, d1);
  for (int x = 0; x < d1; ++x)
    for (int y = 0; y < d1; ++y) {
      if (m(x, y) == cplx(0, 0)) continue;
      for (int a = 0; a < d1; ++a)
        for (int b = 0; b < d1; ++b)
          out(a, b) +=
              m(x, y) * Ghat(pair_index(x, a, d1), pair_index(y, b, d1));
    }
  return out;
}

ComplexGaussianSpec SDECoefficients::increment_spec() const {
  return ComplexGaussianSpec::make(Ghat.transpose(), G);
}

SDECoefficients compute_coefficients(const BlockSpectrum& bs,
                                     const NoiseModel& nm,
                                     long long n_samples) {
  const int d0 = bs.d0, d1 = bs.d1, d2 = bs.d2, D = bs.dim();
  if (d1 < 1)
    throw ValidationError("compute_coefficients: model has no unitary block");
  if (nm.dim != D)
    throw ValidationError("compute_coefficients: noise dimension " +
                          std::to_string(nm.dim) + " != model dimension " +
                          std::to_string(D));
  if (nm.m2.rows() != D * D || nm.m2.cols() != D * D ||
      nm.m2c.rows() != D * D || nm.m2c.cols() != D * D)
    throw ValidationError("compute_coefficients: second-moment tensors not populated");
  const int m = d1 * d1;

  // second moments of the unitary block of V
  CMatrix m11(m, m), m11c(m, m);
  for (int p = 0; p < d1; ++p)
    for (int q = 0; q < d1; ++q)
      for (int r = 0; r < d1; ++r)
        for (int s = 0; s < d1; ++s) {
          int row = pair_index(p, q, d1), col = pair_index(r, s, d1);
          int grow = pair_index(d0 + p, d0 + q, D), gcol = pair_index(d0 + r, d0 + s, D);
          m11(row, col) = nm.m2(grow, gcol);
          m11c(row, col) = nm.m2c(grow, gcol);
        }

  const CMatrix& Q = bs.frame_basis;
  CVector zeta = eigenphase_units(bs.frame_phases);

  // effective drift: the declared W restricted to the block, minus the
  // second-moment contraction through the expanding block
  CMatrix weff = nm.W.block(d0, d0, d1, d1);
  if (d2 > 0) {
    const int d01 = d0 + d1;
    CMatrix corr = CMatrix::Zero(d1, d1);
    for (int a = 0; a < d1; ++a)
      for (int b = 0; b < d1; ++b)
        for (int j = 0; j < d2; ++j)
          for (int k = 0; k < d2; ++k)
            corr(a, b) += bs.Gamma2(j, k) *
                          nm.m2(pair_index(d0 + a, d01 + j, D),
                                pair_index(d01 + k, d0 + b, D));
    weff -= corr;
  }
  CMatrix wt = Q.adjoint() * weff * Q;
  CMatrix core(d1, d1);
  for (int a = 0; a < d1; ++a)
    for (int b = 0; b < d1; ++b)
      core(a, b) = phase_selector(zeta(a) * std::conj(zeta(b))) * wt(a, b) *
                   std::conj(zeta(b));

  SDECoefficients co;
  co.d1 = d1;
  co.V = Q * core * Q.adjoint();

  // vec(Q^* V Q) = kron(Q^*, Q^T) vec(V): rotate the tensors to the frame,
  // apply the selector and phase weights entrywise, rotate back
  CMatrix rot = Eigen::kroneckerProduct(Q.adjoint(), Q.transpose()).eval();
  CMatrix evv = rot * m11 * rot.transpose();
  CMatrix evvc = rot.conjugate() * m11c * rot.transpose();

  CMatrix s1(m, m), s2(m, m);
  for (int p = 0; p < d1; ++p)
    for (int q = 0; q < d1; ++q)
      for (int r = 0; r < d1; ++r)
        for (int s = 0; s < d1; ++s) {
          int row = pair_index(p, q, d1), col = pair_index(r, s, d1);
          cplx zp = zeta(p), zq = zeta(q), zr = zeta(r), zs = zeta(s);
          s1(row, col) = evv(row, col) * std::conj(zq) * std::conj(zs) *
                         phase_selector(std::conj(zp) * zq * std::conj(zr) * zs);
          s2(row, col) = evvc(row, col) * zq * std::conj(zs) *
                         phase_selector(zp * std::conj(zq) * std::conj(zr) * zs);
        }

  CMatrix back = Eigen::kroneckerProduct(Q, Q.conjugate()).eval();
  co.G = back * s1 * back.transpose();
  co.Ghat = back.conjugate() * s2 * back.transpose();

  co.haar_meta.method = HaarMeta::Method::phase_selector;
  co.haar_meta.order =
      finite_order(bs.frame_phases, std::min<long long>(n_samples, 10000));
  co.haar_meta.samples = 0;

  finalize_tensors(co);
  return co;
}

MagnitudeBlock MagnitudeBlock::make(double magnitude, CMatrix unitary,
                                    int offset, double tol) {
  if (!(magnitude > 0.0))
    throw ValidationError("magnitude block: magnitude must be positive");
  if (offset < 0) throw ValidationError("magnitude block: negative offset");
  MagnitudeBlock b;
  b.magnitude = magnitude;
  b.offset = offset;
  b.frame = UnitaryFrame::of(unitary, tol);
  b.unitary = std::move(unitary);
  return b;
}

CrossTensors cross_coefficients(const MagnitudeBlock& block_c,
                                const MagnitudeBlock& block_cp,
                                const NoiseModel& nm, long long n_samples) {
  const int dc = block_c.dim(), dp = block_cp.dim(), D = nm.dim;
  if (block_c.offset + dc > D || block_cp.offset + dp > D)
    throw ValidationError("cross_coefficients: block exceeds noise dimension");
  if (nm.m2.rows() != D * D || nm.m2c.rows() != D * D)
    throw ValidationError("cross_coefficients: second-moment tensors not populated");
  const int mc = dc * dc, mp = dp * dp;

  CMatrix mcc(mc, mp), mccc(mc, mp);
  for (int p = 0; p < dc; ++p)
    for (int q = 0; q < dc; ++q)
      for (int r = 0; r < dp; ++r)
        for (int s = 0; s < dp; ++s) {
          int row = pair_index(p, q, dc), col = pair_index(r, s, dp);
          int grow = pair_index(block_c.offset + p, block_c.offset + q, D);
          int gcol = pair_index(block_cp.offset + r, block_cp.offset + s, D);
          mcc(row, col) = nm.m2(grow, gcol);
          mccc(row, col) = nm.m2c(grow, gcol);
        }

  const CMatrix& qc = block_c.frame.basis;
  const CMatrix& qp = block_cp.frame.basis;
  CVector zc = eigenphase_units(block_c.frame.phases);
  CVector zp = eigenphase_units(block_cp.frame.phases);

  CMatrix rot_c = Eigen::kroneckerProduct(qc.adjoint(), qc.transpose()).eval();
  CMatrix rot_p = Eigen::kroneckerProduct(qp.adjoint(), qp.transpose()).eval();
  CMatrix evv = rot_c * mcc * rot_p.transpose();
  CMatrix evvc = rot_c.conjugate() * mccc * rot_p.transpose();

  CMatrix s1(mc, mp), s2(mc, mp);
  for (int p = 0; p < dc; ++p)
    for (int q = 0; q < dc; ++q)
      for (int r = 0; r < dp; ++r)
        for (int s = 0; s < dp; ++s) {
          int row = pair_index(p, q, dc), col = pair_index(r, s, dp);
          s1(row, col) = evv(row, col) * std::conj(zc(q)) * std::conj(zp(s)) *
                         phase_selector(std::conj(zc(p)) * zc(q) *
                                        std::conj(zp(r)) * zp(s));
          s2(row, col) = evvc(row, col) * zc(q) * std::conj(zp(s)) *
                         phase_selector(zc(p) * std::conj(zc(q)) *
                                        std::conj(zp(r)) * zp(s));
        }

  CMatrix back_c = Eigen::kroneckerProduct(qc, qc.conjugate()).eval();
  CMatrix back_p = Eigen::kroneckerProduct(qp, qp.conjugate()).eval();
  double pref = 1.0 / (block_c.magnitude * block_cp.magnitude);

  CrossTensors ct;
  ct.dim_c = dc;
  ct.dim_cp = dp;
  ct.G = pref * back_c * s1 * back_p.transpose();
  ct.Ghat = pref * back_c.conjugate() * s2 * back_p.transpose();

  RVector joint(dc + dp);
  joint << block_c.frame.phases, block_cp.frame.phases;
  ct.haar_meta.method = HaarMeta::Method::phase_selector;
  ct.haar_meta.order =
      finite_order(joint, std::min<long long>(n_samples, 10000));
  ct.haar_meta.samples = 0;
  return ct;
}

CMatrix sample_increment(const ComplexGaussianSpec& spec, int rows, int cols,
                         double dt, CounterRng& rng) {
  if (rows * cols != spec.dim)
    throw ValidationError("sample_increment: shape does not match spec.dim");
  if (!(dt >= 0.0)) throw ValidationError("sample_increment: dt must be >= 0");
  CVector z = spec.sample(rng, std::sqrt(dt));
  CMatrix out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = z(i * cols + j);
  return out;
}

SDEPath euler_maruyama(const SDECoefficients& coeffs, double t_final, double dt,
                       NoiseStream stream) {
  const long long n = sde_step_count(t_final, dt);
  const int d = coeffs.d1;
  ComplexGaussianSpec spec = coeffs.increment_spec();

  SDEPath path;
  path.dt = dt;
  path.seed = stream.seed;
  path.times.resize(n + 1);
  path.values.reserve(n + 1);
  CMatrix lam = CMatrix::Identity(d, d);
  path.times(0) = 0.0;
  path.values.push_back(lam);
  for (long long k = 1; k <= n; ++k) {
    CounterRng rng(derive_key({kTagEuler, stream.seed, stream.path,
                               static_cast<std::uint64_t>(k)}));
    CMatrix db = sample_increment(spec, d, d, dt, rng);
    lam = (lam + coeffs.V * lam * dt + db * lam).eval();
    path.times(k) = k * dt;
    path.values.push_back(lam);
  }
  return path;
}

RMatrix goe_limit_matrix(int d_e, int d, CounterRng& rng) {
  if (d_e < 1 || d < 1)
    throw ValidationError("goe_limit_matrix: dimensions must be positive");
  const double b = rng.next_normal();
  const double diag_sd = std::sqrt(1.25);
  RMatrix k(d_e, d_e);
  for (int i = 0; i < d_e; ++i) {
    k(i, i) = diag_sd * rng.next_normal();
    for (int j = i + 1; j < d_e; ++j) {
      double x = rng.next_normal();
      k(i, j) = x;
      k(j, i) = x;
    }
  }
  RMatrix out = k + b * RMatrix::Identity(d_e, d_e);
  return out / std::sqrt(static_cast<double>(d + 1));
}

SDEPath band_edge_sde(const BandEdgeModel& model, double eps, double t_final,
                      double dt, NoiseStream stream, const CVector* x0,
                      double theta, double v_var) {
  const long long n = sde_step_count(t_final, dt);
  const int n2 = 2 * model.d;
  if (n2 < 2) throw ValidationError("band_edge_sde: model not built");
  if (v_var < 0.0) throw ValidationError("band_edge_sde: v_var must be >= 0");

  CMatrix drift = CMatrix::Zero(n2, n2);
  for (int k = 0; k + 1 < n2; ++k) drift(k, k + 1) = 1.0;
  drift(n2 - 1, 0) += eps;

  CMatrix state;
  if (x0) {
    if (x0->size() != n2)
      throw ValidationError("band_edge_sde: x0 must have 2d coordinates");
    state = *x0;
  } else {
    state = CMatrix::Identity(n2, n2);
  }

  const cplx rot = std::polar(1.0, -theta);
  const double sd = std::sqrt(v_var * dt);

  SDEPath path;
  path.dt = dt;
  path.seed = stream.seed;
  path.times.resize(n + 1);
  path.values.reserve(n + 1);
  path.times(0) = 0.0;
  path.values.push_back(state);
  for (long long k = 1; k <= n; ++k) {
    CounterRng rng(derive_key({kTagBandEdge, stream.seed, stream.path,
                               static_cast<std::uint64_t>(k)}));
    cplx db = rot * (sd * rng.next_normal());
    CMatrix upd = dt * (drift * state);
    upd.row(n2 - 1) += db * state.row(0);
    state += upd;
    path.times(k) = k * dt;
    path.values.push_back(state);
  }
  return path;
}

}  // namespace rmprod
