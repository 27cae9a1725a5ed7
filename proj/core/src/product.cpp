#include "rmprod/product.hpp"

#include <cmath>
#include <sstream>

namespace rmprod {

namespace {

// X * M^{-1} without forming the inverse
CMatrix right_solve(const CMatrix& x, const CMatrix& m) {
  return m.transpose().partialPivLu().solve(x.transpose()).transpose();
}

}  // namespace

std::pair<CMatrix, CMatrix> schur_pair(const CMatrix& full, int d2) {
  if (full.rows() != full.cols())
    throw ValidationError("schur_pair: matrix must be square");
  const int q = d2, p = static_cast<int>(full.rows()) - d2;
  if (p < 0) throw ValidationError("schur_pair: d2 exceeds matrix size");
  if (q == 0) return {full, CMatrix::Zero(p, 0)};
  CMatrix a = full.topLeftCorner(p, p), b = full.topRightCorner(p, q);
  CMatrix c = full.bottomLeftCorner(q, p), d = full.bottomRightCorner(q, q);
  if (cond_2(d) >= 1e12)
    throw SingularPivot("schur_pair: lower-right block is numerically singular", 0);
  CMatrix z = right_solve(b, d);
  return {a - z * c, z};
}

ProductState init_state(const BlockSpectrum& bs) {
  ProductState st;
  st.X = CMatrix::Identity(bs.d0 + bs.d1, bs.d0 + bs.d1);
  st.Z = CMatrix::Zero(bs.d0 + bs.d1, bs.d2);
  return st;
}

ProductState init_state(const BlockSpectrum& bs, const CMatrix& full) {
  if (full.rows() != bs.dim() || full.cols() != bs.dim())
    throw ValidationError("init_state: start matrix size mismatch");
  ProductState st;
  try {
    auto [x, z] = schur_pair(full, bs.d2);
    st.X = std::move(x);
    st.Z = std::move(z);
  } catch (const SingularPivot&) {
    throw SingularStart("init_state: trailing block of the start is singular");
  }
  return st;
}

void product_step(ProductState& st, const BlockSpectrum& bs, const NoiseModel& nm,
                  double lambda, std::uint64_t seed) {
  const int p = bs.d0 + bs.d1, q = bs.d2;
  const long long k = st.n + 1;

  CMatrix v = nm.draw(seed, static_cast<std::uint64_t>(k));
  if (nm.clip_bound &&
      op_norm(v) > *nm.clip_bound * std::pow(lambda, nm.clip_exponent - 1.0))
    v.setZero();
  CMatrix y = v + lambda * nm.W;

  CMatrix rminus = bs.r_power(-k);
  CMatrix rprev = bs.r_power(k - 1);
  CMatrix ta = bs.s_matrix() + lambda * (rminus * y.topLeftCorner(p, p) * rprev);

  if (q == 0) {
    st.X = ta * st.X;
    st.n = k;
    return;
  }

  CMatrix tb = lambda * (rminus * y.topRightCorner(p, q));
  CMatrix tc = lambda * (y.bottomLeftCorner(q, p) * rprev);
  CMatrix td = bs.Gamma2inv + lambda * y.bottomRightCorner(q, q);

  CMatrix m = tc * st.Z + td;
  double c = cond_2(m);
  if (c >= 1e12) {
    std::ostringstream os;
    os << "product step " << k << ": quotient direction degenerated (cond "
       << c << ")";
    throw SingularPivot(os.str(), k);
  }
  st.max_cond = std::max(st.max_cond, c);

  CMatrix znew = right_solve(ta * st.Z + tb, m);
  st.X = ta * st.X - znew * (tc * st.X);
  st.Z = std::move(znew);
  st.max_znorm = std::max(st.max_znorm, op_norm(st.Z));
  st.n = k;
}

ProductRun run_product(const BlockSpectrum& bs, const NoiseModel& nm, double lambda,
                       long long n_steps, std::uint64_t seed,
                       const ProductState* start, int retention) {
  if (n_steps < 0) throw ValidationError("run_product: negative step count");
  if (retention < 1) retention = 1;
  ProductRun run;
  run.state = start ? *start : init_state(bs);

  const long long stride = std::max<long long>(1, n_steps / retention);
  auto record = [&run]() {
    ProductSnapshot s;
    s.n = run.state.n;
    s.X = run.state.X;
    s.Z = run.state.Z;
    s.znorm = run.state.Z.size() > 0 ? op_norm(run.state.Z) : 0.0;
    s.cond = run.state.max_cond;
    s.logabsdet_x = std::log(std::abs(run.state.X.determinant()));
    run.snapshots.push_back(s);
  };
  record();
  for (long long k = 0; k < n_steps; ++k) {
    product_step(run.state, bs, nm, lambda, seed);
    if (run.state.n % stride == 0 || k + 1 == n_steps) record();
  }
  return run;
}

BlockSpectrum channel_spectrum(const ChannelData& ch) {
  const int dh = ch.d_h, de = ch.d_e;
  CMatrix g = CMatrix::Zero(dh, dh);
  for (int j = 0; j < dh; ++j) g(j, j) = ch.gamma_list(j);
  CMatrix u = CMatrix::Zero(2 * de, 2 * de);
  for (int j = 0; j < de; ++j) {
    u(j, j) = std::conj(ch.z_list(j));
    u(de + j, de + j) = ch.z_list(j);
  }
  return BlockSpectrum::make(g, u, g);
}

CMatrix channel_start(const ChannelData& ch) {
  const int d = ch.d, dh = ch.d_h, p = dh + 2 * ch.d_e;
  CMatrix f = CMatrix::Identity(2 * d, 2 * d);
  f.block(0, p, dh, dh) = -CMatrix::Identity(dh, dh);
  return f;
}

CMatrix reduced_transfer(const ChannelData& ch, const StripModel& strip,
                         double sigma, double eps, double lambda, long long n,
                         std::uint64_t seed, const CMatrix* x0_full) {
  BlockSpectrum bs = channel_spectrum(ch);
  NoiseModel nm = channel_noise(ch, strip, sigma, eps);
  ProductState st = init_state(bs, x0_full ? *x0_full : channel_start(ch));
  for (long long k = 0; k < n; ++k) product_step(st, bs, nm, lambda, seed);
  return bs.r_power(n) * st.X;
}

}  // namespace rmprod
