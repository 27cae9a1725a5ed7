#include "rmprod/sde.hpp"

#include <cmath>

namespace rmprod {

namespace {

CMatrix big_noise(const ChannelIncrement& inc, int de) {
  CMatrix big(2 * de, 2 * de);
  big.topLeftCorner(de, de) = inc.A;
  big.topRightCorner(de, de) = inc.B;
  big.bottomLeftCorner(de, de) = -inc.B.adjoint();
  big.bottomRightCorner(de, de) = -inc.C;
  return big;
}

// noiseless solution diag(exp(eps t s_z), exp(-eps t s_z)): the sigma = 0
// drift is diagonal, so the lattice of determinant zeros comes out exact
CMatrix noiseless_solution(const ChannelData& ch, double eps, double t) {
  const int de = ch.d_e;
  CMatrix lam = CMatrix::Zero(2 * de, 2 * de);
  for (int j = 0; j < de; ++j) {
    lam(j, j) = std::exp(eps * t * ch.s_z(j));
    lam(de + j, de + j) = std::exp(-eps * t * ch.s_z(j));
  }
  return lam;
}

void run_channel(const ChannelData& ch, const std::vector<double>& eps_list,
                 double sigma, double t_final, double dt, NoiseStream stream,
                 bool real_symmetric, bool goe_flat, SDEPath* path_out,
                 std::vector<CMatrix>* finals_out) {
  const int de = ch.d_e;
  if (de < 1) throw ValidationError("channel sde: no elliptic channels");
  const long long n = sde_step_count(t_final, dt);
  const bool single = path_out != nullptr;
  if (single && eps_list.size() != 1)
    throw ValidationError("channel sde: path output needs exactly one eps");

  if (single) {
    path_out->dt = dt;
    path_out->seed = stream.seed;
    path_out->times.resize(n + 1);
    path_out->values.clear();
    path_out->values.reserve(n + 1);
  }

  if (sigma == 0.0) {
    if (single) {
      for (long long k = 0; k <= n; ++k) {
        path_out->times(k) = k * dt;
        path_out->values.push_back(noiseless_solution(ch, eps_list[0], k * dt));
      }
    }
    if (finals_out) {
      finals_out->clear();
      finals_out->reserve(eps_list.size());
      for (double eps : eps_list)
        finals_out->push_back(noiseless_solution(ch, eps, t_final));
    }
    return;
  }

  ChannelNoiseSpec spec;
  if (!goe_flat) spec = channel_noise_spec(ch);
  const CMatrix smat = ch.smat();

  std::vector<CMatrix> drifts;
  drifts.reserve(eps_list.size());
  for (double eps : eps_list) drifts.push_back(channel_drift(ch, eps, sigma));

  std::vector<CMatrix> lams(eps_list.size(),
                            CMatrix::Identity(2 * de, 2 * de));
  if (single) {
    path_out->times(0) = 0.0;
    path_out->values.push_back(lams[0]);
  }

  for (long long k = 1; k <= n; ++k) {
    CounterRng rng(derive_key({kChannelStepTag, stream.seed, stream.path,
                               static_cast<std::uint64_t>(k)}));
    ChannelIncrement inc =
        goe_flat ? sample_goe_increment(de, ch.d, dt, rng)
                 : sample_channel_increment(spec, dt, rng, real_symmetric);
    CMatrix nmat = sigma * (smat * big_noise(inc, de));
    for (std::size_t e = 0; e < eps_list.size(); ++e)
      lams[e] = (lams[e] + dt * (drifts[e] * lams[e]) + nmat * lams[e]).eval();
    if (single) {
      path_out->times(k) = k * dt;
      path_out->values.push_back(lams[0]);
    }
  }

  if (finals_out) *finals_out = std::move(lams);
}

}  // namespace

ChannelNoiseSpec channel_noise_spec(const ChannelData& ch) {
  const int de = ch.d_e, m = de * de;
  if (de < 1) throw ValidationError("channel noise: no elliptic channels");
  const CVector& z = ch.z_list;
  const CMatrix& v2 = ch.ve2;
  const CMatrix& v2c = ch.ve2c;
  const int a0 = 0, b0 = m, c0 = 2 * m;

  CMatrix R = CMatrix::Zero(3 * m, 3 * m);
  CMatrix C = CMatrix::Zero(3 * m, 3 * m);
  for (int i = 0; i < de; ++i)
    for (int j = 0; j < de; ++j)
      for (int k = 0; k < de; ++k)
        for (int l = 0; l < de; ++l) {
          const int pq = pair_index(i, j, de), rs = pair_index(k, l, de);
          const int qp = pair_index(j, i, de), sr = pair_index(l, k, de);
          const cplx zi = z(i), zj = z(j), zk = z(k), zl = z(l);
          const cplx v = v2(pq, rs);

          // pseudo-covariances E(x y) of the three increment families
          R(a0 + pq, a0 + rs) =
              v * phase_selector(std::conj(zi) * zj * std::conj(zk) * zl);
          R(c0 + pq, c0 + rs) = R(a0 + pq, a0 + rs);
          R(b0 + pq, b0 + rs) = v * phase_selector(zi * zj * zk * zl);
          R(a0 + pq, b0 + rs) = v * phase_selector(zi * std::conj(zj) * zk * zl);
          R(a0 + pq, c0 + rs) =
              v * phase_selector(zi * std::conj(zj) * std::conj(zk) * zl);
          R(c0 + pq, b0 + rs) = v * phase_selector(std::conj(zi) * zj * zk * zl);

          // covariances E(x conj(y)); the A and C families are Hermitian,
          // so conjugating an entry transposes its index pair
          C(a0 + pq, a0 + rs) =
              v2(pq, sr) *
              phase_selector(std::conj(zi) * zj * std::conj(zl) * zk);
          C(c0 + pq, c0 + rs) = C(a0 + pq, a0 + rs);
          C(b0 + pq, b0 + rs) = std::conj(
              v2c(pq, rs) *
              phase_selector(std::conj(zi) * std::conj(zj) * zk * zl));
          C(a0 + pq, b0 + rs) = std::conj(
              v2(qp, rs) * phase_selector(zj * std::conj(zi) * zk * zl));
          C(a0 + pq, c0 + rs) =
              v2(pq, sr) *
              phase_selector(zi * std::conj(zj) * std::conj(zl) * zk);
          C(c0 + pq, b0 + rs) = std::conj(
              v2(qp, rs) * phase_selector(std::conj(zj) * zi * zk * zl));
        }

  R.block(b0, a0, m, m) = R.block(a0, b0, m, m).transpose();
  R.block(c0, a0, m, m) = R.block(a0, c0, m, m).transpose();
  R.block(b0, c0, m, m) = R.block(c0, b0, m, m).transpose();
  C.block(b0, a0, m, m) = C.block(a0, b0, m, m).adjoint();
  C.block(c0, a0, m, m) = C.block(a0, c0, m, m).adjoint();
  C.block(b0, c0, m, m) = C.block(c0, b0, m, m).adjoint();

  ChannelNoiseSpec spec;
  spec.d_e = de;
  spec.joint = ComplexGaussianSpec::make(std::move(C), std::move(R));
  return spec;
}

ChannelIncrement sample_channel_increment(const ChannelNoiseSpec& spec,
                                          double dt, CounterRng& rng,
                                          bool real_symmetric) {
  const int de = spec.d_e, m = de * de;
  CVector beta = spec.joint.sample(rng, std::sqrt(dt));
  ChannelIncrement inc;
  inc.A.resize(de, de);
  inc.B.resize(de, de);
  inc.C.resize(de, de);
  for (int i = 0; i < de; ++i)
    for (int j = 0; j < de; ++j) {
      const int pq = pair_index(i, j, de);
      inc.A(i, j) = beta(pq);
      inc.B(i, j) = beta(m + pq);
      inc.C(i, j) = beta(2 * m + pq);
    }
  inc.A = 0.5 * (inc.A + inc.A.adjoint()).eval();
  inc.C = 0.5 * (inc.C + inc.C.adjoint()).eval();
  if (real_symmetric) {
    inc.C = inc.A.conjugate();
    inc.B = 0.5 * (inc.B + inc.B.transpose()).eval();
  }
  return inc;
}

ChannelIncrement sample_goe_increment(int d_e, int d, double dt,
                                      CounterRng& rng) {
  if (d_e < 1 || d < 1)
    throw ValidationError("goe increment: dimensions must be positive");
  const double s = std::sqrt(dt / (d + 1.0));
  const double inv_sqrt2 = 0.70710678118654752440;
  ChannelIncrement inc;
  inc.A = CMatrix::Zero(d_e, d_e);
  inc.B = CMatrix::Zero(d_e, d_e);

  const double common = s * rng.next_normal();
  for (int i = 0; i < d_e; ++i) {
    inc.A(i, i) = common + s * inv_sqrt2 * rng.next_normal();
    for (int j = i + 1; j < d_e; ++j) {
      cplx off = s * inv_sqrt2 * cplx(rng.next_normal(), rng.next_normal());
      inc.A(i, j) = off;
      inc.A(j, i) = std::conj(off);
    }
  }
  const double diag_sd = s * std::sqrt(0.75);
  for (int i = 0; i < d_e; ++i) {
    inc.B(i, i) = diag_sd * cplx(rng.next_normal(), rng.next_normal());
    for (int j = i + 1; j < d_e; ++j) {
      cplx off = s * inv_sqrt2 * cplx(rng.next_normal(), rng.next_normal());
      inc.B(i, j) = off;
      inc.B(j, i) = off;
    }
  }
  inc.C = inc.A.conjugate();
  return inc;
}

CMatrix channel_drift(const ChannelData& ch, double eps, double sigma) {
  const int de = ch.d_e;
  CMatrix inner = CMatrix::Zero(2 * de, 2 * de);
  CMatrix top = eps * CMatrix::Identity(de, de) - (sigma * sigma) * ch.Qdrift;
  inner.topLeftCorner(de, de) = top;
  inner.bottomRightCorner(de, de) = -top;
  return ch.smat() * inner;
}

SDEPath anderson_sde(const ChannelData& channel, double eps, double sigma,
                     double t_final, double dt, NoiseStream stream,
                     bool real_symmetric) {
  SDEPath path;
  run_channel(channel, {eps}, sigma, t_final, dt, stream, real_symmetric,
              /*goe_flat=*/false, &path, nullptr);
  return path;
}

SDEPath goe_sde(const ChannelData& channel, double eps, double sigma,
                double t_final, double dt, NoiseStream stream) {
  if (!channel.q)
    throw ValidationError("goe_sde: channel drift is not a multiple of the identity");
  SDEPath path;
  run_channel(channel, {eps}, sigma, t_final, dt, stream,
              /*real_symmetric=*/true, /*goe_flat=*/true, &path, nullptr);
  return path;
}

std::vector<CMatrix> channel_final_grid(const ChannelData& channel,
                                        double sigma, const RVector& eps_grid,
                                        double t_final, double dt,
                                        NoiseStream stream, bool real_symmetric,
                                        bool goe_flat) {
  std::vector<double> eps_list(eps_grid.data(), eps_grid.data() + eps_grid.size());
  std::vector<CMatrix> finals;
  if (eps_list.empty()) return finals;
  if (goe_flat && !channel.q)
    throw ValidationError("channel grid: flat increments need a scalar drift");
  run_channel(channel, eps_list, sigma, t_final, dt, stream, real_symmetric,
              goe_flat, nullptr, &finals);
  return finals;
}

}  // namespace rmprod
