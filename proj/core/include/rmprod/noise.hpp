#pragma once

#include <functional>
#include <optional>

#include "rmprod/rng.hpp"
#include "rmprod/types.hpp"

namespace rmprod {

// A matrix-valued noise source V_n plus its deterministic first-order
// drift W and the second moments needed by the diffusion limit:
//
//   m2 [(ij),(kl)] = E( V_ij V_kl )
//   m2c[(ij),(kl)] = E( conj(V_ij) V_kl )
//
// stored as (d^2) x (d^2) matrices over pair_index.  The sampler is a
// pure function of (seed, index): the same pair always reproduces the
// same draw, whatever order the steps are evaluated in.
struct NoiseModel {
  int dim = 0;
  std::function<CMatrix(std::uint64_t seed, std::uint64_t index)> sampler;
  CMatrix W;
  CMatrix m2, m2c;
  std::optional<double> clip_bound;  // draw is zeroed when ||V|| >= bound * lambda^(s-1)
  double clip_exponent = 0.75;       // the s above

  CMatrix draw(std::uint64_t seed, std::uint64_t index) const {
    return sampler(seed, index);
  }

  // i.i.d. real N(0,1) entries
  static NoiseModel iid_gaussian(int d) {
    NoiseModel n = base(d);
    n.sampler = [d](std::uint64_t seed, std::uint64_t idx) {
      CounterRng rng(derive_key({0x6e67617573732430ull, seed, idx}));
      CMatrix v(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) v(i, j) = rng.next_normal();
      return v;
    };
    n.m2 = CMatrix::Identity(d * d, d * d);
    n.m2c = CMatrix::Identity(d * d, d * d);
    return n;
  }

  // i.i.d. standard complex Gaussian entries: E|V_ij|^2 = 1, E(V_ij^2) = 0
  static NoiseModel iid_complex_gaussian(int d) {
    NoiseModel n = base(d);
    n.sampler = [d](std::uint64_t seed, std::uint64_t idx) {
      CounterRng rng(derive_key({0x636f6d706c657831ull, seed, idx}));
      CMatrix v(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) v(i, j) = rng.next_cnormal();
      return v;
    };
    n.m2 = CMatrix::Zero(d * d, d * d);
    n.m2c = CMatrix::Identity(d * d, d * d);
    return n;
  }

  // i.i.d. Rademacher +-1 entries
  static NoiseModel iid_rademacher(int d) {
    NoiseModel n = base(d);
    n.sampler = [d](std::uint64_t seed, std::uint64_t idx) {
      CounterRng rng(derive_key({0x7261646d63683432ull, seed, idx}));
      CMatrix v(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) v(i, j) = rng.next_sign();
      return v;
    };
    n.m2 = CMatrix::Identity(d * d, d * d);
    n.m2c = CMatrix::Identity(d * d, d * d);
    return n;
  }

  // i.i.d. uniform entries on [-sqrt(3), sqrt(3)] (unit variance)
  static NoiseModel iid_uniform(int d) {
    NoiseModel n = base(d);
    n.sampler = [d](std::uint64_t seed, std::uint64_t idx) {
      CounterRng rng(derive_key({0x756e69666f726d31ull, seed, idx}));
      CMatrix v(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) v(i, j) = rng.next_uniform_unitvar();
      return v;
    };
    n.m2 = CMatrix::Identity(d * d, d * d);
    n.m2c = CMatrix::Identity(d * d, d * d);
    return n;
  }

  // Build a noise whose draws are a fixed linear image of another noise's
  // draws: V -> sum_m coeff[m] * inner-draw entry m.  Used for conjugated
  // channel noises; second-moment tensors are transported through the map.
  static NoiseModel linear_image(const NoiseModel& inner, int out_dim,
                                 std::function<CMatrix(const CMatrix&)> map);

 private:
  static NoiseModel base(int d) {
    NoiseModel n;
    n.dim = d;
    n.W = CMatrix::Zero(d, d);
    return n;
  }
};

inline NoiseModel NoiseModel::linear_image(const NoiseModel& inner, int out_dim,
                                           std::function<CMatrix(const CMatrix&)> map) {
  NoiseModel n;
  n.dim = out_dim;
  n.W = CMatrix::Zero(out_dim, out_dim);
  const int di = inner.dim;
  auto inner_sampler = inner.sampler;
  n.sampler = [inner_sampler, map](std::uint64_t seed, std::uint64_t idx) {
    return map(inner_sampler(seed, idx));
  };
  // Transport the tensors: out_(ab) = sum_(ij) L[(ab),(ij)] in_(ij), where L
  // is extracted by probing the map with unit matrices.
  const int mo = out_dim * out_dim, mi = di * di;
  CMatrix L = CMatrix::Zero(mo, mi);
  for (int i = 0; i < di; ++i)
    for (int j = 0; j < di; ++j) {
      CMatrix e = CMatrix::Zero(di, di);
      e(i, j) = 1.0;
      CMatrix img = map(e);
      for (int a = 0; a < out_dim; ++a)
        for (int b = 0; b < out_dim; ++b)
          L(pair_index(a, b, out_dim), pair_index(i, j, di)) = img(a, b);
    }
  n.m2 = L * inner.m2 * L.transpose();
  n.m2c = L.conjugate() * inner.m2c * L.transpose();
  return n;
}

}  // namespace rmprod
