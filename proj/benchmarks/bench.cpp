#include <benchmark/benchmark.h>

#include "rmprod/block_spectrum.hpp"
#include "rmprod/noise.hpp"
#include "rmprod/product.hpp"
#include "rmprod/sde.hpp"
#include "rmprod/spectra.hpp"
#include "rmprod/strip.hpp"

namespace {

rmprod::BlockSpectrum scalar_rotation(int d0, int d1, int d2) {
  using rmprod::CMatrix;
  CMatrix g0 = 0.5 * CMatrix::Identity(d0, d0);
  CMatrix g2 = 0.5 * CMatrix::Identity(d2, d2);
  CMatrix u = CMatrix::Identity(d1, d1);
  for (int j = 0; j < d1; ++j) u(j, j) = std::polar(1.0, 0.37 * (j + 1));
  return rmprod::BlockSpectrum::make(g0, u, g2);
}

void bm_product_steps(benchmark::State& state) {
  const int d1 = static_cast<int>(state.range(0));
  const auto bs = scalar_rotation(1, d1, 1);
  const auto nm = rmprod::NoiseModel::iid_gaussian(bs.dim());
  const double lambda = 0.01;
  for (auto _ : state) {
    auto run = rmprod::run_product(bs, nm, lambda, 1000, 42);
    benchmark::DoNotOptimize(run.state.X);
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(bm_product_steps)->Arg(1)->Arg(4);

void bm_euler_maruyama(benchmark::State& state) {
  const auto bs = scalar_rotation(0, static_cast<int>(state.range(0)), 0);
  const auto nm = rmprod::NoiseModel::iid_gaussian(bs.dim());
  const auto coeffs = rmprod::compute_coefficients(bs, nm);
  for (auto _ : state) {
    auto path = rmprod::euler_maruyama(coeffs, 1.0, 1e-3, {7, 0});
    benchmark::DoNotOptimize(path.values.back());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(bm_euler_maruyama)->Arg(2)->Arg(4);

void bm_determinant_scan(benchmark::State& state) {
  const auto strip = rmprod::StripModel::zd(2, 1.0, -1.5);
  rmprod::RVector grid(257);
  for (int i = 0; i < grid.size(); ++i) grid(i) = -10.0 + 20.0 * i / 256.0;
  for (auto _ : state) {
    auto pp = rmprod::determinant_scan(strip, 0.05, 200, grid, 11);
    benchmark::DoNotOptimize(pp.points);
  }
}
BENCHMARK(bm_determinant_scan);

void bm_strip_eigensolve(benchmark::State& state) {
  const auto strip = rmprod::StripModel::zd(2, 1.0, 0.0);
  const long long n = state.range(0);
  for (auto _ : state) {
    auto pp = rmprod::strip_eigenvalues(strip, 0.05, n, 20.0, 3);
    benchmark::DoNotOptimize(pp.points);
  }
}
BENCHMARK(bm_strip_eigensolve)->Arg(200)->Arg(600);

}  // namespace

BENCHMARK_MAIN();
