#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "rmprod/spectra.hpp"

using namespace rmprod;

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kSqrt3Pi = std::sqrt(3.0) * kPi;

RVector linspace(double lo, double hi, int n) {
  RVector g(n);
  for (int i = 0; i < n; ++i) g(i) = lo + (hi - lo) * i / (n - 1.0);
  return g;
}

// independent dense assembly of the strip Hamiltonian (same potential stream)
RVector dense_strip_spectrum(const StripModel& strip, double lambda, int n,
                             std::uint64_t seed) {
  const int d = strip.d;
  RMatrix h = RMatrix::Zero(n * d, n * d);
  for (int k = 0; k < n; ++k) {
    RVector v = strip.sample_potential(seed, static_cast<std::uint64_t>(k) + 1);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) h(k * d + i, k * d + j) = strip.A(i, j);
    for (int i = 0; i < d; ++i) h(k * d + i, k * d + i) += lambda * v(i);
    if (k + 1 < n)
      for (int i = 0; i < d; ++i) {
        h(k * d + i, (k + 1) * d + i) = 1.0;
        h((k + 1) * d + i, k * d + i) = 1.0;
      }
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

std::vector<double> rescaled_in_window(const RVector& raw, double E, int n,
                                       double w) {
  std::vector<double> out;
  for (Eigen::Index k = 0; k < raw.size(); ++k) {
    const double x = n * (raw(k) - E);
    if (x > -w && x < w) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> to_vec(const RVector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

TEST_CASE("point process: make sorts, filters the open window, and flags dups") {
  PointProcess pp = PointProcess::make({3.0, -1.0, 5.0, -5.0, 7.0, -9.0}, -5.0,
                                       5.0, 2.0, "unit", 17);
  REQUIRE(pp.points.size() == 2);  // boundary values are outside the open window
  CHECK(pp.points(0) == -1.0);
  CHECK(pp.points(1) == 3.0);
  CHECK(pp.lo == -5.0);
  CHECK(pp.hi == 5.0);
  CHECK(pp.normalization == 2.0);
  CHECK(pp.provenance == "unit");
  CHECK(pp.seed == 17);
  CHECK(pp.warnings.empty());

  PointProcess dup = PointProcess::make({1.0, 1.0 + 1e-12}, 0.0, 2.0, 1.0, "unit", 0);
  CHECK(dup.points.size() == 2);
  REQUIRE(dup.warnings.size() == 1);
  CHECK(dup.warnings[0].find("near-duplicate") != std::string::npos);

  CHECK_THROWS_AS(PointProcess::make({}, 1.0, 1.0, 1.0, "unit", 0),
                  ValidationError);
}

TEST_CASE("strip eigensolve: matches an independent dense assembly") {
  SUBCASE("d = 1 tridiagonal path") {
    StripModel strip = StripModel::zd(1, 1.0, 0.3);
    const double lambda = 0.7;
    const int n = 60;
    PointProcess pp = strip_eigenvalues(strip, lambda, n, 50.0, 11);
    auto oracle = rescaled_in_window(dense_strip_spectrum(strip, lambda, n, 11),
                                     strip.E, n, 50.0);
    REQUIRE(pp.points.size() == static_cast<Eigen::Index>(oracle.size()));
    for (std::size_t k = 0; k < oracle.size(); ++k)
      CHECK(std::abs(pp.points(static_cast<Eigen::Index>(k)) - oracle[k]) < 1e-9);
    CHECK(pp.normalization == static_cast<double>(n));
  }

  SUBCASE("d = 2 block path") {
    StripModel strip = StripModel::zd(2, 1.0, -0.4);
    const double lambda = 0.5;
    const int n = 40;
    PointProcess pp = strip_eigenvalues(strip, lambda, n, 30.0, 23);
    auto oracle = rescaled_in_window(dense_strip_spectrum(strip, lambda, n, 23),
                                     strip.E, n, 30.0);
    REQUIRE(pp.points.size() == static_cast<Eigen::Index>(oracle.size()));
    for (std::size_t k = 0; k < oracle.size(); ++k)
      CHECK(std::abs(pp.points(static_cast<Eigen::Index>(k)) - oracle[k]) < 1e-9);
  }

  SUBCASE("lambda = 0 is the closed-form lattice") {
    // eigenvalues a_j + 2 cos(k pi / (n+1)), a_j = 2 cos(j pi / 3)
    const int n = 40;
    StripModel strip = StripModel::zd(2, 1.0, 0.0);
    PointProcess pp = strip_eigenvalues(strip, 0.0, n, 60.0, 0);
    std::vector<double> lattice;
    for (int j = 1; j <= 2; ++j)
      for (int k = 1; k <= n; ++k) {
        const double e =
            2.0 * std::cos(kPi * j / 3.0) + 2.0 * std::cos(kPi * k / (n + 1.0));
        const double x = n * e;
        if (x > -60.0 && x < 60.0) lattice.push_back(x);
      }
    std::sort(lattice.begin(), lattice.end());
    REQUIRE(pp.points.size() == static_cast<Eigen::Index>(lattice.size()));
    for (std::size_t k = 0; k < lattice.size(); ++k)
      CHECK(std::abs(pp.points(static_cast<Eigen::Index>(k)) - lattice[k]) < 1e-8);
  }

  SUBCASE("dense cap and validation") {
    StripModel strip = StripModel::zd(2, 1.0, 0.0);
    CHECK_THROWS_AS(strip_eigenvalues(strip, 0.1, 3001, 10.0, 0), SizeCap);
    CHECK_THROWS_AS(strip_eigenvalues(strip, 0.1, 51, 10.0, 0, 100), SizeCap);
    CHECK_THROWS_AS(strip_eigenvalues(strip, -0.1, 50, 10.0, 0), ValidationError);
    CHECK_THROWS_AS(strip_eigenvalues(strip, 0.1, 50, 0.0, 0), ValidationError);
  }
}

TEST_CASE("banded eigensolve: identical points to the dense path") {
  SUBCASE("d = 1") {
    StripModel strip = StripModel::zd(1, 1.0, 0.2);
    PointProcess dense = strip_eigenvalues(strip, 0.5, 200, 30.0, 7);
    PointProcess banded = strip_window_eigenvalues(strip, 0.5, 200, 30.0, 7);
    REQUIRE(banded.points.size() == dense.points.size());
    for (Eigen::Index k = 0; k < dense.points.size(); ++k)
      CHECK(std::abs(banded.points(k) - dense.points(k)) < 1e-8);
  }

  SUBCASE("d = 2") {
    StripModel strip = StripModel::zd(2, 1.0, -0.4);
    PointProcess dense = strip_eigenvalues(strip, 0.3, 150, 40.0, 9);
    PointProcess banded = strip_window_eigenvalues(strip, 0.3, 150, 40.0, 9);
    REQUIRE(banded.points.size() == dense.points.size());
    for (Eigen::Index k = 0; k < dense.points.size(); ++k)
      CHECK(std::abs(banded.points(k) - dense.points(k)) < 1e-8);
    CHECK(banded.normalization == dense.normalization);
  }

  SUBCASE("d = 3 free lattice with level crossings") {
    StripModel strip = StripModel::zd(3, 1.0, 0.1);
    PointProcess dense = strip_eigenvalues(strip, 0.0, 30, 20.0, 0);
    PointProcess banded = strip_window_eigenvalues(strip, 0.0, 30, 20.0, 0);
    REQUIRE(banded.points.size() == dense.points.size());
    for (Eigen::Index k = 0; k < dense.points.size(); ++k)
      CHECK(std::abs(banded.points(k) - dense.points(k)) < 1e-8);
  }

  SUBCASE("validation") {
    StripModel strip = StripModel::zd(1, 1.0, 0.0);
    CHECK_THROWS_AS(strip_window_eigenvalues(strip, 0.1, 0, 10.0, 0),
                    ValidationError);
    CHECK_THROWS_AS(strip_window_eigenvalues(strip, 0.1, 10, -1.0, 0),
                    ValidationError);
  }
}

TEST_CASE("counting recursion: matches dense counts at arbitrary energies") {
  StripModel strip = StripModel::zd(2, 1.0, 0.0);
  const double lambda = 0.5;
  const int n = 50;
  RVector raw = dense_strip_spectrum(strip, lambda, n, 11);
  for (double e : {-2.5, -1.0, 0.0, 0.9, 2.7}) {
    int dense_count = 0;
    for (Eigen::Index k = 0; k < raw.size(); ++k)
      if (raw(k) < e) ++dense_count;
    CHECK(strip_count_below(strip, lambda, n, e, 11) == dense_count);
  }
}

TEST_CASE("determinant scan: agrees with the eigensolver on every point") {
  StripModel strip = StripModel::zd(2, 1.0, 0.3);
  const double lambda = 0.4;
  const int n = 100;
  const double w = 15.0;
  PointProcess eig = strip_eigenvalues(strip, lambda, n, w, 5);
  PointProcess scan = determinant_scan(strip, lambda, n, linspace(-w, w, 385), 5);
  CHECK(scan.warnings.empty());
  REQUIRE(scan.points.size() == eig.points.size());
  for (Eigen::Index k = 0; k < eig.points.size(); ++k)
    CHECK(std::abs(scan.points(k) - eig.points(k)) < 1e-6);
}

TEST_CASE("determinant scan: free-lattice roots, empty grids, missed roots") {
  SUBCASE("lambda = 0, d = 1: closed-form root positions") {
    const int n = 80;
    StripModel strip = StripModel::zd(1, 1.0, 0.4);
    PointProcess scan =
        determinant_scan(strip, 0.0, n, linspace(-12.0, 12.0, 301), 0);
    std::vector<double> lattice;
    for (int k = 1; k <= n; ++k) {
      const double x = n * (2.0 * std::cos(kPi * k / (n + 1.0)) - strip.E);
      if (x > -12.0 && x < 12.0) lattice.push_back(x);
    }
    std::sort(lattice.begin(), lattice.end());
    REQUIRE(scan.points.size() == static_cast<Eigen::Index>(lattice.size()));
    for (std::size_t k = 0; k < lattice.size(); ++k)
      CHECK(std::abs(scan.points(static_cast<Eigen::Index>(k)) - lattice[k]) <
            1e-7);
  }

  SUBCASE("empty and singleton grids") {
    StripModel strip = StripModel::zd(1, 1.0, 0.0);
    PointProcess empty = determinant_scan(strip, 0.1, 50, RVector(), 0);
    CHECK(empty.points.size() == 0);
    RVector one(1);
    one << 0.5;
    PointProcess single = determinant_scan(strip, 0.1, 50, one, 0);
    CHECK(single.points.size() == 0);
  }

  SUBCASE("a grid too coarse for the spacing reports missed roots") {
    StripModel strip = StripModel::zd(1, 1.0, 1.0);
    PointProcess scan =
        determinant_scan(strip, 0.0, 100, linspace(-15.0, 15.0, 5), 0);
    REQUIRE(!scan.warnings.empty());
    bool found = false;
    for (const auto& wmsg : scan.warnings)
      if (wmsg.find("missed roots") != std::string::npos) found = true;
    CHECK(found);
  }
}

TEST_CASE("pipeline agreement: scan vs eigensolve on random configurations") {
  CounterRng cfg_rng(derive_key({0x7370656363666731ull}));
  int checked_points = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + static_cast<int>(cfg_rng.next_u64() % 3);
    const int n = 40 + static_cast<int>(cfg_rng.next_u64() % 161);
    const double lambda = 0.3 * cfg_rng.next_unit();
    const double E = -1.2 + 2.4 * cfg_rng.next_unit();
    const auto kind = (cfg_rng.next_u64() & 1) ? PotentialKind::gaussian
                                               : PotentialKind::uniform;
    StripModel strip = StripModel::zd(d, 1.0, E, kind);
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(trial);
    const double w = 8.0;
    PointProcess eig = strip_eigenvalues(strip, lambda, n, w, seed);
    PointProcess scan =
        determinant_scan(strip, lambda, n, linspace(-w, w, 385), seed);
    REQUIRE(scan.points.size() == eig.points.size());
    for (Eigen::Index k = 0; k < eig.points.size(); ++k)
      CHECK(std::abs(scan.points(k) - eig.points(k)) < 1e-6);
    checked_points += static_cast<int>(eig.points.size());
  }
  CHECK(checked_points > 50);  // the ensemble actually exercised the window
}

TEST_CASE("sde zero process: sigma = 0 lattice and stream determinism") {
  StripModel strip = StripModel::zd(1, 1.0, 1.0);
  ChannelData ch = decompose_channels(strip, 1.0);
  CVector z_star(1);
  z_star << 1.0;

  SUBCASE("zeros at sqrt(3) pi k") {
    RVector grid = linspace(-6.3, 6.3, 241);
    PointProcess pp =
        sde_eigenvalue_process(ch, 0.0, z_star, grid, 1e-2, {3, 0});
    REQUIRE(pp.points.size() == 3);
    CHECK(std::abs(pp.points(0) + kSqrt3Pi) < 1e-6);
    CHECK(std::abs(pp.points(1)) < 1e-6);
    CHECK(std::abs(pp.points(2) - kSqrt3Pi) < 1e-6);
  }

  SUBCASE("empty and singleton grids") {
    PointProcess empty =
        sde_eigenvalue_process(ch, 0.3, z_star, RVector(), 1e-2, {3, 0});
    CHECK(empty.points.size() == 0);
    RVector one(1);
    one << 0.4;
    PointProcess single =
        sde_eigenvalue_process(ch, 0.3, z_star, one, 1e-2, {3, 0});
    CHECK(single.points.size() == 0);
  }

  SUBCASE("same stream, same zeros; different stream, different zeros") {
    RVector grid = linspace(-6.3, 6.3, 241);
    PointProcess a = sde_eigenvalue_process(ch, 0.4, z_star, grid, 1e-2, {5, 1});
    PointProcess b = sde_eigenvalue_process(ch, 0.4, z_star, grid, 1e-2, {5, 1});
    PointProcess c = sde_eigenvalue_process(ch, 0.4, z_star, grid, 1e-2, {5, 2});
    REQUIRE(a.points.size() == b.points.size());
    CHECK((a.points - b.points).norm() == 0.0);
    bool same = a.points.size() == c.points.size() &&
                (a.points.size() == 0 || (a.points - c.points).norm() < 1e-12);
    CHECK(!same);
  }

  SUBCASE("validation") {
    CVector bad(1);
    bad << 2.0;  // not unitary
    RVector grid = linspace(-1.0, 1.0, 9);
    CHECK_THROWS_AS(
        sde_eigenvalue_process(ch, 0.0, bad, grid, 1e-2, {0, 0}),
        ValidationError);
    CVector wrong(2);
    wrong << 1.0, 1.0;
    CHECK_THROWS_AS(
        sde_eigenvalue_process(ch, 0.0, wrong, grid, 1e-2, {0, 0}),
        ValidationError);
  }
}

TEST_CASE("sde zero process: sigma > 0 keeps the sigma = 0 density") {
  StripModel strip = StripModel::zd(1, 1.0, 1.0);
  ChannelData ch = decompose_channels(strip, 1.0);
  CVector z_star(1);
  z_star << 1.0;
  // generic window: length / (sqrt(3) pi) ~ the sigma = 0 count of 3
  RVector grid = linspace(-8.0, 8.65, 321);
  const double expect = (8.65 + 8.0) / kSqrt3Pi;
  double total = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    PointProcess pp = sde_eigenvalue_process(
        ch, 0.3, z_star, grid, 1e-2, {99, static_cast<std::uint64_t>(r)});
    total += static_cast<double>(pp.points.size());
  }
  const double mean = total / reps;
  CHECK(std::abs(mean / expect - 1.0) < 0.10);
}

TEST_CASE("operator oracle: sigma = 0 lattice with clean boundary data") {
  StripModel strip = StripModel::zd(1, 1.0, 1.0);
  ChannelData ch = decompose_channels(strip, 1.0);
  CVector z_star(1);
  z_star << 1.0;
  OperatorDiagnostics diag;
  std::vector<double> zeros =
      operator_oracle(ch, 0.0, z_star, 500, {0, 0}, 8.0, &diag);
  REQUIRE(zeros.size() == 3);
  CHECK(std::abs(zeros[0] + kSqrt3Pi) < 0.02);
  CHECK(std::abs(zeros[1]) < 0.02);
  CHECK(std::abs(zeros[2] - kSqrt3Pi) < 0.02);
  CHECK(diag.max_imag < 1e-6);
  REQUIRE(diag.boundary_residuals.size() == zeros.size());
  for (double r : diag.boundary_residuals) CHECK(r < 1e-8);
}

TEST_CASE("operator oracle: matched mesh reproduces the sde zeros") {
  StripModel strip = StripModel::zd(1, 1.0, 1.0);
  ChannelData ch = decompose_channels(strip, 1.0);
  CVector z_star(1);
  z_star << 1.0;
  const int mesh = 400;
  const double dt = 1.0 / mesh;
  NoiseStream stream{512, 4};
  const double w = 6.2;

  PointProcess sde = sde_eigenvalue_process(ch, 0.3, z_star,
                                            linspace(-w, w, 249), dt, stream);
  std::vector<double> oracle =
      operator_oracle(ch, 0.3, z_star, mesh, stream, w);
  REQUIRE(!oracle.empty());
  REQUIRE(sde.points.size() == static_cast<Eigen::Index>(oracle.size()));
  const double tol = 10.0 * (dt + 1.0 / mesh);
  for (Eigen::Index k = 0; k < sde.points.size(); ++k)
    CHECK(std::abs(sde.points(k) - oracle[static_cast<std::size_t>(k)]) < tol);
}

TEST_CASE("sigma = 0 consistency triangle: strip, sde zeros, operator oracle") {
  // mean central spacing of the lambda = 0 strip at E = 1 vs sqrt(3) pi
  const int n = 500;
  StripModel strip = StripModel::zd(1, 1.0, 1.0);
  PointProcess lattice = strip_eigenvalues(strip, 0.0, n, 40.0, 0);
  GapStatistics gs = gap_statistics(lattice);
  CHECK(std::abs(gs.counts.mean_gap / kSqrt3Pi - 1.0) < 0.01);

  // sde zeros and oracle zeros both sit on the same sqrt(3) pi lattice
  ChannelData ch = decompose_channels(strip, 1.0);
  CVector z_star(1);
  z_star << 1.0;
  PointProcess sde = sde_eigenvalue_process(ch, 0.0, z_star,
                                            linspace(-6.3, 6.3, 241), 1e-2,
                                            {0, 0});
  std::vector<double> oracle = operator_oracle(ch, 0.0, z_star, 500, {0, 0}, 6.3);
  REQUIRE(sde.points.size() == static_cast<Eigen::Index>(oracle.size()));
  for (Eigen::Index k = 0; k < sde.points.size(); ++k)
    CHECK(std::abs(sde.points(k) - oracle[static_cast<std::size_t>(k)]) < 0.02);
}

TEST_CASE("hyperbolic drift only translates the sde zero process") {
  // Q = qI vs Q = 0 with identical increments: the generator shifts eps by
  // sigma^2 q exactly, so zeros translate point by point.
  ChannelData ch = build_goe_channel(6, 0.25);
  REQUIRE(ch.d_h == 1);
  REQUIRE(ch.d_e == 5);
  REQUIRE(ch.q.has_value());
  const double sigma = 0.3;
  const double shift = sigma * sigma * *ch.q;

  ChannelData flat = ch;
  flat.Qdrift = CMatrix::Zero(ch.d_e, ch.d_e);
  flat.q = 0.0;

  CVector z_star(ch.d_e);
  for (int j = 0; j < ch.d_e; ++j) z_star(j) = 1.0;

  RVector grid = linspace(-4.0, 4.0, 201);
  RVector grid_shifted(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    grid_shifted(i) = grid(i) - shift;

  NoiseStream stream{77, 0};
  PointProcess with_q =
      sde_eigenvalue_process(ch, sigma, z_star, grid, 0.02, stream);
  PointProcess without_q =
      sde_eigenvalue_process(flat, sigma, z_star, grid_shifted, 0.02, stream);
  REQUIRE(with_q.points.size() > 0);
  REQUIRE(with_q.points.size() == without_q.points.size());
  for (Eigen::Index k = 0; k < with_q.points.size(); ++k)
    CHECK(std::abs(with_q.points(k) - (without_q.points(k) + shift)) < 5e-7);
}

TEST_CASE("windowed counts grow monotonically with the window") {
  StripModel strip = StripModel::zd(2, 1.0, 0.1);
  Eigen::Index last = 0;
  for (double w : {5.0, 15.0, 40.0, 80.0}) {
    PointProcess pp = strip_eigenvalues(strip, 0.4, 120, w, 3);
    CHECK(pp.points.size() >= last);
    last = pp.points.size();
  }
}

TEST_CASE("gap statistics: central half, normalization, and guards") {
  SUBCASE("equally spaced points give unit gaps") {
    PointProcess pp =
        PointProcess::make({0, 1, 2, 3, 4, 5}, -1.0, 6.0, 1.0, "unit", 0);
    GapStatistics gs = gap_statistics(pp);
    CHECK(gs.counts.n_points == 6);
    CHECK(gs.counts.n_gaps == 5);
    CHECK(gs.counts.n_used == 3);
    CHECK(gs.counts.mean_gap == 1.0);
    for (Eigen::Index i = 0; i < gs.gaps.size(); ++i)
      CHECK(gs.gaps(i) == 1.0);
    CHECK(gs.ecdf_x(0) == 1.0);
    CHECK(gs.ecdf_y(gs.ecdf_y.size() - 1) == 1.0);
    CHECK(std::isnan(gs.ks_vs_reference));
  }

  SUBCASE("triangular-number points: central gaps normalized by their mean") {
    PointProcess pp =
        PointProcess::make({0, 1, 3, 6, 10, 15}, -1.0, 16.0, 1.0, "unit", 0);
    GapStatistics gs = gap_statistics(pp);
    // gaps {1,2,3,4,5}; central range keeps {2,3,4}, mean 3
    CHECK(gs.counts.n_used == 3);
    CHECK(gs.counts.mean_gap == 3.0);
    CHECK(std::abs(gs.gaps(0) - 2.0 / 3.0) < 1e-15);
    CHECK(std::abs(gs.gaps(1) - 1.0) < 1e-15);
    CHECK(std::abs(gs.gaps(2) - 4.0 / 3.0) < 1e-15);
  }

  SUBCASE("too few points") {
    PointProcess one = PointProcess::make({0.5}, 0.0, 1.0, 1.0, "unit", 0);
    CHECK_THROWS_AS(gap_statistics(one), TooFewPoints);
    PointProcess coincident =
        PointProcess::make({0.5, 0.5, 0.5}, 0.0, 1.0, 1.0, "unit", 0);
    CHECK_THROWS_AS(gap_statistics(coincident), TooFewPoints);
  }
}

TEST_CASE("ks distance: hand values and null calibration") {
  CHECK(ks_distance({0.0, 1.0}, {0.5}) == 0.5);
  CHECK(ks_distance({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
  CHECK_THROWS_AS(ks_distance({}, {1.0}), TooFewPoints);

  // two independent 1e4-point draws from the same distribution
  CounterRng rng(derive_key({0x6b7363616c693031ull}));
  std::vector<double> a(10000), b(10000);
  for (auto& x : a) x = rng.next_normal();
  for (auto& x : b) x = rng.next_normal();
  CHECK(ks_distance(a, b) < 0.03);
}

TEST_CASE("reference gaps: deterministic, positive, mean one, stable") {
  std::vector<double> pool = goe_reference_gaps(6, 6, 200, {1, 0});
  std::vector<double> again = goe_reference_gaps(6, 6, 200, {1, 0});
  REQUIRE(pool.size() == again.size());
  CHECK(std::equal(pool.begin(), pool.end(), again.begin()));

  double mean = 0.0;
  for (double g : pool) {
    CHECK(g > 0.0);  // level repulsion: no coincident levels
    mean += g;
  }
  mean /= static_cast<double>(pool.size());
  CHECK(std::abs(mean - 1.0) < 0.05);

  CHECK_THROWS_AS(goe_reference_gaps(1, 6, 10, {0, 0}), ValidationError);

  SUBCASE("ecdf stable under halving the sample") {
    std::vector<double> big = goe_reference_gaps(30, 30, 2000, {2, 0});
    std::vector<double> half_a(big.begin(), big.begin() + big.size() / 2);
    std::vector<double> half_b(big.begin() + big.size() / 2, big.end());
    CHECK(ks_distance(half_a, half_b) < 0.05);
  }
}

TEST_CASE("banded eigensolve: large-strip smoke run stays in budget") {
  // the gap-comparison scale: d = 6, n = 1200 (n d = 7200, beyond the dense cap)
  StripModel strip = StripModel::zd(6, 1.0, 0.25);
  PointProcess pp = strip_window_eigenvalues(strip, 0.3 / std::sqrt(1200.0),
                                             1200, 30.0, 424242);
  CHECK(pp.points.size() > 5);
  GapStatistics gs = gap_statistics(pp);
  CHECK(gs.counts.n_used > 0);
  std::vector<double> gaps = to_vec(gs.gaps);
  for (double g : gaps) CHECK(g >= 0.0);
}
