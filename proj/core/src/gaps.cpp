#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rmprod/spectra.hpp"

namespace rmprod {

namespace {

constexpr std::uint64_t kTagReference = 0x676f657265663031ull;  // "goeref01"

// central half [n/4, n - n/4) of a gap sequence; nonempty whenever n >= 1
std::pair<int, int> central_range(int n) {
  const int lo = n / 4;
  return {lo, n - lo};
}

}  // namespace

GapStatistics gap_statistics(const PointProcess& pp) {
  const int np = static_cast<int>(pp.points.size());
  if (np < 2) throw TooFewPoints("gap statistics: need at least two points");
  const int ng = np - 1;
  std::vector<double> all(static_cast<std::size_t>(ng));
  for (int i = 0; i < ng; ++i) {
    all[static_cast<std::size_t>(i)] = pp.points(i + 1) - pp.points(i);
    if (all[static_cast<std::size_t>(i)] < 0.0)
      throw ValidationError("gap statistics: points not sorted");
  }
  auto [lo, hi] = central_range(ng);
  std::vector<double> used(all.begin() + lo, all.begin() + hi);
  const double mean =
      std::accumulate(used.begin(), used.end(), 0.0) / used.size();
  if (!(mean > 0.0))
    throw TooFewPoints("gap statistics: central gaps are degenerate");

  GapStatistics gs;
  gs.counts.n_points = np;
  gs.counts.n_gaps = ng;
  gs.counts.n_used = static_cast<int>(used.size());
  gs.counts.mean_gap = mean;
  gs.gaps.resize(static_cast<Eigen::Index>(used.size()));
  for (std::size_t i = 0; i < used.size(); ++i)
    gs.gaps(static_cast<Eigen::Index>(i)) = used[i] / mean;

  std::vector<double> sorted(used);
  for (double& x : sorted) x /= mean;
  std::sort(sorted.begin(), sorted.end());
  gs.ecdf_x.resize(static_cast<Eigen::Index>(sorted.size()));
  gs.ecdf_y.resize(static_cast<Eigen::Index>(sorted.size()));
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    gs.ecdf_x(static_cast<Eigen::Index>(i)) = sorted[i];
    gs.ecdf_y(static_cast<Eigen::Index>(i)) =
        static_cast<double>(i + 1) / sorted.size();
  }
  return gs;
}

double ks_distance(const std::vector<double>& sample_a,
                   const std::vector<double>& sample_b) {
  if (sample_a.empty() || sample_b.empty())
    throw TooFewPoints("ks distance: both samples must be nonempty");
  std::vector<double> a(sample_a), b(sample_b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double ks = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    ks = std::max(ks, std::abs(i / na - j / nb));
  }
  return ks;
}

std::vector<double> goe_reference_gaps(int d_e, int d, int n_samples,
                                       NoiseStream stream) {
  if (d_e < 2)
    throw ValidationError("reference gaps: need at least two channels");
  if (d < 1) throw ValidationError("reference gaps: strip width must be positive");
  if (n_samples < 1)
    throw ValidationError("reference gaps: need at least one sample");
  std::vector<double> pool;
  pool.reserve(static_cast<std::size_t>(n_samples) *
               static_cast<std::size_t>(d_e));
  for (int s = 1; s <= n_samples; ++s) {
    CounterRng rng(derive_key({kTagReference, stream.seed, stream.path,
                               static_cast<std::uint64_t>(s)}));
    RMatrix m = goe_limit_matrix(d_e, d, rng);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(m, Eigen::EigenvaluesOnly);
    const RVector& ev = es.eigenvalues();  // ascending
    const int ng = d_e - 1;
    auto [lo, hi] = central_range(ng);
    double mean = 0.0;
    for (int i = lo; i < hi; ++i) mean += ev(i + 1) - ev(i);
    mean /= (hi - lo);
    if (!(mean > 0.0)) continue;  // coincident levels: measure zero
    for (int i = lo; i < hi; ++i) pool.push_back((ev(i + 1) - ev(i)) / mean);
  }
  return pool;
}

}  // namespace rmprod
