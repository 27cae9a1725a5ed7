#include <algorithm>
#include <cmath>
#include <vector>

#include "rmprod/spectra.hpp"

namespace rmprod {

namespace {

// One sweep of the solution slab [[psi_{k+1}], [psi_k]] from the Dirichlet
// start [[I], [0]], QR-renormalized every step with the R diagonal kept
// positive.  The true boundary determinant factors as
// det(top of final slab) = det(top of Q_n) * prod_k det(R_k) with every
// det(R_k) > 0, so the returned det(top of Q_n) is a bounded, continuous
// function of the energy that changes sign exactly where eigenvalues sit.
double slab_det(const StripModel& strip, double lambda, int n, double energy,
                std::uint64_t seed) {
  const int d = strip.d;
  RMatrix slab(2 * d, d);
  slab.topRows(d) = RMatrix::Identity(d, d);   // psi_1
  slab.bottomRows(d) = RMatrix::Zero(d, d);    // psi_0
  RMatrix next(2 * d, d);
  for (int k = 1; k <= n; ++k) {
    RVector v = strip.sample_potential(seed, static_cast<std::uint64_t>(k));
    RMatrix top = -strip.A;
    for (int i = 0; i < d; ++i) top(i, i) += energy - lambda * v(i);
    next.topRows(d) = top * slab.topRows(d) - slab.bottomRows(d);
    next.bottomRows(d) = slab.topRows(d);
    Eigen::HouseholderQR<RMatrix> qr(next);
    RMatrix q = qr.householderQ() * RMatrix::Identity(2 * d, d);
    for (int i = 0; i < d; ++i)
      if (qr.matrixQR()(i, i) < 0.0) q.col(i) = -q.col(i);
    slab = q;
  }
  return slab.topRows(d).determinant();
}

}  // namespace

PointProcess determinant_scan(const StripModel& strip, double lambda, int n,
                              const RVector& eps_grid, std::uint64_t seed) {
  if (strip.d < 1) throw ValidationError("strip: width must be positive");
  if (n < 1) throw ValidationError("strip: length must be positive");
  if (!(lambda >= 0.0)) throw ValidationError("strip: lambda must be >= 0");
  const Eigen::Index ng = eps_grid.size();
  for (Eigen::Index i = 1; i < ng; ++i)
    if (!(eps_grid(i) > eps_grid(i - 1)))
      throw ValidationError("determinant scan: eps grid must be ascending");

  PointProcess pp;
  pp.normalization = static_cast<double>(n);
  pp.provenance = "determinant-scan";
  pp.seed = seed;
  if (ng == 0) return pp;
  if (ng == 1) {
    pp.lo = pp.hi = eps_grid(0);
    return pp;
  }

  auto eval = [&](double eps) {
    return slab_det(strip, lambda, n, strip.E + eps / n, seed);
  };
  std::vector<double> g(static_cast<std::size_t>(ng));
  for (Eigen::Index i = 0; i < ng; ++i)
    g[static_cast<std::size_t>(i)] = eval(eps_grid(i));

  std::vector<double> roots;
  std::vector<std::string> warnings;

  // sign changes: bisect the bracket down to 1e-8 in rescaled units
  for (Eigen::Index i = 0; i + 1 < ng; ++i) {
    const std::size_t s = static_cast<std::size_t>(i);
    if (g[s] == 0.0) {
      roots.push_back(eps_grid(i));
      continue;
    }
    if (g[s] * g[s + 1] >= 0.0) continue;
    double a = eps_grid(i), b = eps_grid(i + 1), fa = g[s];
    while (b - a > 1e-8) {
      const double mid = 0.5 * (a + b);
      const double fm = eval(mid);
      if (fm == 0.0) {
        a = b = mid;
        break;
      }
      if ((fm > 0.0) == (fa > 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  if (g.back() == 0.0) roots.push_back(eps_grid(ng - 1));

  // even-multiplicity roots: |g| dips to ~0 without a sign change
  std::vector<double> absg(g.size());
  std::transform(g.begin(), g.end(), absg.begin(),
                 [](double x) { return std::abs(x); });
  std::vector<double> med_work = absg;
  auto mid_it = med_work.begin() + static_cast<std::ptrdiff_t>(med_work.size() / 2);
  std::nth_element(med_work.begin(), mid_it, med_work.end());
  const double med = *mid_it;
  const double gold = 0.5 * (std::sqrt(5.0) - 1.0);
  for (Eigen::Index i = 1; i + 1 < ng; ++i) {
    const std::size_t s = static_cast<std::size_t>(i);
    if (g[s] == 0.0 || g[s - 1] * g[s + 1] <= 0.0) continue;
    if (!(absg[s] < absg[s - 1] && absg[s] <= absg[s + 1])) continue;
    if (!(absg[s] < 1e-3 * med)) continue;
    double a = eps_grid(i - 1), b = eps_grid(i + 1);
    double x1 = b - gold * (b - a), x2 = a + gold * (b - a);
    double f1 = std::abs(eval(x1)), f2 = std::abs(eval(x2));
    while (b - a > 1e-8) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gold * (b - a);
        f1 = std::abs(eval(x1));
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gold * (b - a);
        f2 = std::abs(eval(x2));
      }
    }
    const double xm = 0.5 * (a + b);
    if (std::abs(eval(xm)) < 1e-6 * med) {
      roots.push_back(xm);
      warnings.push_back("root without sign change (even multiplicity?) at " +
                         std::to_string(xm));
    }
  }

  // Sturm-style cross check over the scanned span
  const int lo_count =
      strip_count_below(strip, lambda, n, strip.E + eps_grid(0) / n, seed);
  const int hi_count =
      strip_count_below(strip, lambda, n, strip.E + eps_grid(ng - 1) / n, seed);
  const int expected = hi_count - lo_count;
  if (expected != static_cast<int>(roots.size()))
    warnings.push_back("missed roots: scan localized " +
                       std::to_string(roots.size()) + " of " +
                       std::to_string(expected) +
                       " eigenvalues in the grid span");

  PointProcess out =
      PointProcess::make(std::move(roots), eps_grid(0), eps_grid(ng - 1),
                         static_cast<double>(n), "determinant-scan", seed);
  out.warnings.insert(out.warnings.end(), warnings.begin(), warnings.end());
  return out;
}

}  // namespace rmprod
