#include "rmprod/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>
#include <utility>

#include "json.hpp"

#include "rmprod/band_edge.hpp"
#include "rmprod/block_spectrum.hpp"
#include "rmprod/csv.hpp"
#include "rmprod/flag.hpp"
#include "rmprod/product.hpp"
#include "rmprod/sde.hpp"
#include "rmprod/spectra.hpp"
#include "rmprod/strip.hpp"
#include "rmprod/version.hpp"

namespace rmprod {

namespace {

std::string fmt(double x) { return format_double(x); }

std::string fmt(cplx z) {
  return format_double(z.real()) + (z.imag() < 0 ? " - " : " + ") +
         format_double(std::abs(z.imag())) + "i";
}

std::string kv(const std::string& key, const std::string& value) {
  return key + " = " + value + "\n";
}

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

PotentialKind potential_kind(const std::string& name) {
  if (name == "rademacher") return PotentialKind::rademacher;
  if (name == "uniform") return PotentialKind::uniform;
  return PotentialKind::gaussian;
}

BlockSpectrum block_model(const ExperimentConfig& cfg) {
  CMatrix g0 = cfg.gamma0 * CMatrix::Identity(cfg.d0, cfg.d0);
  CMatrix g2 = cfg.gamma0 * CMatrix::Identity(cfg.d2, cfg.d2);
  CMatrix u = CMatrix::Identity(cfg.d1, cfg.d1);
  for (std::size_t j = 0; j < cfg.phases.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    u(jj, jj) = std::polar(1.0, cfg.phases[j]);
  }
  return BlockSpectrum::make(std::move(g0), std::move(u), std::move(g2));
}

NoiseModel noise_model(const ExperimentConfig& cfg, int dim) {
  if (cfg.noise == "complex") return NoiseModel::iid_complex_gaussian(dim);
  if (cfg.noise == "rademacher") return NoiseModel::iid_rademacher(dim);
  if (cfg.noise == "uniform") return NoiseModel::iid_uniform(dim);
  return NoiseModel::iid_gaussian(dim);
}

// energy grid for the scan pipelines; defaults to 2049 points across the
// window so every grid cell is interior to it
RVector eps_grid_of(const ExperimentConfig& cfg) {
  const int npts = cfg.eps_points > 0 ? cfg.eps_points : 2049;
  const double lo = cfg.eps_points > 0 ? cfg.eps_min : -cfg.window;
  const double hi = cfg.eps_points > 0 ? cfg.eps_max : cfg.window;
  if (npts < 2) throw ValidationError("runner: eps grid needs >= 2 points");
  RVector g(npts);
  for (int i = 0; i < npts; ++i)
    g(i) = lo + (hi - lo) * static_cast<double>(i) / (npts - 1);
  return g;
}

// ---------------------------------------------------------------------------
// replica pool

struct ReplicaOutput {
  std::vector<std::vector<std::string>> rows;  // bulk CSV rows, replica order
  std::vector<double> raw_gaps;                // central gaps (spectrum runs)
  std::vector<double> norm_gaps;               // same, mean-normalized
  std::vector<std::string> warnings;
};

// Pulls replica indices off a shared counter; results land in a pre-sized
// vector so the assembled CSV is byte-identical for every worker count.
std::vector<ReplicaOutput> run_pool(
    const ExperimentConfig& cfg,
    const std::function<ReplicaOutput(int, std::uint64_t)>& fn,
    std::vector<ReplicaStatus>& statuses) {
  const int nr = cfg.replicas;
  std::vector<ReplicaOutput> outputs(static_cast<std::size_t>(nr));
  statuses.assign(static_cast<std::size_t>(nr), ReplicaStatus{});
  std::atomic<int> next{0};
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= nr) return;
      ReplicaStatus st;
      st.index = i;
      st.seed = replica_seed(cfg.seed, i);
      try {
        outputs[static_cast<std::size_t>(i)] = fn(i, st.seed);
      } catch (const std::exception& e) {
        st.ok = false;
        st.error = e.what();
      }
      statuses[static_cast<std::size_t>(i)] = st;
    }
  };
  const int nw = std::max(1, std::min(cfg.workers, nr));
  if (nw == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(nw));
    for (int t = 0; t < nw; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  return outputs;
}

std::string assemble_csv(const std::vector<std::string>& header,
                         const std::vector<ReplicaOutput>& outputs) {
  CsvTable table;
  table.header = header;
  for (const auto& out : outputs)
    for (const auto& row : out.rows) table.add_row(row);
  return table.serialize();
}

// ks / n_gaps / mean_gap / quantile block shared by the spectrum summaries
std::string gap_block(std::vector<double> norm_gaps, double mean_raw,
                      double ks) {
  std::sort(norm_gaps.begin(), norm_gaps.end());
  std::string s;
  s += kv("ks", fmt(ks));
  s += kv("n_gaps", std::to_string(norm_gaps.size()));
  s += kv("mean_gap", fmt(mean_raw));
  const std::pair<const char*, double> qs[] = {
      {"q05", 0.05}, {"q25", 0.25}, {"q50", 0.50}, {"q75", 0.75}, {"q95", 0.95}};
  for (const auto& [name, p] : qs) s += kv(name, fmt(quantile(norm_gaps, p)));
  return s;
}

// pooled central-gap columns out of a finished point process
void collect_gaps(const PointProcess& pp, ReplicaOutput& out) {
  try {
    const GapStatistics gs = gap_statistics(pp);
    for (int k = 0; k < gs.gaps.size(); ++k) {
      out.norm_gaps.push_back(gs.gaps(k));
      out.raw_gaps.push_back(gs.gaps(k) * gs.counts.mean_gap);
    }
  } catch (const TooFewPoints&) {
    // realizations with a near-empty window contribute no gaps
  }
}

void point_rows(const PointProcess& pp, std::uint64_t seed,
                ReplicaOutput& out) {
  for (int k = 0; k < pp.points.size(); ++k)
    out.rows.push_back({fmt(pp.points(k)), fmt(pp.lo), fmt(pp.hi),
                        fmt(pp.normalization), std::to_string(seed)});
  out.warnings.insert(out.warnings.end(), pp.warnings.begin(),
                      pp.warnings.end());
}

const std::vector<std::string> kPointHeader = {
    "point", "window_lo", "window_hi", "normalization", "seed"};

std::string spectrum_summary(const ExperimentConfig& cfg,
                             const std::vector<ReplicaOutput>& outputs,
                             const std::string& method) {
  std::vector<double> norm_gaps;
  double raw_sum = 0.0;
  std::size_t raw_n = 0, n_points = 0, n_warn = 0;
  for (const auto& out : outputs) {
    norm_gaps.insert(norm_gaps.end(), out.norm_gaps.begin(),
                     out.norm_gaps.end());
    for (double g : out.raw_gaps) raw_sum += g;
    raw_n += out.raw_gaps.size();
    n_points += out.rows.size();
    n_warn += out.warnings.size();
  }
  std::string s;
  s += kv("pipeline", pipeline_name(cfg.pipeline));
  s += kv("method", method);
  s += kv("replicas", std::to_string(cfg.replicas));
  s += kv("n_points", std::to_string(n_points));
  s += gap_block(std::move(norm_gaps), raw_n ? raw_sum / raw_n : 0.0,
                 std::numeric_limits<double>::quiet_NaN());
  s += kv("warnings", std::to_string(n_warn));
  std::size_t shown = 0;
  for (const auto& out : outputs)
    for (const auto& w : out.warnings) {
      if (shown++ >= 20) break;
      s += kv("warning", w);
    }
  return s;
}

// ---------------------------------------------------------------------------
// pipelines

void run_product_pipeline(const ExperimentConfig& cfg, RunManifest& man,
                          std::map<std::string, std::string>& files) {
  const BlockSpectrum bs = block_model(cfg);
  const NoiseModel nm = noise_model(cfg, bs.dim());
  const double lambda =
      cfg.lambda >= 0.0 ? cfg.lambda : 1.0 / std::sqrt(double(cfg.n));
  auto fn = [&](int index, std::uint64_t seed) {
    ProductRun run = run_product(bs, nm, lambda, cfg.n, seed);
    const ProductSnapshot& last = run.snapshots.back();
    ReplicaOutput out;
    out.rows.push_back({std::to_string(index), std::to_string(seed),
                        fmt(last.logabsdet_x), fmt(last.znorm),
                        fmt(last.cond)});
    out.raw_gaps.push_back(last.logabsdet_x);  // reused as the summary sample
    return out;
  };
  auto outputs = run_pool(cfg, fn, man.replicas);
  files["samples.csv"] = assemble_csv(
      {"replica", "seed", "log_abs_det_x", "z_norm", "cond"}, outputs);

  std::vector<double> sample;
  for (const auto& out : outputs)
    sample.insert(sample.end(), out.raw_gaps.begin(), out.raw_gaps.end());
  double mean = 0.0, var = 0.0;
  for (double x : sample) mean += x;
  if (!sample.empty()) mean /= static_cast<double>(sample.size());
  for (double x : sample) var += (x - mean) * (x - mean);
  if (sample.size() > 1) var /= static_cast<double>(sample.size() - 1);

  std::string s;
  s += kv("pipeline", "product");
  s += kv("replicas", std::to_string(cfg.replicas));
  s += kv("n", std::to_string(cfg.n));
  s += kv("lambda", fmt(lambda));
  s += kv("mean_log_abs_det_x", fmt(mean));
  s += kv("var_log_abs_det_x", fmt(var));
  files["summary.txt"] = s;
}

void run_coefficients_pipeline(const ExperimentConfig& cfg, RunManifest& man,
                               std::map<std::string, std::string>& files) {
  const BlockSpectrum bs = block_model(cfg);
  const NoiseModel nm = noise_model(cfg, bs.dim());
  SDECoefficients coeffs;
  auto fn = [&](int, std::uint64_t) {
    coeffs = compute_coefficients(bs, nm);
    return ReplicaOutput{};
  };
  ExperimentConfig once = cfg;
  once.replicas = 1;
  run_pool(once, fn, man.replicas);
  if (!man.replicas.empty() && !man.replicas.front().ok) return;

  const int d1 = bs.d1;
  CsvTable table;
  table.header = {"a", "b", "c", "d", "re_g", "im_g", "re_ghat", "im_ghat"};
  for (int a = 0; a < d1; ++a)
    for (int b = 0; b < d1; ++b)
      for (int c = 0; c < d1; ++c)
        for (int d = 0; d < d1; ++d) {
          const int row = pair_index(a, b, d1), col = pair_index(c, d, d1);
          table.add_row({std::to_string(a), std::to_string(b),
                         std::to_string(c), std::to_string(d),
                         fmt(coeffs.G(row, col).real()),
                         fmt(coeffs.G(row, col).imag()),
                         fmt(coeffs.Ghat(row, col).real()),
                         fmt(coeffs.Ghat(row, col).imag())});
        }
  files["coefficients.csv"] = table.serialize();

  std::string s;
  s += kv("pipeline", "coefficients");
  s += kv("d1", std::to_string(d1));
  const char* method =
      coeffs.haar_meta.method == HaarMeta::Method::finite_group
          ? "finite-group"
          : (coeffs.haar_meta.method == HaarMeta::Method::ergodic
                 ? "ergodic"
                 : "phase-selector");
  s += kv("haar_method", method);
  s += kv("haar_order", std::to_string(coeffs.haar_meta.order));
  for (int i = 0; i < d1; ++i)
    for (int j = 0; j < d1; ++j)
      s += kv("drift_" + std::to_string(i) + "_" + std::to_string(j),
              fmt(coeffs.V(i, j)));
  files["summary.txt"] = s;
}

void run_sde_pipeline(const ExperimentConfig& cfg, RunManifest& man,
                      std::map<std::string, std::string>& files) {
  const BlockSpectrum bs = block_model(cfg);
  const NoiseModel nm = noise_model(cfg, bs.dim());
  const SDECoefficients coeffs = compute_coefficients(bs, nm);
  const int d1 = bs.d1;
  auto fn = [&](int index, std::uint64_t seed) {
    SDEPath path = euler_maruyama(coeffs, cfg.t_final, cfg.dt, {seed, 0});
    const CMatrix& last = path.values.back();
    ReplicaOutput out;
    std::vector<std::string> row = {std::to_string(index),
                                    std::to_string(seed)};
    for (int i = 0; i < d1; ++i)
      for (int j = 0; j < d1; ++j) {
        row.push_back(fmt(last(i, j).real()));
        row.push_back(fmt(last(i, j).imag()));
        out.raw_gaps.push_back(last(i, j).real());
        out.norm_gaps.push_back(last(i, j).imag());
      }
    out.rows.push_back(std::move(row));
    return out;
  };
  auto outputs = run_pool(cfg, fn, man.replicas);

  std::vector<std::string> header = {"replica", "seed"};
  for (int i = 0; i < d1; ++i)
    for (int j = 0; j < d1; ++j) {
      const std::string tag = std::to_string(i) + "_" + std::to_string(j);
      header.push_back("re_x_" + tag);
      header.push_back("im_x_" + tag);
    }
  files["final.csv"] = assemble_csv(header, outputs);

  const int ncell = d1 * d1;
  std::vector<double> mean_re(static_cast<std::size_t>(ncell), 0.0);
  std::vector<double> mean_im(static_cast<std::size_t>(ncell), 0.0);
  std::size_t count = 0;
  for (const auto& out : outputs) {
    if (out.raw_gaps.empty()) continue;
    ++count;
    for (int k = 0; k < ncell; ++k) {
      mean_re[static_cast<std::size_t>(k)] +=
          out.raw_gaps[static_cast<std::size_t>(k)];
      mean_im[static_cast<std::size_t>(k)] +=
          out.norm_gaps[static_cast<std::size_t>(k)];
    }
  }
  std::string s;
  s += kv("pipeline", "sde");
  s += kv("replicas", std::to_string(cfg.replicas));
  s += kv("t_final", fmt(cfg.t_final));
  s += kv("dt", fmt(cfg.dt));
  for (int i = 0; i < d1; ++i)
    for (int j = 0; j < d1; ++j) {
      const auto k = static_cast<std::size_t>(i * d1 + j);
      const double denom = count ? static_cast<double>(count) : 1.0;
      s += kv("mean_x_" + std::to_string(i) + "_" + std::to_string(j),
              fmt(mean_re[k] / denom) + " " + fmt(mean_im[k] / denom));
    }
  files["summary.txt"] = s;
}

void run_strip_spectrum_pipeline(const ExperimentConfig& cfg, RunManifest& man,
                                 std::map<std::string, std::string>& files) {
  const StripModel strip =
      StripModel::zd(cfg.d, cfg.r, cfg.E, potential_kind(cfg.potential));
  const double lambda = cfg.effective_lambda();
  const bool detscan = cfg.method == "detscan";
  const bool banded = cfg.method == "banded";
  RVector grid;
  if (detscan) grid = eps_grid_of(cfg);
  auto fn = [&](int, std::uint64_t seed) {
    PointProcess pp =
        detscan ? determinant_scan(strip, lambda, cfg.n, grid, seed)
        : banded
            ? strip_window_eigenvalues(strip, lambda, cfg.n, cfg.window, seed)
            : strip_eigenvalues(strip, lambda, cfg.n, cfg.window, seed);
    ReplicaOutput out;
    point_rows(pp, seed, out);
    collect_gaps(pp, out);
    return out;
  };
  auto outputs = run_pool(cfg, fn, man.replicas);
  files["points.csv"] = assemble_csv(kPointHeader, outputs);
  files["summary.txt"] = spectrum_summary(cfg, outputs, cfg.method);
}

void run_sde_spectrum_pipeline(const ExperimentConfig& cfg, RunManifest& man,
                               std::map<std::string, std::string>& files) {
  const ChannelData channel = build_goe_channel(cfg.d, cfg.E, cfg.r);
  const CVector zs = cfg.z_star(channel.d_e);
  const RVector grid = eps_grid_of(cfg);
  auto fn = [&](int, std::uint64_t seed) {
    PointProcess pp = sde_eigenvalue_process(channel, cfg.sigma, zs, grid,
                                             cfg.dt, {seed, 0});
    ReplicaOutput out;
    point_rows(pp, seed, out);
    collect_gaps(pp, out);
    return out;
  };
  auto outputs = run_pool(cfg, fn, man.replicas);
  files["points.csv"] = assemble_csv(kPointHeader, outputs);
  files["summary.txt"] = spectrum_summary(cfg, outputs, "sde-determinant");
}

void run_goe_compare_pipeline(const ExperimentConfig& cfg, RunManifest& man,
                              std::map<std::string, std::string>& files) {
  const StripModel strip =
      StripModel::zd(cfg.d, cfg.r, cfg.E, potential_kind(cfg.potential));
  const ChannelData channel = build_goe_channel(cfg.d, cfg.E, cfg.r);
  if (channel.d_e < 2)
    throw ValidationError(
        "goe-compare: the limit comparison needs at least 2 elliptic "
        "channels, got " +
        std::to_string(channel.d_e));
  const double lambda = cfg.effective_lambda();
  // Hyperbolic channels translate the elliptic spectrum by sigma^2 q; the
  // comparison window is recentered there so both runs look at the bulk.
  const double center =
      cfg.recenter ? cfg.sigma * cfg.sigma * channel.q.value_or(0.0) : 0.0;
  auto fn = [&](int index, std::uint64_t seed) {
    const double wide = cfg.window + std::abs(center);
    PointProcess pp = strip_window_eigenvalues(strip, lambda, cfg.n, wide, seed);
    std::vector<double> shifted;
    for (int k = 0; k < pp.points.size(); ++k) {
      const double x = pp.points(k) - center;
      if (x > -cfg.window && x < cfg.window) shifted.push_back(x);
    }
    PointProcess local =
        PointProcess::make(std::move(shifted), -cfg.window, cfg.window,
                           pp.normalization, "goe-compare", seed);
    ReplicaOutput out;
    collect_gaps(local, out);
    for (double g : out.norm_gaps)
      out.rows.push_back({std::to_string(index), std::to_string(seed),
                          fmt(g)});
    out.warnings = pp.warnings;
    return out;
  };
  auto outputs = run_pool(cfg, fn, man.replicas);
  files["strip_gaps.csv"] =
      assemble_csv({"replica", "seed", "gap"}, outputs);

  const std::vector<double> reference =
      goe_reference_gaps(channel.d_e, cfg.d, cfg.n_samples, {cfg.seed, 0});
  CsvTable ref;
  ref.header = {"index", "gap"};
  for (std::size_t k = 0; k < reference.size(); ++k)
    ref.add_row({std::to_string(k), fmt(reference[k])});
  files["reference_gaps.csv"] = ref.serialize();

  std::vector<double> strip_gaps;
  double raw_sum = 0.0;
  std::size_t raw_n = 0;
  for (const auto& out : outputs) {
    strip_gaps.insert(strip_gaps.end(), out.norm_gaps.begin(),
                      out.norm_gaps.end());
    for (double g : out.raw_gaps) raw_sum += g;
    raw_n += out.raw_gaps.size();
  }
  double ks = std::numeric_limits<double>::quiet_NaN();
  if (!strip_gaps.empty() && !reference.empty())
    ks = ks_distance(strip_gaps, reference);

  std::string s;
  s += kv("pipeline", "goe-compare");
  s += kv("replicas", std::to_string(cfg.replicas));
  s += kv("d_e", std::to_string(channel.d_e));
  s += kv("d_h", std::to_string(channel.d_h));
  s += kv("q", channel.q ? fmt(*channel.q) : "none");
  s += kv("recenter_shift", fmt(center));
  s += kv("n_reference_gaps", std::to_string(reference.size()));
  s += gap_block(strip_gaps, raw_n ? raw_sum / raw_n : 0.0, ks);
  files["summary.txt"] = s;
}

void run_flag_pipeline(const ExperimentConfig& cfg, RunManifest& man,
                       std::map<std::string, std::string>& files) {
  std::vector<CMatrix> blocks(cfg.magnitudes.size(),
                              CMatrix::Identity(1, 1));
  const FlagModel model = FlagModel::make(cfg.magnitudes, blocks);
  const int dim = model.dim();
  const NoiseModel nm = noise_model(cfg, dim);
  const double lambda =
      cfg.lambda >= 0.0 ? cfg.lambda : 1.0 / std::sqrt(double(cfg.n));
  // generic start in the attracted class: every trailing minor of an upper
  // unitriangular frame is 1
  CMatrix f0 = CMatrix::Identity(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) f0(i, j) = 1.0;
  const std::vector<int> sizes = model.flag_sizes();
  auto fn = [&](int index, std::uint64_t seed) {
    FlagState st = propagate_flag(model, nm, lambda, cfg.n, seed, f0);
    const std::vector<RVector> angles = flag_angles_to_stable(model, st.F);
    ReplicaOutput out;
    for (std::size_t k = 0; k < angles.size(); ++k) {
      const double worst = angles[k].size() ? angles[k].maxCoeff() : 0.0;
      out.rows.push_back({std::to_string(index), std::to_string(seed),
                          std::to_string(sizes[k]), fmt(worst)});
      out.raw_gaps.push_back(worst);
    }
    return out;
  };
  auto outputs = run_pool(cfg, fn, man.replicas);
  files["angles.csv"] = assemble_csv(
      {"replica", "seed", "subspace_size", "max_principal_angle"}, outputs);

  double worst = 0.0;
  for (const auto& out : outputs)
    for (double a : out.raw_gaps) worst = std::max(worst, a);
  std::string s;
  s += kv("pipeline", "flag");
  s += kv("replicas", std::to_string(cfg.replicas));
  s += kv("n", std::to_string(cfg.n));
  s += kv("lambda", fmt(lambda));
  for (std::size_t i = 0; i + 1 < cfg.magnitudes.size(); ++i)
    s += kv("magnitude_ratio_" + std::to_string(i),
            fmt(cfg.magnitudes[i] / cfg.magnitudes[i + 1]));
  s += kv("max_principal_angle", fmt(worst));
  files["summary.txt"] = s;
}

void run_band_edge_pipeline(const ExperimentConfig& cfg, RunManifest& man,
                            std::map<std::string, std::string>& files) {
  const BandEdgeModel model = build_band_edge(cfg.d);
  auto fn = [&](int index, std::uint64_t seed) {
    SDEPath path = band_edge_sde(model, cfg.eps, cfg.t_final, cfg.dt,
                                 {seed, 0}, nullptr, cfg.theta, cfg.v_var);
    const CMatrix& last = path.values.back();
    ReplicaOutput out;
    for (int i = 0; i < last.rows(); ++i)
      for (int j = 0; j < last.cols(); ++j)
        out.rows.push_back({std::to_string(index), std::to_string(seed),
                            std::to_string(i), std::to_string(j),
                            fmt(last(i, j).real()), fmt(last(i, j).imag())});
    out.raw_gaps.push_back(std::abs(last(last.rows() - 1, 0)));
    return out;
  };
  auto outputs = run_pool(cfg, fn, man.replicas);
  files["final.csv"] = assemble_csv(
      {"replica", "seed", "row", "col", "re", "im"}, outputs);

  double mean_corner = 0.0;
  std::size_t count = 0;
  for (const auto& out : outputs)
    for (double v : out.raw_gaps) {
      mean_corner += v;
      ++count;
    }
  if (count) mean_corner /= static_cast<double>(count);
  std::string s;
  s += kv("pipeline", "band-edge");
  s += kv("replicas", std::to_string(cfg.replicas));
  s += kv("d", std::to_string(cfg.d));
  s += kv("alpha", fmt(model.alpha));
  s += kv("eps", fmt(cfg.eps));
  s += kv("t_final", fmt(cfg.t_final));
  s += kv("mean_abs_corner", fmt(mean_corner));
  files["summary.txt"] = s;
}

// ---------------------------------------------------------------------------
// describe

void describe_channels(const ExperimentConfig& cfg, std::string& s) {
  s += kv("model", "lattice strip");
  s += kv("d", std::to_string(cfg.d));
  s += kv("r", fmt(cfg.r));
  s += kv("E", fmt(cfg.E));
  try {
    const ChannelData ch = build_goe_channel(cfg.d, cfg.E, cfg.r);
    for (int j = 0; j < ch.d; ++j) {
      std::string line = "a = " + fmt(ch.a(j));
      if (j < ch.d_h) {
        line += ", hyperbolic, gamma = ";
        const cplx g = ch.gamma_list(j);
        line += std::abs(g.imag()) < 1e-12 ? fmt(g.real()) : fmt(g);
      } else {
        line += ", elliptic, z = " + fmt(ch.z_list(j - ch.d_h));
      }
      s += kv("channel_" + std::to_string(j + 1), line);
    }
    s += kv("d_h", std::to_string(ch.d_h));
    s += kv("d_e", std::to_string(ch.d_e));
    s += kv("q", ch.q ? fmt(*ch.q) : "not scalar");
    if (ch.chaotic.chaotic) {
      s += kv("chaotic", "true");
    } else {
      s += kv("chaotic", "false (z-phase relation type " +
                             std::to_string(ch.chaotic.relation) +
                             " at channels " +
                             std::to_string(ch.chaotic.idx[0]) + "," +
                             std::to_string(ch.chaotic.idx[1]) + "," +
                             std::to_string(ch.chaotic.idx[2]) + "," +
                             std::to_string(ch.chaotic.idx[3]) + ")");
    }
  } catch (const ParabolicChannel& e) {
    s += kv("parabolic", e.what());
  }
}

void describe_blocks(const ExperimentConfig& cfg, std::string& s) {
  const BlockSpectrum bs = block_model(cfg);
  s += kv("model", "three-block transfer spectrum");
  s += kv("d0", std::to_string(bs.d0));
  s += kv("d1", std::to_string(bs.d1));
  s += kv("d2", std::to_string(bs.d2));
  if (bs.d0 > 0) s += kv("radius_gamma0", fmt(spectral_radius(bs.Gamma0)));
  if (bs.d2 > 0)
    s += kv("radius_gamma2_inv", fmt(spectral_radius(bs.Gamma2inv)));
  if (std::isfinite(bs.gamma)) s += kv("gamma", fmt(bs.gamma));
  for (int j = 0; j < bs.d1; ++j)
    s += kv("u_phase_" + std::to_string(j), fmt(bs.frame_phases(j)));
  s += kv("noise", cfg.noise);
}

void describe_flag(const ExperimentConfig& cfg, std::string& s) {
  std::vector<CMatrix> blocks(cfg.magnitudes.size(),
                              CMatrix::Identity(1, 1));
  const FlagModel model = FlagModel::make(cfg.magnitudes, blocks);
  s += kv("model", "graded diagonal with noise");
  for (std::size_t i = 0; i < cfg.magnitudes.size(); ++i)
    s += kv("magnitude_" + std::to_string(i), fmt(cfg.magnitudes[i]));
  // consecutive magnitude ratios bound the per-step angle contraction
  for (std::size_t i = 0; i + 1 < cfg.magnitudes.size(); ++i)
    s += kv("contraction_rate_" + std::to_string(i),
            fmt(cfg.magnitudes[i] / cfg.magnitudes[i + 1]));
  std::string sizes;
  for (int sz : model.flag_sizes()) {
    if (!sizes.empty()) sizes += ",";
    sizes += std::to_string(sz);
  }
  s += kv("flag_sizes", sizes);
}

void describe_band_edge(const ExperimentConfig& cfg, std::string& s) {
  const BandEdgeModel model = build_band_edge(cfg.d);
  s += kv("model", "band-edge companion form");
  s += kv("d", std::to_string(cfg.d));
  s += kv("jordan_size", std::to_string(2 * cfg.d));
  s += kv("alpha", fmt(model.alpha));
}

}  // namespace

std::string describe_report(const ExperimentConfig& cfg) {
  cfg.validate();
  std::string s;
  s += kv("pipeline", pipeline_name(cfg.pipeline));
  s += kv("seed", std::to_string(cfg.seed));
  switch (cfg.pipeline) {
    case Pipeline::product:
    case Pipeline::coefficients:
    case Pipeline::sde:
      describe_blocks(cfg, s);
      break;
    case Pipeline::strip_spectrum:
    case Pipeline::sde_spectrum:
    case Pipeline::goe_compare:
      describe_channels(cfg, s);
      break;
    case Pipeline::flag:
      describe_flag(cfg, s);
      break;
    case Pipeline::band_edge:
      describe_band_edge(cfg, s);
      break;
  }
  return s;
}

std::string RunManifest::serialize() const {
  nlohmann::ordered_json j;
  j["pipeline"] = pipeline;
  j["version"] = version;
  j["wall_seconds"] = wall_seconds;
  j["partial_failure"] = partial_failure;
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config_echo) j["config"][k] = v;
  j["outputs"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : outputs) j["outputs"][k] = v;
  j["replicas"] = nlohmann::ordered_json::array();
  for (const auto& r : replicas) {
    nlohmann::ordered_json e;
    e["index"] = r.index;
    e["seed"] = r.seed;
    e["ok"] = r.ok;
    if (!r.ok) e["error"] = r.error;
    j["replicas"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

RunManifest run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  RunManifest man;
  man.pipeline = pipeline_name(cfg.pipeline);
  man.version = kVersion;
  man.config_echo = cfg.echo;

  std::map<std::string, std::string> files;
  switch (cfg.pipeline) {
    case Pipeline::product:
      run_product_pipeline(cfg, man, files);
      break;
    case Pipeline::coefficients:
      run_coefficients_pipeline(cfg, man, files);
      break;
    case Pipeline::sde:
      run_sde_pipeline(cfg, man, files);
      break;
    case Pipeline::strip_spectrum:
      run_strip_spectrum_pipeline(cfg, man, files);
      break;
    case Pipeline::sde_spectrum:
      run_sde_spectrum_pipeline(cfg, man, files);
      break;
    case Pipeline::goe_compare:
      run_goe_compare_pipeline(cfg, man, files);
      break;
    case Pipeline::flag:
      run_flag_pipeline(cfg, man, files);
      break;
    case Pipeline::band_edge:
      run_band_edge_pipeline(cfg, man, files);
      break;
  }

  for (const auto& st : man.replicas)
    if (!st.ok) man.partial_failure = true;

  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  for (const auto& [name, bytes] : files) {
    write_file((fs::path(cfg.output_dir) / name).string(), bytes);
    man.outputs[name] = hex64(fnv1a64(bytes));
  }

  const auto t1 = std::chrono::steady_clock::now();
  man.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  write_file((fs::path(cfg.output_dir) / "manifest.json").string(),
             man.serialize());
  return man;
}

}  // namespace rmprod
