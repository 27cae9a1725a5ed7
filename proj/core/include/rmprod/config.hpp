#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rmprod/types.hpp"

namespace rmprod {

enum class Pipeline {
  product,
  coefficients,
  sde,
  strip_spectrum,
  sde_spectrum,
  goe_compare,
  flag,
  band_edge,
};

std::string pipeline_name(Pipeline p);
Pipeline pipeline_from_name(const std::string& name);

// One experiment, parsed from `key = value` text (one pair per line, `#`
// comments).  Unknown keys are rejected by name; the per-pipeline
// requirements are enforced by validate() before any compute starts.
struct ExperimentConfig {
  Pipeline pipeline = Pipeline::product;

  // strip / lattice model
  int d = 0;
  double E = 0.0;
  double r = 1.0;
  std::string potential = "gaussian";

  // block model
  int d0 = 0, d1 = 0, d2 = 0;
  double gamma0 = 0.5;              // contraction of both hyperbolic blocks
  std::vector<double> phases;       // eigenphases of U, default all zero
  std::string noise = "gaussian";   // entry noise family

  // flag model
  std::vector<double> magnitudes;

  // numeric parameters
  double lambda = -1.0;  // negative means "use sigma / sqrt(n)"
  int n = 0;
  double t_final = 1.0;
  double dt = 1e-3;
  double sigma = 0.0;
  double eps = 0.0;
  double eps_min = 0.0, eps_max = 0.0;
  int eps_points = 0;               // 0 means "derive a default grid"
  double window = 20.0;             // halfwidth, rescaled units
  int mesh = 0;
  int n_samples = 2000;             // reference-sampler draws
  int replicas = 1;
  std::string method = "eigensolve";  // strip-spectrum: eigensolve | banded | detscan
  std::vector<double> z_star_phases;  // boundary unitary diag(e^{i phi_j})
  bool recenter = true;               // goe-compare: shift window by sigma^2 q
  double theta = 0.0, v_var = 1.0;    // band-edge noise parameters

  // orchestration
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output_dir = "out";

  std::map<std::string, std::string> echo;  // raw parsed pairs, for manifests

  // cross-field validation; throws ValidationError naming the offence
  void validate() const;

  double effective_lambda() const;  // lambda, or sigma / sqrt(n) when unset

  CVector z_star(int d_e) const;  // resolved boundary diagonal (default ones)
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace rmprod
