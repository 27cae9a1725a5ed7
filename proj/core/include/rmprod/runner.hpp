#pragma once

#include <map>
#include <string>
#include <vector>

#include "rmprod/config.hpp"
#include "rmprod/rng.hpp"

namespace rmprod {

struct ReplicaStatus {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
};

struct RunManifest {
  std::string pipeline;
  std::string version;
  double wall_seconds = 0.0;
  std::map<std::string, std::string> config_echo;
  std::vector<ReplicaStatus> replicas;
  std::map<std::string, std::string> outputs;  // file name -> fnv1a-64 hex
  bool partial_failure = false;

  std::string serialize() const;  // JSON text
};

// per-replica seed: XOR-fold of the master seed and the replica index
// through the 64-bit mixer, so replica streams never depend on scheduling
inline std::uint64_t replica_seed(std::uint64_t master, int index) {
  return mix64(master ^ static_cast<std::uint64_t>(index));
}

// resolved-model report (channel table, block radii, flag rates...) without
// running any simulation
std::string describe_report(const ExperimentConfig& cfg);

// Executes the configured pipeline: fans replicas out to a worker pool
// (derived seeds, shared-nothing), then writes bulk CSV, a structured text
// summary, and manifest.json under cfg.output_dir.  Replica errors are
// recorded in the manifest without aborting the batch.
RunManifest run_experiment(const ExperimentConfig& cfg);

}  // namespace rmprod
