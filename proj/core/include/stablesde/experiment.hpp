#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stablesde/limit_tests.hpp"
#include "stablesde/sde_engine.hpp"

namespace stablesde {

/// Fully validated experiment description, parsed from a JSON config file.
/// canonical_json is the sorted-key re-serialization the config hash and the
/// artifact echo are computed from.
struct ExperimentConfig {
  double alpha = 1.5;
  int dim = 1;

  DriftModel drift = DriftModel::power(0.0);
  std::string h_name = "sin";  ///< sin | identity

  double dt = 1e-2;
  double horizon = 200.0;
  double burn_in = -1.0;
  int n_replicas = 500;
  std::uint64_t root_seed = 1;
  Scheme scheme = Scheme::tamed_euler;  ///< sim.scheme: tamed | semi-implicit

  std::vector<std::string> analyses;  ///< subset of the run_experiment stages
  std::string output_dir = "out";

  // invariant-measure sampling
  int inv_stride = 10;
  int inv_chains = 4;

  // Poisson equation / variance
  double poisson_truncation = 20.0;
  int poisson_paths = 600;
  double grid_min = -10.0;
  double grid_max = 10.0;
  int grid_points = 201;
  double batch_horizon = 2000.0;
  int n_batches = 40;

  // limit tests
  double test_t = 200.0;
  int test_replicas = 2000;

  // exponent scan / phase diagram
  std::vector<double> scan_t_grid{64.0, 128.0, 256.0, 512.0};
  int scan_replicas = 400;
  std::vector<double> theta_list;  ///< phase diagram; empty = defaults

  std::string canonical_json;

  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse_string(const std::string& text);

  /// FNV-1a of canonical_json; embedded in every artifact.
  std::uint64_t hash() const;

  TestFunction test_function() const;
};

struct PhaseCell {
  std::string h_kind;  ///< bounded | lipschitz
  double theta = 0.0;
  LimitVerdict verdict;
  double gamma_hat = 0.0;
  double gamma_stderr = 0.0;
  std::string label;  ///< normal-clt | no-normal-clt | exploratory
};

struct PhaseDiagramReport {
  std::vector<PhaseCell> rows;
  std::uint64_t root_seed = 0;
  std::uint64_t config_hash = 0;

  std::string to_json() const;  ///< sorted keys, byte-stable
};

/// Runs the configured analyses in dependency order
/// (invariant -> poisson -> variance -> limit tests), writing CSV/JSON
/// artifacts plus a plain-text summary under out_dir. Returns 0 on success.
/// Refuses to overwrite artifacts from a different config hash unless force.
int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                   int threads, bool force);

/// Scan plus matching distribution test for every (h kind, theta) cell of the
/// bounded/Lipschitz x theta grid; the 0 < theta <= 1 - alpha/2 Lipschitz
/// cell is reported as exploratory with a hard-coded inconclusive verdict.
PhaseDiagramReport phase_diagram(const ExperimentConfig& cfg, int threads);

}  // namespace stablesde
