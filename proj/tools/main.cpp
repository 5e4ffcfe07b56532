#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stablesde/experiment.hpp"
#include "stablesde/levy_noise.hpp"
#include "stablesde/rng.hpp"
#include "stablesde/sde_engine.hpp"

namespace fs = std::filesystem;
using namespace stablesde;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  bool force = false;
};

void attach_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "experiment config (JSON)");
  if (config_required) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out_dir, "output directory (overrides the config)");
  cmd->add_option("--threads", opts.threads, "worker threads (0 = auto)");
  cmd->add_flag("--force", opts.force, "overwrite artifacts from a different config");
}

std::string hash_hex(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << std::hex << cfg.hash();
  return os.str();
}

int run_stages(const CommonOpts& opts, const std::vector<std::string>& stages) {
  ExperimentConfig cfg = ExperimentConfig::parse_file(opts.config_path);
  if (!stages.empty()) cfg.analyses = stages;
  return run_experiment(cfg, opts.out_dir, opts.threads, opts.force);
}

std::ofstream open_csv(const CommonOpts& opts, const ExperimentConfig& cfg,
                       const std::string& name) {
  fs::path out = opts.out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(opts.out_dir);
  fs::create_directories(out);
  fs::path file = out / name;
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file.string());
  os << "# config_hash " << hash_hex(cfg) << "\n";
  return os;
}

int cmd_sample_noise(const CommonOpts& opts, int n_draws) {
  ExperimentConfig cfg = ExperimentConfig::parse_file(opts.config_path);
  StableNoise noise(cfg.alpha, cfg.dim);
  RngStream rng(cfg.root_seed, 10);
  auto os = open_csv(opts, cfg, "noise.csv");
  os << "draw";
  for (int j = 0; j < cfg.dim; ++j) os << ",z" << (j + 1);
  os << "\n";
  int n = n_draws > 0 ? n_draws : cfg.n_replicas;
  std::vector<double> z(cfg.dim);
  for (int i = 0; i < n; ++i) {
    sample_stable_increment_into(noise, cfg.dt, rng, z.data());
    os << i;
    for (double v : z) os << "," << v;
    os << "\n";
  }
  return 0;
}

int cmd_simulate(const CommonOpts& opts) {
  ExperimentConfig cfg = ExperimentConfig::parse_file(opts.config_path);
  StableNoise noise(cfg.alpha, cfg.dim);
  SimConfig sim;
  sim.x0.assign(cfg.dim, 0.0);
  sim.dt = cfg.dt;
  sim.horizon = cfg.horizon;
  sim.burn_in = 0.0;
  RngStream rng(cfg.root_seed, 20);
  auto os = open_csv(opts, cfg, "path.csv");
  os << "t";
  for (int j = 0; j < cfg.dim; ++j) os << ",x" << (j + 1);
  os << "\n";
  integrate_path(cfg.drift, noise, sim, rng, [&](double t, const double* x, int dim) {
    os << t;
    for (int j = 0; j < dim; ++j) os << "," << x[j];
    os << "\n";
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stable-noise SDE simulation laboratory"};
  app.require_subcommand(1);

  CommonOpts opts;
  int n_draws = 0;
  std::string target = "gaussian";

  auto* sample_noise = app.add_subcommand("sample-noise", "draw raw noise increments");
  attach_common(sample_noise, opts);
  sample_noise->add_option("--draws", n_draws, "number of increments (default sim.n_replicas)");

  auto* simulate = app.add_subcommand("simulate", "integrate and dump one path");
  attach_common(simulate, opts);

  auto* invariant = app.add_subcommand("invariant", "sample the invariant measure");
  attach_common(invariant, opts);

  auto* poisson = app.add_subcommand("poisson", "tabulate the Poisson-equation solution");
  attach_common(poisson, opts);

  auto* variance = app.add_subcommand("variance", "asymptotic variance, both estimators");
  attach_common(variance, opts);

  auto* limit_test = app.add_subcommand("limit-test", "scaled-statistic distribution test");
  attach_common(limit_test, opts);
  limit_test->add_option("--target", target, "gaussian | stable | both")
      ->check(CLI::IsMember({"gaussian", "stable", "both"}));

  auto* scan = app.add_subcommand("scan", "scaling-exponent estimate from IQR growth");
  attach_common(scan, opts);

  auto* phase = app.add_subcommand("phase-diagram", "full (h-kind x theta) verdict table");
  attach_common(phase, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sample_noise->parsed()) return cmd_sample_noise(opts, n_draws);
    if (simulate->parsed()) return cmd_simulate(opts);
    if (invariant->parsed()) return run_stages(opts, {"invariant"});
    if (poisson->parsed()) return run_stages(opts, {"poisson"});
    if (variance->parsed()) return run_stages(opts, {"variance"});
    if (limit_test->parsed()) {
      if (target == "gaussian") return run_stages(opts, {"clt"});
      if (target == "stable") return run_stages(opts, {"stable"});
      return run_stages(opts, {"clt", "stable"});
    }
    if (scan->parsed()) return run_stages(opts, {"scan"});
    if (phase->parsed()) return run_stages(opts, {"phase-diagram"});
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
