#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "stablesde/experiment.hpp"

using namespace stablesde;
namespace fs = std::filesystem;

namespace {

std::string minimal_config(const std::string& extra = "") {
  return R"({
    "alpha": 1.5,
    "drift": {"kind": "power", "theta": 0.0},
    "test_function": {"name": "sin"},
    "sim": {"dt": 0.02, "horizon": 10, "root_seed": 5})" +
         extra + "\n}";
}

std::string slurp(const fs::path& p) {
  std::ostringstream os;
  os << std::ifstream(p).rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing fills defaults and validates") {
  auto cfg = ExperimentConfig::parse_string(minimal_config());
  CHECK(cfg.alpha == 1.5);
  CHECK(cfg.root_seed == 5);
  CHECK(cfg.h_name == "sin");
  CHECK(cfg.drift.theta == 0.0);
  CHECK_FALSE(cfg.canonical_json.empty());
}

TEST_CASE("validation errors name the offending field") {
  std::string bad = R"({"alpha": 2.5, "sim": {"root_seed": 1}})";
  try {
    ExperimentConfig::parse_string(bad);
    FAIL("expected a validation error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }

  std::string no_seed = R"({"alpha": 1.5, "sim": {"dt": 0.01, "horizon": 10}})";
  try {
    ExperimentConfig::parse_string(no_seed);
    FAIL("expected a validation error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("root_seed") != std::string::npos);
  }

  CHECK_THROWS(ExperimentConfig::parse_string("{not json"));
  CHECK_THROWS(ExperimentConfig::parse_string(
      R"({"alpha":1.5,"test_function":{"name":"cube"},"sim":{"root_seed":1}})"));
}

TEST_CASE("config hash is stable and sensitive") {
  auto a = ExperimentConfig::parse_string(minimal_config());
  auto b = ExperimentConfig::parse_string(minimal_config());
  CHECK(a.hash() == b.hash());
  auto c = ExperimentConfig::parse_string(
      R"({"alpha": 1.5, "sim": {"dt": 0.02, "horizon": 10, "root_seed": 6}})");
  CHECK(a.hash() != c.hash());
}

TEST_CASE("invariant stage writes artifacts and exits cleanly") {
  TempDir dir("stablesde_test_inv");
  auto cfg = ExperimentConfig::parse_string(
      minimal_config(R"(, "analysis": {"which": ["invariant"]},
                        "invariant": {"chains": 2})"));
  CHECK(run_experiment(cfg, dir.path.string(), 1, false) == 0);
  CHECK(fs::exists(dir.path / "invariant.csv"));
  CHECK(fs::exists(dir.path / "config_echo.json"));
  CHECK(fs::exists(dir.path / "summary.txt"));
  CHECK(slurp(dir.path / "invariant.csv").rfind("# config_hash ", 0) == 0);
}

TEST_CASE("hash-mismatched outputs are protected unless forced") {
  TempDir dir("stablesde_test_force");
  auto cfg = ExperimentConfig::parse_string(
      minimal_config(R"(, "analysis": {"which": ["invariant"]},
                        "invariant": {"chains": 1})"));
  REQUIRE(run_experiment(cfg, dir.path.string(), 1, false) == 0);
  // same config again: fine without force
  CHECK(run_experiment(cfg, dir.path.string(), 1, false) == 0);

  auto other = ExperimentConfig::parse_string(
      R"({"alpha": 1.5, "sim": {"dt": 0.02, "horizon": 10, "root_seed": 99},
          "analysis": {"which": ["invariant"]}, "invariant": {"chains": 1}})");
  CHECK_THROWS(run_experiment(other, dir.path.string(), 1, false));
  CHECK(run_experiment(other, dir.path.string(), 1, true) == 0);
}

TEST_CASE("verdict artifacts are byte-identical across reruns") {
  TempDir d1("stablesde_test_det1"), d2("stablesde_test_det2");
  auto cfg = ExperimentConfig::parse_string(
      minimal_config(R"(, "analysis": {"which": ["clt"]},
                        "limit": {"t": 5, "replicas": 120},
                        "variance": {"batch_horizon": 60, "n_batches": 20})"));
  REQUIRE(run_experiment(cfg, d1.path.string(), 1, false) == 0);
  REQUIRE(run_experiment(cfg, d2.path.string(), 2, false) == 0);
  CHECK(slurp(d1.path / "clt_verdict.json") == slurp(d2.path / "clt_verdict.json"));
  CHECK(slurp(d1.path / "clt_sample.csv") == slurp(d2.path / "clt_sample.csv"));
}

TEST_CASE("phase diagram covers both observable kinds across the theta list") {
  auto cfg = ExperimentConfig::parse_string(
      minimal_config(R"(, "scan": {"t_grid": [2, 4, 8, 16], "replicas": 100},
                        "limit": {"t": 5, "replicas": 100},
                        "variance": {"batch_horizon": 60, "n_batches": 20})"));
  auto report = phase_diagram(cfg, 1);
  REQUIRE(report.rows.size() == 6);
  int bounded = 0, lipschitz = 0, exploratory = 0;
  for (const auto& row : report.rows) {
    if (row.h_kind == "bounded") ++bounded;
    if (row.h_kind == "lipschitz") ++lipschitz;
    if (row.label == "exploratory") {
      ++exploratory;
      CHECK(row.verdict.decision == Decision::inconclusive);
    }
  }
  CHECK(bounded == 3);
  CHECK(lipschitz == 3);
  CHECK(exploratory == 1);
  std::string json = report.to_json();
  CHECK(json.find("\"rows\"") != std::string::npos);
  CHECK(json.find("config_hash") != std::string::npos);
}
