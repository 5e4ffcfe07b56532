#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stablesde/sde_engine.hpp"

namespace stablesde {

/// Finite sample set approximating the invariant measure.
struct EmpiricalMeasure {
  std::vector<double> data;  ///< row-major, size() * dim entries
  int dim = 1;
  std::string source;        ///< free-form metadata (model, horizon, stride)

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  const double* point(std::size_t i) const { return data.data() + i * dim; }
  /// Single coordinate as a flat vector (d=1: the whole sample).
  std::vector<double> coordinate(int j) const;

  void write_csv(std::ostream& os) const;  ///< header x1..xd, one row per point
};

struct InvariantConfig {
  double horizon = 200.0;
  double dt = 1e-2;
  double burn_in = -1.0;  ///< negative: 20% of horizon
  int stride = 10;
  int n_chains = 4;
  std::vector<double> x0;  ///< empty: origin
  int threads = 0;
  Scheme scheme = Scheme::tamed_euler;
};

/// Runs n_chains independent paths, discards burn-in, keeps every stride-th
/// state, concatenated in chain order (scheduling independent).
EmpiricalMeasure sample_invariant(const DriftModel& model, const StableNoise& noise,
                                  const InvariantConfig& cfg, const RngStream& base);

/// Exact W1 between two 1-d empirical laws via matched order statistics.
/// Unequal sizes are handled by even subsampling of the longer list.
double wasserstein1_1d(const std::vector<double>& a, const std::vector<double>& b);

struct MomentReport {
  double beta = 1.0;
  std::vector<double> times;
  std::vector<std::vector<double>> start_points;
  std::vector<std::vector<double>> estimates;       ///< [time][start]
  std::vector<std::vector<double>> standard_errors; ///< [time][start]
};

struct MomentProbeConfig {
  double dt = 1e-2;
  int n_replicas = 2000;
  int threads = 0;
  Scheme scheme = Scheme::tamed_euler;
};

/// Monte Carlo estimates of E|X_t^x|^beta for every (t, start) pair.
/// Requires 1 <= beta < alpha; the moment bound fails at beta >= alpha.
MomentReport moment_probe(const DriftModel& model, const StableNoise& noise,
                          double beta, const std::vector<double>& times,
                          const std::vector<std::vector<double>>& starts,
                          const MomentProbeConfig& cfg, const RngStream& base);

}  // namespace stablesde
