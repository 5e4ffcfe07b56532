#include "stablesde/limit_tests.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "stablesde/parallel.hpp"
#include "stablesde/stats.hpp"

namespace stablesde {

void ScaledSample::write_csv(std::ostream& os) const {
  os << "replica,value\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    os << i << "," << values[i] << "\n";
}

const char* to_string(Decision d) {
  switch (d) {
    case Decision::consistent: return "consistent";
    case Decision::rejected: return "rejected";
    default: return "inconclusive";
  }
}

const char* to_string(TargetLaw t) {
  return t == TargetLaw::gaussian ? "gaussian" : "stable";
}

ScaledSample replicate_scaled_statistic(const DriftModel& model,
                                        const StableNoise& noise,
                                        const TestFunction& h, double gamma,
                                        double t, int n_replicas, double center,
                                        const RngStream& base,
                                        const ReplicaConfig& cfg) {
  if (!(t > 0.0))
    throw std::invalid_argument("replicate_scaled_statistic: t > 0 required");
  if (n_replicas < 100)
    throw std::invalid_argument("replicate_scaled_statistic: n_replicas >= 100");

  ScaledSample sample;
  sample.gamma = gamma;
  sample.t = t;
  sample.center = center;
  sample.values.resize(n_replicas);

  const double scale = std::pow(t, -gamma);
  std::exception_ptr failure = nullptr;
  parallel_for(n_replicas, cfg.threads, [&](std::size_t r) {
    try {
      SimConfig sim;
      sim.x0 = cfg.x0.empty() ? std::vector<double>(noise.dim, 0.0) : cfg.x0;
      sim.dt = cfg.dt;
      sim.horizon = t;
      sim.burn_in = 0.0;
      sim.scheme = cfg.scheme;
      RngStream rng = base.substream(r);
      double integral = 0.0;
      integrate_path(model, noise, sim, rng,
                     [&](double, const double* x, int dim) {
                       integral += cfg.dt * (h(x, dim) - center);
                     });
      sample.values[r] = scale * integral;
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);
  return sample;
}

namespace {

void require_sample(const ScaledSample& sample) {
  if (sample.values.size() < 100)
    throw std::invalid_argument("limit test: sample size >= 100 required");
}

}  // namespace

LimitVerdict ks_gaussian_test(const ScaledSample& sample, double variance) {
  require_sample(sample);
  if (!(variance > 0.0))
    throw std::domain_error("ks_gaussian_test: variance must be positive");

  const double sigma = std::sqrt(variance);
  LimitVerdict v;
  v.target = TargetLaw::gaussian;
  v.target_variance = variance;
  v.test_name = "ks_gaussian";
  v.statistic = ks_statistic(sample.values, [sigma](double x) {
    return normal_cdf(x, 0.0, sigma);
  });
  v.threshold = 1.628 / std::sqrt(static_cast<double>(sample.values.size()));
  v.decision = v.statistic < v.threshold ? Decision::consistent : Decision::rejected;
  return v;
}

LimitVerdict ks_stable_test(const ScaledSample& sample, double alpha,
                            double scale) {
  require_sample(sample);
  if (!(scale > 0.0))
    throw std::domain_error("ks_stable_test: scale must be positive");

  LimitVerdict v;
  v.target = TargetLaw::stable;
  v.target_alpha = alpha;
  v.target_scale = scale;
  v.test_name = "ks_stable";
  v.statistic = ks_statistic(sample.values, [alpha, scale](double x) {
    return stable_cdf_1d(alpha, x / scale);
  });
  v.threshold = 1.628 / std::sqrt(static_cast<double>(sample.values.size()));
  v.decision = v.statistic < v.threshold ? Decision::consistent : Decision::rejected;
  return v;
}

LimitVerdict cf_distance_test(const ScaledSample& sample,
                              const std::function<double(double)>& target_cf,
                              const std::vector<double>& xi_grid) {
  require_sample(sample);
  if (xi_grid.empty())
    throw std::invalid_argument("cf_distance_test: xi_grid must be non-empty");

  double worst = 0.0;
  for (double xi : xi_grid) {
    // the limits are symmetric laws: real part carries the whole CF
    double emp = empirical_cf(sample.values, xi).real();
    worst = std::max(worst, std::abs(emp - target_cf(xi)));
  }

  const double unit = std::sqrt(2.0 / static_cast<double>(sample.values.size()));
  LimitVerdict v;
  v.test_name = "cf_distance";
  v.statistic = worst;
  v.threshold = 3.0 * unit;
  if (worst < 3.0 * unit)
    v.decision = Decision::consistent;
  else if (worst > 6.0 * unit)
    v.decision = Decision::rejected;
  else
    v.decision = Decision::inconclusive;
  return v;
}

ScanResult scaling_exponent_scan(const DriftModel& model, const StableNoise& noise,
                                 const TestFunction& h,
                                 const std::vector<double>& t_grid, int n_replicas,
                                 double center, const RngStream& base,
                                 const ReplicaConfig& cfg) {
  if (t_grid.size() < 4 || !std::is_sorted(t_grid.begin(), t_grid.end()) ||
      !(t_grid.front() > 0.0) || t_grid.back() < 8.0 * t_grid.front())
    throw std::invalid_argument(
        "scaling_exponent_scan: need >= 4 ascending horizons spanning 8x");
  if (n_replicas < 4)
    throw std::invalid_argument("scaling_exponent_scan: too few replicas");

  const std::size_t n_t = t_grid.size();
  std::vector<std::vector<double>> integrals(n_t, std::vector<double>(n_replicas));
  std::exception_ptr failure = nullptr;
  parallel_for(n_replicas, cfg.threads, [&](std::size_t r) {
    try {
      SimConfig sim;
      sim.x0 = cfg.x0.empty() ? std::vector<double>(noise.dim, 0.0) : cfg.x0;
      sim.dt = cfg.dt;
      sim.horizon = t_grid.back();
      sim.burn_in = 0.0;
      sim.scheme = cfg.scheme;
      RngStream rng = base.substream(r);
      double integral = 0.0;
      std::size_t ti = 0;
      integrate_path(model, noise, sim, rng,
                     [&](double t, const double* x, int dim) {
                       integral += cfg.dt * (h(x, dim) - center);
                       while (ti < n_t && t >= t_grid[ti] - 1e-12)
                         integrals[ti++][r] = integral;
                     });
      while (ti < n_t) integrals[ti++][r] = integral;
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  ScanResult res;
  res.t_grid = t_grid;
  res.iqr.resize(n_t);
  std::vector<double> log_t(n_t), log_iqr(n_t);
  for (std::size_t i = 0; i < n_t; ++i) {
    res.iqr[i] = interquartile_range(integrals[i]);
    if (!(res.iqr[i] > 0.0))
      throw std::domain_error("scaling_exponent_scan: degenerate spread");
    log_t[i] = std::log(t_grid[i]);
    log_iqr[i] = std::log(res.iqr[i]);
  }
  LineFit fit = fit_line(log_t, log_iqr);
  res.gamma_hat = fit.slope;
  res.stderr_ = fit.slope_stderr;
  return res;
}

}  // namespace stablesde
