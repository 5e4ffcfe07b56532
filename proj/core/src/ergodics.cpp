#include "stablesde/ergodics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stablesde/parallel.hpp"
#include "stablesde/stats.hpp"

namespace stablesde {

std::vector<double> EmpiricalMeasure::coordinate(int j) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = data[i * dim + j];
  return out;
}

void EmpiricalMeasure::write_csv(std::ostream& os) const {
  for (int j = 0; j < dim; ++j) os << (j ? "," : "") << "x" << (j + 1);
  os << "\n";
  for (std::size_t i = 0; i < size(); ++i) {
    const double* p = point(i);
    for (int j = 0; j < dim; ++j) os << (j ? "," : "") << p[j];
    os << "\n";
  }
}

EmpiricalMeasure sample_invariant(const DriftModel& model, const StableNoise& noise,
                                  const InvariantConfig& cfg, const RngStream& base) {
  if (cfg.stride < 1) throw std::invalid_argument("sample_invariant: stride >= 1");
  if (cfg.n_chains < 1) throw std::invalid_argument("sample_invariant: n_chains >= 1");

  SimConfig sim;
  sim.x0 = cfg.x0.empty() ? std::vector<double>(noise.dim, 0.0) : cfg.x0;
  sim.dt = cfg.dt;
  sim.horizon = cfg.horizon;
  sim.burn_in = cfg.burn_in;
  sim.scheme = cfg.scheme;
  sim.validate(noise.dim);
  const double burn = sim.effective_burn_in();

  std::vector<std::vector<double>> per_chain(cfg.n_chains);
  std::exception_ptr failure = nullptr;
  parallel_for(cfg.n_chains, cfg.threads, [&](std::size_t c) {
    try {
      RngStream rng = base.substream(c);
      long k = 0;
      auto& sink = per_chain[c];
      integrate_path(model, noise, sim, rng,
                     [&](double t, const double* x, int dim) {
                       if (t <= burn) return;
                       if (k++ % cfg.stride) return;
                       sink.insert(sink.end(), x, x + dim);
                     });
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  EmpiricalMeasure mu;
  mu.dim = noise.dim;
  for (auto& chunk : per_chain)
    mu.data.insert(mu.data.end(), chunk.begin(), chunk.end());

  std::ostringstream meta;
  meta << "theta=" << model.theta << " alpha=" << noise.alpha
       << " horizon=" << cfg.horizon << " stride=" << cfg.stride
       << " chains=" << cfg.n_chains;
  mu.source = meta.str();
  return mu;
}

double wasserstein1_1d(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("wasserstein1_1d: empty sample");
  std::vector<double> sa(a), sb(b);
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa.size() > sb.size()) sa.swap(sb);
  // even subsample of the longer (sorted) list keeps its quantile structure
  const std::size_t n = sa.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = (sb.size() == n) ? i : (i * (sb.size() - 1)) / (n - 1 ? n - 1 : 1);
    acc += std::abs(sa[i] - sb[j]);
  }
  return acc / static_cast<double>(n);
}

MomentReport moment_probe(const DriftModel& model, const StableNoise& noise,
                          double beta, const std::vector<double>& times,
                          const std::vector<std::vector<double>>& starts,
                          const MomentProbeConfig& cfg, const RngStream& base) {
  if (!(beta >= 1.0 && beta < noise.alpha))
    throw std::domain_error("moment_probe: beta must satisfy 1 <= beta < alpha");
  if (times.empty() || starts.empty())
    throw std::invalid_argument("moment_probe: times and starts must be non-empty");
  if (!std::is_sorted(times.begin(), times.end()))
    throw std::invalid_argument("moment_probe: times must be ascending");

  MomentReport report;
  report.beta = beta;
  report.times = times;
  report.start_points = starts;
  report.estimates.assign(times.size(), std::vector<double>(starts.size(), 0.0));
  report.standard_errors = report.estimates;

  const double t_max = *std::max_element(times.begin(), times.end());
  for (std::size_t s = 0; s < starts.size(); ++s) {
    // one path per replica, |X_t|^beta read off at every requested time
    std::vector<std::vector<double>> values(times.size(),
                                            std::vector<double>(cfg.n_replicas));
    std::exception_ptr failure = nullptr;
    parallel_for(cfg.n_replicas, cfg.threads, [&](std::size_t r) {
      try {
        SimConfig sim;
        sim.x0 = starts[s];
        sim.dt = cfg.dt;
        sim.horizon = t_max;
        sim.burn_in = 0.0;
        sim.scheme = cfg.scheme;
        RngStream rng = base.substream(s * 1000003ULL + r);
        std::size_t ti = 0;
        integrate_path(model, noise, sim, rng,
                       [&](double t, const double* x, int dim) {
                         while (ti < times.size() && t >= times[ti] - 1e-12) {
                           double nrm = 0.0;
                           for (int i = 0; i < dim; ++i) nrm += x[i] * x[i];
                           values[ti][r] = std::pow(std::sqrt(nrm), beta);
                           ++ti;
                         }
                       });
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    });
    if (failure) std::rethrow_exception(failure);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      report.estimates[ti][s] = mean(values[ti]);
      report.standard_errors[ti][s] = standard_error(values[ti]);
    }
  }
  return report;
}

}  // namespace stablesde
