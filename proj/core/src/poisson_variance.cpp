#include "stablesde/poisson_variance.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stablesde/errors.hpp"
#include "stablesde/parallel.hpp"
#include "stablesde/stats.hpp"

namespace stablesde {

namespace {

// Inverse CDF of the density proportional to z^{-1-alpha} on (1, R].
double sample_large_jump(double u, double alpha, double radius) {
  double tail = 1.0 - std::pow(radius, -alpha);
  return std::pow(1.0 - u * tail, -1.0 / alpha);
}

// Total jump mass on 1 < |z| <= R (both signs).
double large_jump_mass(double alpha, double radius) {
  return 2.0 * (1.0 - std::pow(radius, -alpha)) / alpha;
}

double drift_step(const DriftModel& model, Scheme scheme, double x, double dt,
                  double dz) {
  if (scheme == Scheme::semi_implicit) {
    double y = x + dz;
    if (y == 0.0) return 0.0;
    double r = semi_implicit_radius(std::abs(y), dt, model.theta);
    return y < 0.0 ? -r : r;
  }
  double b = x == 0.0 ? 0.0
                      : (model.theta == 0.0 ? -x : -x * std::pow(std::abs(x), model.theta));
  if (model.kind == DriftKind::custom) model.evaluator(&x, &b, 1);
  return x + dt * b / (1.0 + dt * std::abs(b)) + dz;
}

}  // namespace

double PoissonSolution::eval(double x) const {
  const auto n = grid.size();
  if (n == 0) throw std::invalid_argument("PoissonSolution: empty grid");
  if (n == 1) return values[0];
  std::size_t hi;
  if (x <= grid.front())
    hi = 1;
  else if (x >= grid.back())
    hi = n - 1;
  else
    hi = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), x) -
                                  grid.begin());
  std::size_t lo = hi - 1;
  double w = (x - grid[lo]) / (grid[hi] - grid[lo]);
  return values[lo] * (1.0 - w) + values[hi] * w;
}

void PoissonSolution::write_csv(std::ostream& os) const {
  os << "x,f_h,stderr\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    os << grid[i] << "," << values[i] << "," << stderrs[i] << "\n";
}

PoissonSolution poisson_solve_mc(const DriftModel& model, const StableNoise& noise,
                                 const TestFunction& h,
                                 const std::vector<double>& grid,
                                 const PoissonConfig& cfg, const RngStream& base) {
  if (noise.dim != 1)
    throw std::domain_error("poisson_solve_mc: 1-d grids only");
  if (grid.size() < 2 || !std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("poisson_solve_mc: grid must be increasing");
  if (!(cfg.dt > 0.0 && cfg.truncation_horizon > cfg.dt))
    throw std::invalid_argument("poisson_solve_mc: bad time configuration");
  if (cfg.scheme == Scheme::semi_implicit && model.kind != DriftKind::power)
    throw std::domain_error("poisson_solve_mc: semi_implicit needs the power drift");

  const std::size_t n_grid = grid.size();
  const int n_pairs = std::max(1, cfg.n_paths / 2);
  const auto n_steps = static_cast<long>(std::ceil(cfg.truncation_horizon / cfg.dt - 1e-12));
  const long cp_stride = std::max<long>(1, std::lround(cfg.checkpoint_dt / cfg.dt));

  std::vector<long> cp_steps;
  for (long k = cp_stride; k < n_steps; k += cp_stride) cp_steps.push_back(k);
  cp_steps.push_back(n_steps);
  const std::size_t n_cp = cp_steps.size();

  // pair-mean accumulators, fixed reduction order over pairs
  std::vector<double> sum_int(n_grid * n_cp, 0.0), sum_int2(n_grid * n_cp, 0.0);
  std::vector<double> sum_igr(n_grid * n_cp, 0.0), sum_igr2(n_grid * n_cp, 0.0);

  const int chunk = 32;
  std::vector<std::vector<double>> chunk_int(chunk), chunk_igr(chunk);
  std::vector<double> increments(n_steps);

  for (int p0 = 0; p0 < n_pairs; p0 += chunk) {
    const int nc = std::min(chunk, n_pairs - p0);
    std::exception_ptr failure = nullptr;
    parallel_for(nc, cfg.threads, [&](std::size_t ci) {
      try {
        RngStream rng = base.substream(p0 + ci);
        std::vector<double> dz(n_steps);
        for (long k = 0; k < n_steps; ++k)
          sample_stable_increment_into(noise, cfg.dt, rng, &dz[k]);

        auto& pint = chunk_int[ci];
        auto& pigr = chunk_igr[ci];
        pint.assign(n_grid * n_cp, 0.0);
        pigr.assign(n_grid * n_cp, 0.0);
        for (double sign : {1.0, -1.0}) {
          for (std::size_t g = 0; g < n_grid; ++g) {
            double x = grid[g];
            double prev = h(x) - cfg.mu_estimate;
            double integral = 0.0;
            std::size_t c = 0;
            for (long k = 0; k < n_steps; ++k) {
              x = drift_step(model, cfg.scheme, x, cfg.dt, sign * dz[k]);
              if (!std::isfinite(x))
                throw BlowUpError("poisson_solve_mc: path blew up");
              double cur = h(x) - cfg.mu_estimate;
              integral += 0.5 * cfg.dt * (prev + cur);
              prev = cur;
              if (c < n_cp && k + 1 == cp_steps[c]) {
                pint[g * n_cp + c] += 0.5 * integral;
                pigr[g * n_cp + c] += 0.5 * cur;
                ++c;
              }
            }
          }
        }
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    });
    if (failure) std::rethrow_exception(failure);
    for (int ci = 0; ci < nc; ++ci) {
      for (std::size_t i = 0; i < n_grid * n_cp; ++i) {
        sum_int[i] += chunk_int[ci][i];
        sum_int2[i] += chunk_int[ci][i] * chunk_int[ci][i];
        sum_igr[i] += chunk_igr[ci][i];
        sum_igr2[i] += chunk_igr[ci][i] * chunk_igr[ci][i];
      }
    }
  }
  (void)increments;

  const double np = static_cast<double>(n_pairs);
  auto se_of = [&](const std::vector<double>& s, const std::vector<double>& s2,
                   std::size_t i) {
    if (n_pairs < 2) return 0.0;
    double m = s[i] / np;
    double var = std::max(0.0, (s2[i] - np * m * m) / (np - 1.0));
    return std::sqrt(var / np);
  };

  // negligibility floor: the exponential tail can undershoot any Monte Carlo
  // error long before the checkpoint test fires
  double h_scale = 1e-300;
  for (double x : grid) h_scale = std::max(h_scale, std::abs(h(x) - cfg.mu_estimate));
  const double floor_tol = 1e-7 * h_scale;

  std::size_t chosen = n_cp - 1;
  int streak = 0;
  bool found = false;
  for (std::size_t c = 0; c < n_cp && !found; ++c) {
    bool quiet = true;
    for (std::size_t g = 0; g < n_grid; ++g) {
      std::size_t i = g * n_cp + c;
      double m = std::abs(sum_igr[i] / np);
      if (m > std::max(2.0 * se_of(sum_igr, sum_igr2, i), floor_tol)) {
        quiet = false;
        break;
      }
    }
    streak = quiet ? streak + 1 : 0;
    if (streak >= 5) {
      chosen = c;
      found = true;
    }
  }

  PoissonSolution sol;
  sol.grid = grid;
  sol.values.resize(n_grid);
  sol.stderrs.resize(n_grid);
  sol.truncation_horizon = static_cast<double>(cp_steps[chosen]) * cfg.dt;
  sol.n_paths = 2 * n_pairs;
  sol.mu_h = cfg.mu_estimate;
  for (std::size_t g = 0; g < n_grid; ++g) {
    std::size_t i = g * n_cp + chosen;
    sol.values[g] = -sum_int[i] / np;
    sol.stderrs[g] = se_of(sum_int, sum_int2, i);
    double m = std::abs(sum_igr[i] / np);
    if (m > 10.0 * std::max(se_of(sum_igr, sum_igr2, i), floor_tol))
      sol.truncation_warning = true;
  }
  return sol;
}

namespace {

struct GeneratorParts {
  double drift;
  double small_and_mid;  // eps-surrogate plus quadrature to |z| = 1
  double large;
};

GeneratorParts generator_parts(const DriftModel& model, const StableNoise& noise,
                               const std::function<double(double)>& f, double x,
                               const QuadratureConfig& quad, double eps) {
  const double alpha = noise.alpha;
  const double fd = 1e-4;
  const double fp = (f(x + fd) - f(x - fd)) / (2.0 * fd);
  const double fpp = (f(x + fd) - 2.0 * f(x) + f(x - fd)) / (fd * fd);
  const double fx = f(x);

  double b = 0.0;
  drift_eval(model, &x, &b, 1);

  // |z| <= eps: second-order Taylor surrogate, integrated in closed form
  double small = fpp * std::pow(eps, 2.0 - alpha) / (2.0 - alpha);

  auto integrand = [&](double z) {
    double plus = f(x + z) - fx - z * fp;
    double minus = f(x - z) - fx + z * fp;
    return (plus + minus) * std::pow(z, -1.0 - alpha);
  };
  double err = 0.0;
  double mid = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      integrand, eps, 1.0, 15, 1e-9, &err);

  // 1 < |z| <= R: importance sampling from the normalized jump density,
  // antithetic in sign; compensator absent by the 1_(0,1) convention
  RngStream jump_rng(quad.seed, 0);
  double acc = 0.0;
  for (int j = 0; j < quad.n_jump_samples; ++j) {
    double z = sample_large_jump(jump_rng.uniform01(), alpha, quad.outer_radius);
    acc += 0.5 * (f(x + z) + f(x - z) - 2.0 * fx);
  }
  double large = large_jump_mass(alpha, quad.outer_radius) * acc /
                 static_cast<double>(quad.n_jump_samples);

  return {b * fp, small + mid, large};
}

}  // namespace

double apply_generator(const DriftModel& model, const StableNoise& noise,
                       const std::function<double(double)>& f, double x,
                       const QuadratureConfig& quad) {
  quad.validate();
  if (noise.dim != 1) throw std::domain_error("apply_generator: d=1 only");

  auto parts = generator_parts(model, noise, f, x, quad, quad.inner_cutoff);
  auto refined = generator_parts(model, noise, f, x, quad, quad.inner_cutoff / 2.0);
  double v = parts.drift + noise.levy_constant * (parts.small_and_mid + parts.large);
  double vr = refined.drift + noise.levy_constant * (refined.small_and_mid + refined.large);
  if (std::abs(v - vr) > quad.refine_tol * (1.0 + std::abs(v)))
    throw QuadratureError("apply_generator: eps refinement unstable");
  return vr;
}

VarianceEstimate variance_formula(const PoissonSolution& fh,
                                  const EmpiricalMeasure& mu,
                                  const StableNoise& noise,
                                  const QuadratureConfig& quad) {
  quad.validate();
  if (noise.dim != 1 || mu.dim != 1)
    throw std::domain_error("variance_formula: d=1 only");
  if (mu.size() == 0) throw std::invalid_argument("variance_formula: empty measure");

  std::size_t inside = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double x = mu.point(i)[0];
    if (x >= fh.grid.front() && x <= fh.grid.back()) ++inside;
  }
  if (static_cast<double>(inside) < 0.975 * static_cast<double>(mu.size()))
    throw std::domain_error(
        "variance_formula: grid covers less than 97.5% of the measure");

  const double alpha = noise.alpha;
  const double eps = quad.inner_cutoff;
  const double delta = (fh.grid.back() - fh.grid.front()) /
                       static_cast<double>(fh.grid.size() - 1);

  // one fixed set of importance draws, shared across outer points and reused
  // for both radii so the R -> 2R comparison is noise-free
  RngStream jump_rng(quad.seed, 1);
  std::vector<double> u(quad.n_jump_samples);
  for (auto& v : u) v = jump_rng.uniform01();

  auto inner = [&](double x, double radius) {
    double fx = fh.eval(x);
    double fp = (fh.eval(x + delta) - fh.eval(x - delta)) / (2.0 * delta);
    double small = fp * fp * 2.0 * std::pow(eps, 2.0 - alpha) / (2.0 - alpha);
    auto integrand = [&](double z) {
      double dplus = fh.eval(x + z) - fx;
      double dminus = fh.eval(x - z) - fx;
      return (dplus * dplus + dminus * dminus) * std::pow(z, -1.0 - alpha);
    };
    double err = 0.0;
    double mid = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        integrand, eps, 1.0, 15, 1e-9, &err);
    double acc = 0.0;
    for (double ui : u) {
      double z = sample_large_jump(ui, alpha, radius);
      double dplus = fh.eval(x + z) - fx;
      double dminus = fh.eval(x - z) - fx;
      acc += 0.5 * (dplus * dplus + dminus * dminus);
    }
    double large = large_jump_mass(alpha, radius) * acc /
                   static_cast<double>(quad.n_jump_samples);
    return noise.levy_constant * (small + mid + large);
  };

  // even stride over the measure keeps the outer average affordable; the
  // inner integral dominates the cost per point
  const std::size_t max_outer = 2000;
  const std::size_t stride = mu.size() > max_outer ? mu.size() / max_outer : 1;
  std::vector<double> at_r, at_2r;
  for (std::size_t i = 0; i < mu.size(); i += stride) {
    double x = mu.point(i)[0];
    at_r.push_back(inner(x, quad.outer_radius));
    at_2r.push_back(inner(x, 2.0 * quad.outer_radius));
  }

  VarianceEstimate est;
  est.method = VarianceMethod::formula;
  est.truncation_radius = quad.outer_radius;
  double v_r = mean(at_r);
  double v_2r = mean(at_2r);
  est.value = v_2r;
  est.stderr_ = at_2r.size() > 1 ? standard_error(at_2r) : 0.0;
  est.growth_exponent = v_r > 0.0 ? std::log2(v_2r / v_r) : 0.0;
  est.diverged = v_r > 0.0 && (v_2r - v_r) / v_r > 0.25;
  return est;
}

VarianceEstimate variance_batch_means(const DriftModel& model,
                                      const StableNoise& noise,
                                      const TestFunction& h,
                                      const BatchMeansConfig& cfg, RngStream& rng) {
  if (cfg.n_batches < 20)
    throw std::invalid_argument("variance_batch_means: n_batches >= 20");

  SimConfig sim;
  sim.x0 = cfg.x0.empty() ? std::vector<double>(noise.dim, 0.0) : cfg.x0;
  sim.dt = cfg.dt;
  sim.horizon = cfg.horizon;
  sim.burn_in = cfg.burn_in;
  sim.scheme = cfg.scheme;
  const double burn = sim.effective_burn_in();

  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>((cfg.horizon - burn) / cfg.dt) + 1);
  integrate_path(model, noise, sim, rng, [&](double t, const double* x, int dim) {
    if (t > burn) samples.push_back(h(x, dim));
  });

  const std::size_t block = samples.size() / cfg.n_batches;
  if (block < 2) throw std::invalid_argument("variance_batch_means: horizon too short");
  const double block_time = static_cast<double>(block) * cfg.dt;

  std::vector<double> block_means(cfg.n_batches);
  for (int b = 0; b < cfg.n_batches; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < block; ++k) s += samples[b * block + k];
    block_means[b] = s / static_cast<double>(block);
  }

  VarianceEstimate est;
  est.method = VarianceMethod::batch_means;
  est.value = block_time * sample_variance(block_means);

  // jackknife over blocks
  const int nb = cfg.n_batches;
  std::vector<double> loo(nb);
  for (int i = 0; i < nb; ++i) {
    std::vector<double> rest;
    rest.reserve(nb - 1);
    for (int b = 0; b < nb; ++b)
      if (b != i) rest.push_back(block_means[b]);
    loo[i] = block_time * sample_variance(rest);
  }
  double lm = mean(loo);
  double ss = 0.0;
  for (double v : loo) ss += (v - lm) * (v - lm);
  est.stderr_ = std::sqrt(ss * static_cast<double>(nb - 1) / static_cast<double>(nb));
  return est;
}

}  // namespace stablesde
