#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "stablesde/ergodics.hpp"
#include "stablesde/quadrature.hpp"
#include "stablesde/sde_engine.hpp"

namespace stablesde {

/// Tabulated Monte Carlo solution of the Poisson equation A f = h - mu(h)
/// on a 1-d grid, from the time-integral representation of the semigroup.
struct PoissonSolution {
  std::vector<double> grid;     ///< strictly increasing
  std::vector<double> values;   ///< f_h at the grid
  std::vector<double> stderrs;  ///< Monte Carlo error per grid point
  double truncation_horizon = 0.0;  ///< T actually used for the time integral
  int n_paths = 0;
  double mu_h = 0.0;            ///< centering constant used
  bool truncation_warning = false;  ///< integrand still > 10x its error at T

  /// Piecewise-linear evaluation, linear extrapolation outside the grid.
  double eval(double x) const;

  void write_csv(std::ostream& os) const;  ///< columns x, f_h, stderr
};

struct PoissonConfig {
  double truncation_horizon = 20.0;  ///< upper cap on the time integral
  double dt = 1e-2;
  int n_paths = 1000;     ///< rounded down to antithetic pairs
  double mu_estimate = 0.0;
  double checkpoint_dt = 0.5;  ///< spacing of the adaptive-truncation checks
  int threads = 0;
  Scheme scheme = Scheme::tamed_euler;
};

/// For each grid point x, -int_0^T (path mean of h(X_t^x) - mu) dt by
/// trapezoidal accumulation. Paths use antithetic increment pairs and share
/// increments across grid points, so the tabulated shape is smooth. T is the
/// first checkpoint where the worst-case integrand magnitude stays below
/// twice its standard error for 5 consecutive checks, capped by the config.
PoissonSolution poisson_solve_mc(const DriftModel& model, const StableNoise& noise,
                                 const TestFunction& h,
                                 const std::vector<double>& grid,
                                 const PoissonConfig& cfg, const RngStream& base);

/// Generator applied to a scalar function at x (d=1): drift term plus the
/// compensated jump integral, split at quad.inner_cutoff (analytic
/// second-order surrogate below, quadrature to |z|=1, importance sampling on
/// 1 < |z| <= outer_radius with no compensator). Throws QuadratureError when
/// the eps -> eps/2 refinement moves the result beyond quad.refine_tol.
double apply_generator(const DriftModel& model, const StableNoise& noise,
                       const std::function<double(double)>& f, double x,
                       const QuadratureConfig& quad);

enum class VarianceMethod { formula, batch_means };

struct VarianceEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  VarianceMethod method = VarianceMethod::formula;
  bool diverged = false;
  double truncation_radius = 0.0;  ///< R of the jump cutoff (formula only)
  double growth_exponent = 0.0;    ///< log2 of the R -> 2R growth (formula only)
};

/// Double-integral estimate of the asymptotic variance: outer average over
/// the measure's points (evenly subsampled above 2000 of them), inner split
/// jump quadrature of [f(x+z)-f(x)]^2.
/// Runs at R and 2R; >25% growth flags the infinite-variance regime.
VarianceEstimate variance_formula(const PoissonSolution& fh,
                                  const EmpiricalMeasure& mu,
                                  const StableNoise& noise,
                                  const QuadratureConfig& quad);

struct BatchMeansConfig {
  double horizon = 2000.0;
  int n_batches = 40;
  double dt = 1e-2;
  double burn_in = -1.0;  ///< negative: 20% of horizon
  std::vector<double> x0;
  Scheme scheme = Scheme::tamed_euler;
};

/// Independent estimator of the same variance: block length times the sample
/// variance of block averages along one long trajectory, jackknife error.
VarianceEstimate variance_batch_means(const DriftModel& model,
                                      const StableNoise& noise,
                                      const TestFunction& h,
                                      const BatchMeansConfig& cfg, RngStream& rng);

}  // namespace stablesde
