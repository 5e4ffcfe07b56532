#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stablesde/levy_noise.hpp"
#include "stablesde/rng.hpp"

namespace stablesde {

enum class DriftKind { power, custom };

/// Drift b with its dissipativity constants (theta, K1, K2, L).
///
/// The power kind evaluates b(x) = -x |x|^theta exactly; custom drifts carry
/// their own evaluator and claim (not prove) the constants, which
/// verify_dissipativity probes empirically.
struct DriftModel {
  DriftKind kind = DriftKind::power;
  double theta = 0.0;
  double k1 = 1.0;
  double k2 = 0.5;
  double ell = 1.0;
  std::function<void(const double* x, double* out, int dim)> evaluator;

  static DriftModel power(double theta, double k1 = 1.0, double k2 = 0.5,
                          double ell = 1.0);
  static DriftModel custom(std::function<void(const double*, double*, int)> eval,
                           double theta, double k1, double k2, double ell);
  void validate() const;
};

void drift_eval(const DriftModel& model, const double* x, double* out, int dim);
std::vector<double> drift_eval(const DriftModel& model, const std::vector<double>& x);

enum class TestFunctionKind { bounded, lipschitz };

/// Scalar test function h with either a sup-norm bound or a Lipschitz constant.
struct TestFunction {
  TestFunctionKind kind = TestFunctionKind::bounded;
  std::function<double(const double* x, int dim)> evaluator;
  double bound_or_lip = 1.0;
  std::string name = "custom";

  double operator()(const double* x, int dim) const { return evaluator(x, dim); }
  double operator()(double x) const { return evaluator(&x, 1); }

  static TestFunction sine();       ///< bounded, h(x) = sin(x_1)
  static TestFunction identity();   ///< Lipschitz, h(x) = x_1
  static TestFunction constant(double c);
};

enum class Scheme { tamed_euler, semi_implicit };

/// Newton solve of r (1 + dt r^theta) = target with r >= 0, the radial part
/// of the semi-implicit drift step. Throws NewtonDivergenceError on stall.
double semi_implicit_radius(double target, double dt, double theta);

struct SimConfig {
  std::vector<double> x0;
  double dt = 1e-2;
  double horizon = 100.0;
  double burn_in = -1.0;  ///< negative means the 20% default
  Scheme scheme = Scheme::tamed_euler;
  bool disable_noise = false;  ///< test hook: drift-only iteration

  double effective_burn_in() const { return burn_in < 0.0 ? 0.2 * horizon : burn_in; }
  void validate(int dim) const;
};

struct DissipativityViolation {
  std::vector<double> x, y;
  double inner_product;
  double bound;
};

struct DissipativityReport {
  std::vector<DissipativityViolation> violations;
  int n_checked = 0;
  bool pass = false;
};

/// Probes the Assumption-style inequality on n_pairs random pairs with
/// separations spread across (0, radius]. Violations are data, not errors.
DissipativityReport verify_dissipativity(const DriftModel& model, int dim,
                                         int n_pairs, double radius,
                                         RngStream& rng);

/// Called after every accepted step with (time, state, dim).
using StepObserver = std::function<void(double t, const double* x, int dim)>;

/// Advances the state over ceil(horizon/dt) steps with exact stable
/// increments. Throws BlowUpError on non-finite states and
/// NewtonDivergenceError if the semi-implicit solve stalls.
std::vector<double> integrate_path(const DriftModel& model, const StableNoise& noise,
                                   const SimConfig& cfg, RngStream& rng,
                                   const StepObserver& observer = nullptr);

/// Riemann-sum time average of h along one path after burn-in.
double time_average(const DriftModel& model, const StableNoise& noise,
                    const TestFunction& h, const SimConfig& cfg, RngStream& rng);

}  // namespace stablesde
