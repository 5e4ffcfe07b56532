#include "stablesde/sde_engine.hpp"

#include <cmath>
#include <stdexcept>

#include "stablesde/errors.hpp"

namespace stablesde {

namespace {

double norm2(const double* x, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

bool all_finite(const double* x, int dim) {
  for (int i = 0; i < dim; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

}  // namespace

// Radial Newton solve of r (1 + dt r^theta) = target, r >= 0.
double semi_implicit_radius(double target, double dt, double theta) {
  double r = target / (1.0 + dt * std::pow(target, theta));  // decent start
  if (!(r > 0.0)) r = target;
  for (int it = 0; it < 100; ++it) {
    double rt = std::pow(r, theta);
    double g = r + dt * r * rt - target;
    if (std::abs(g) < 1e-12 * (1.0 + target)) return r;
    double dg = 1.0 + dt * (1.0 + theta) * rt;
    r -= g / dg;
    if (r < 0.0) r = 0.0;
  }
  throw NewtonDivergenceError("semi_implicit: Newton failed to reach 1e-12 residual");
}

DriftModel DriftModel::power(double theta, double k1, double k2, double ell) {
  DriftModel m;
  m.kind = DriftKind::power;
  m.theta = theta;
  m.k1 = k1;
  m.k2 = k2;
  m.ell = ell;
  m.validate();
  return m;
}

DriftModel DriftModel::custom(std::function<void(const double*, double*, int)> eval,
                              double theta, double k1, double k2, double ell) {
  DriftModel m;
  m.kind = DriftKind::custom;
  m.evaluator = std::move(eval);
  m.theta = theta;
  m.k1 = k1;
  m.k2 = k2;
  m.ell = ell;
  m.validate();
  return m;
}

void DriftModel::validate() const {
  if (theta < 0.0) throw std::domain_error("DriftModel: theta must be >= 0");
  if (!(k1 > 0.0 && k2 > 0.0 && ell > 0.0))
    throw std::domain_error("DriftModel: K1, K2, L must be positive");
  if (kind == DriftKind::custom && !evaluator)
    throw std::domain_error("DriftModel: custom drift needs an evaluator");
}

void drift_eval(const DriftModel& model, const double* x, double* out, int dim) {
  if (model.kind == DriftKind::custom) {
    model.evaluator(x, out, dim);
    return;
  }
  double r = norm2(x, dim);
  double scale = (model.theta == 0.0 || r == 0.0) ? 1.0 : std::pow(r, model.theta);
  for (int i = 0; i < dim; ++i) out[i] = -x[i] * scale;
}

std::vector<double> drift_eval(const DriftModel& model, const std::vector<double>& x) {
  std::vector<double> out(x.size());
  drift_eval(model, x.data(), out.data(), static_cast<int>(x.size()));
  return out;
}

TestFunction TestFunction::sine() {
  TestFunction h;
  h.kind = TestFunctionKind::bounded;
  h.bound_or_lip = 1.0;
  h.name = "sin";
  h.evaluator = [](const double* x, int) { return std::sin(x[0]); };
  return h;
}

TestFunction TestFunction::identity() {
  TestFunction h;
  h.kind = TestFunctionKind::lipschitz;
  h.bound_or_lip = 1.0;
  h.name = "identity";
  h.evaluator = [](const double* x, int) { return x[0]; };
  return h;
}

TestFunction TestFunction::constant(double c) {
  TestFunction h;
  h.kind = TestFunctionKind::bounded;
  h.bound_or_lip = std::abs(c);
  h.name = "constant";
  h.evaluator = [c](const double*, int) { return c; };
  return h;
}

void SimConfig::validate(int dim) const {
  if (static_cast<int>(x0.size()) != dim)
    throw std::domain_error("SimConfig: x0 dimension mismatch");
  if (!(dt > 0.0)) throw std::domain_error("SimConfig: dt must be positive");
  if (!(horizon > 0.0)) throw std::domain_error("SimConfig: horizon must be positive");
  if (dt > horizon) throw std::domain_error("SimConfig: dt must not exceed horizon");
  if (effective_burn_in() >= horizon)
    throw std::domain_error("SimConfig: burn_in must be below horizon");
}

DissipativityReport verify_dissipativity(const DriftModel& model, int dim,
                                         int n_pairs, double radius,
                                         RngStream& rng) {
  if (n_pairs < 1) throw std::invalid_argument("verify_dissipativity: n_pairs >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("verify_dissipativity: radius > 0");

  DissipativityReport report;
  std::vector<double> x(dim), y(dim), bx(dim), by(dim), dir(dim);
  for (int p = 0; p < n_pairs; ++p) {
    for (int i = 0; i < dim; ++i) x[i] = radius * (2.0 * rng.uniform01() - 1.0);
    // log-uniform separation so both branches of the condition get probed
    double sep = radius * std::exp(std::log(1e-3) * rng.uniform01());
    double dn = 0.0;
    for (int i = 0; i < dim; ++i) {
      dir[i] = rng.gaussian();
      dn += dir[i] * dir[i];
    }
    dn = std::sqrt(dn);
    for (int i = 0; i < dim; ++i) y[i] = x[i] + sep * dir[i] / dn;

    drift_eval(model, x.data(), bx.data(), dim);
    drift_eval(model, y.data(), by.data(), dim);
    double ip = 0.0;
    for (int i = 0; i < dim; ++i) ip += (bx[i] - by[i]) * (x[i] - y[i]);
    double bound = sep <= model.ell ? model.k1 * sep * sep
                                    : -model.k2 * std::pow(sep, 2.0 + model.theta);
    ++report.n_checked;
    if (ip > bound + 1e-12 * (1.0 + std::abs(bound)))
      report.violations.push_back({x, y, ip, bound});
  }
  report.pass = report.violations.empty();
  return report;
}

std::vector<double> integrate_path(const DriftModel& model, const StableNoise& noise,
                                   const SimConfig& cfg, RngStream& rng,
                                   const StepObserver& observer) {
  const int dim = noise.dim;
  cfg.validate(dim);
  model.validate();
  if (cfg.scheme == Scheme::semi_implicit && model.kind != DriftKind::power)
    throw std::domain_error("semi_implicit scheme supports the power drift only");

  const double dt = cfg.dt;
  const auto n_steps = static_cast<long>(std::ceil(cfg.horizon / dt - 1e-12));

  std::vector<double> x = cfg.x0;
  std::vector<double> b(dim), dz(dim, 0.0);
  for (long k = 0; k < n_steps; ++k) {
    if (!cfg.disable_noise) sample_stable_increment_into(noise, dt, rng, dz.data());
    if (cfg.scheme == Scheme::tamed_euler) {
      drift_eval(model, x.data(), b.data(), dim);
      double bn = norm2(b.data(), dim);
      double tame = dt / (1.0 + dt * bn);
      for (int i = 0; i < dim; ++i) x[i] += tame * b[i] + dz[i];
    } else {
      // x' + dt x'|x'|^theta = x + dZ; solve the radial part by Newton.
      for (int i = 0; i < dim; ++i) x[i] += dz[i];
      double target = norm2(x.data(), dim);
      if (target > 0.0) {
        double r = semi_implicit_radius(target, dt, model.theta);
        double shrink = r / target;
        for (int i = 0; i < dim; ++i) x[i] *= shrink;
      }
    }
    if (!all_finite(x.data(), dim))
      throw BlowUpError("integrate_path: state became non-finite at t=" +
                        std::to_string((k + 1) * dt));
    if (observer) observer((k + 1) * dt, x.data(), dim);
  }
  return x;
}

double time_average(const DriftModel& model, const StableNoise& noise,
                    const TestFunction& h, const SimConfig& cfg, RngStream& rng) {
  const double burn = cfg.effective_burn_in();
  double acc = 0.0;
  long n_counted = 0;
  integrate_path(model, noise, cfg, rng,
                 [&](double t, const double* x, int dim) {
                   if (t > burn) {
                     acc += h(x, dim);
                     ++n_counted;
                   }
                 });
  if (n_counted == 0) return 0.0;
  return acc * cfg.dt / (cfg.horizon - burn);
}

}  // namespace stablesde
