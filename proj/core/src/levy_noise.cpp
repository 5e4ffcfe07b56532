#include "stablesde/levy_noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stablesde/errors.hpp"

namespace stablesde {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0))
    throw std::domain_error("alpha must lie strictly in (1,2)");
}

}  // namespace

double levy_constant(double alpha, int dim) {
  check_alpha(alpha);
  if (dim < 1) throw std::domain_error("dim must be at least 1");
  double d = static_cast<double>(dim);
  return alpha * std::pow(2.0, alpha - 1.0) * std::pow(M_PI, -d / 2.0) *
         std::tgamma((d + alpha) / 2.0) / std::tgamma(1.0 - alpha / 2.0);
}

StableNoise::StableNoise(double alpha_, int dim_)
    : alpha(alpha_), dim(dim_), levy_constant(stablesde::levy_constant(alpha_, dim_)) {}

double sample_one_sided_stable(double a, RngStream& rng) {
  // Kanter: S = (A(U)/W)^{(1-a)/a}, U ~ U(0,pi), W ~ Exp(1),
  // A(u) = sin(a u)^{a/(1-a)} sin((1-a)u) / sin(u)^{1/(1-a)}.
  double u = M_PI * rng.uniform01();
  double w = rng.exponential();
  double ratio = std::pow(std::sin(a * u), a / (1.0 - a)) * std::sin((1.0 - a) * u) /
                 std::pow(std::sin(u), 1.0 / (1.0 - a));
  return std::pow(ratio / w, (1.0 - a) / a);
}

void sample_stable_increment_into(const StableNoise& noise, double dt,
                                  RngStream& rng, double* out) {
  if (!(dt > 0.0)) throw std::domain_error("dt must be positive");
  // Clock S with Laplace transform exp(-dt (2 lambda)^{alpha/2}); then
  // sqrt(S) N has cf exp(-dt |xi|^alpha).
  double s0 = sample_one_sided_stable(noise.alpha / 2.0, rng);
  double clock = 2.0 * std::pow(dt, 2.0 / noise.alpha) * s0;
  double sd = std::sqrt(clock);
  for (int i = 0; i < noise.dim; ++i) out[i] = sd * rng.gaussian();
}

std::vector<double> sample_stable_increment(const StableNoise& noise, double dt,
                                            RngStream& rng) {
  std::vector<double> out(noise.dim);
  sample_stable_increment_into(noise, dt, rng, out.data());
  return out;
}

double stable_cf(double alpha, double scale, double xi) {
  check_alpha(alpha);
  if (scale < 0.0) throw std::domain_error("scale must be nonnegative");
  return std::exp(-std::pow(scale * std::abs(xi), alpha));
}

double stable_cdf_1d(double alpha, double x, const QuadratureConfig& quad) {
  check_alpha(alpha);
  // Gil-Pelaez for a symmetric law with real cf phi(xi)=exp(-xi^alpha):
  //   F(x) = 1/2 + (1/pi) int_0^inf sin(x xi) phi(xi) / xi  dxi.
  // The integrand is entire at 0 (limit x) and the cf kills the tail, so a
  // finite upper limit where phi < 1e-16 is exact to beyond abs_tol.
  double upper = std::pow(-std::log(1e-16), 1.0 / alpha);
  auto integrand = [alpha, x](double xi) {
    if (xi <= 0.0) return x;
    return std::sin(x * xi) * std::exp(-std::pow(xi, alpha)) / xi;
  };
  double err = 0.0;
  double integral = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      integrand, 0.0, upper, 18, quad.abs_tol, &err);
  if (err > 10.0 * quad.abs_tol * (1.0 + std::abs(integral)))
    throw QuadratureError("stable_cdf_1d: inversion integral did not converge");
  double f = 0.5 + integral / M_PI;
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace stablesde
