#pragma once

#include <vector>

#include "stablesde/quadrature.hpp"
#include "stablesde/rng.hpp"

namespace stablesde {

/// Law of the rotationally symmetric alpha-stable driving noise.
///
/// Increments over dt have characteristic function exp(-dt |xi|^alpha).
/// Only the strict range 1 < alpha < 2 is supported.
struct StableNoise {
  double alpha;
  int dim;
  double levy_constant;  ///< C_{d,alpha} of the jump measure density

  StableNoise(double alpha_, int dim_);
};

/// Closed-form constant of the jump measure density C/|z|^{alpha+d}:
/// alpha 2^{alpha-1} pi^{-d/2} Gamma((d+alpha)/2) / Gamma(1-alpha/2).
double levy_constant(double alpha, int dim);

/// One increment of Z over a step of length dt, drawn exactly by
/// subordination: a positive (alpha/2)-stable clock times a Gaussian vector.
std::vector<double> sample_stable_increment(const StableNoise& noise, double dt,
                                            RngStream& rng);

/// Allocation-free variant; out must hold noise.dim doubles.
void sample_stable_increment_into(const StableNoise& noise, double dt,
                                  RngStream& rng, double* out);

/// Standard positive stable variable with Laplace transform exp(-lambda^a),
/// 0 < a < 1, by the Kanter representation.
double sample_one_sided_stable(double a, RngStream& rng);

/// exp(-(scale |xi|)^alpha), the 1-d characteristic function at scale.
double stable_cf(double alpha, double scale, double xi);

/// CDF of the symmetric 1-d alpha-stable law with cf exp(-|xi|^alpha),
/// by Gil-Pelaez inversion. Throws QuadratureError when the oscillatory
/// integral cannot reach quad.abs_tol.
double stable_cdf_1d(double alpha, double x, const QuadratureConfig& quad = {});

}  // namespace stablesde
