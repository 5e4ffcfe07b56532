#pragma once

#include <cstdint>
#include <stdexcept>

namespace stablesde {

/// Settings for the singular jump integrals and the CDF inversion.
///
/// The jump measure |z|^{-alpha-1}dz is split at inner_cutoff (second-order
/// Taylor surrogate below it, deterministic quadrature up to |z|=1) and
/// truncated at outer_radius for the importance-sampled large-jump part.
struct QuadratureConfig {
  double inner_cutoff = 1e-3;   ///< epsilon of the small-jump split, 0 < eps < 1
  double outer_radius = 16.0;   ///< R of the large-jump truncation, R > 1
  int n_jump_samples = 4000;    ///< importance samples on 1 < |z| <= R
  double abs_tol = 1e-6;        ///< absolute tolerance of the CDF inversion
  double refine_tol = 1e-3;     ///< allowed change under eps -> eps/2 refinement
  std::uint64_t seed = 0x5eedu; ///< stream seed for the jump sampler

  void validate() const {
    if (!(inner_cutoff > 0.0 && inner_cutoff < 1.0))
      throw std::domain_error("QuadratureConfig: inner_cutoff must be in (0,1)");
    if (!(outer_radius > 1.0))
      throw std::domain_error("QuadratureConfig: outer_radius must exceed 1");
    if (n_jump_samples < 1)
      throw std::domain_error("QuadratureConfig: n_jump_samples must be positive");
  }
};

}  // namespace stablesde
