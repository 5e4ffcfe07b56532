#pragma once

#include <stdexcept>
#include <string>

namespace stablesde {

/// Thrown when an integrated state becomes non-finite.
class BlowUpError : public std::runtime_error {
 public:
  explicit BlowUpError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a numerical integral fails to reach its requested tolerance.
class QuadratureError : public std::runtime_error {
 public:
  explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when the semi-implicit Newton solve does not converge.
class NewtonDivergenceError : public std::runtime_error {
 public:
  explicit NewtonDivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stablesde
