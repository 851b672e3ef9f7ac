#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lfpp {

// Exit-code classes map 1:1 onto the CLI contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ResourceError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double tail_bound)
      : Error(what + " (tail bound " + std::to_string(tail_bound) + ")"), tail_bound_(tail_bound) {}
  double tail_bound() const { return tail_bound_; }

 private:
  double tail_bound_;
};

struct DimensionConstants {
  int d = 2;
  double c_d = 0.0;             // Gamma(d/2) / (2 pi^{d/2})
  double surface_factor = 0.0;  // 2 pi^{d/2} / Gamma(d/2), area of the unit sphere
};

inline DimensionConstants dimension_constants(int d) {
  if (d < 1) throw ValidationError("dimension must be positive");
  const double half = 0.5 * d;
  const double s = 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
  return {d, 1.0 / s, s};
}

inline double unit_ball_volume(int d) { return dimension_constants(d).surface_factor / d; }

}  // namespace lfpp
