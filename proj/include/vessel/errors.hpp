#pragma once

#include <stdexcept>
#include <string>

namespace vessel {

/// Numerical postcondition failure (lost precision, inconsistent data).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluation requested at (or too close to) a pole or spectrum point.
class PoleError : public std::runtime_error {
 public:
  PoleError(const std::string& what, double distance)
      : std::runtime_error(what), distance_to_pole(distance) {}
  double distance_to_pole;
};

}  // namespace vessel
