#pragma once

#include <vector>

#include "vessel/numeric.hpp"

namespace vessel {

/// Dense univariate polynomial over the complex numbers,
/// coefficients stored in ascending degree order.
struct UniPoly {
  std::vector<Complex> c;

  UniPoly() = default;
  explicit UniPoly(std::vector<Complex> coeffs) : c(std::move(coeffs)) {}
  static UniPoly constant(Complex v) { return UniPoly({v}); }
  static UniPoly from_roots(const std::vector<Complex>& roots, Complex lead = 1.0);

  int degree() const;  // -1 for the zero polynomial
  bool is_zero(double abs_eps = 0.0) const;
  Complex eval(Complex x) const;
  double eval_scale(Complex x) const;  // sum of |c_i| |x|^i
  double coeff_scale() const;          // max |c_i|
  UniPoly derivative() const;
  void trim(double abs_eps);

  UniPoly operator+(const UniPoly& o) const;
  UniPoly operator-(const UniPoly& o) const;
  UniPoly operator*(const UniPoly& o) const;
  UniPoly operator*(Complex s) const;

  /// All complex roots via the companion matrix (degree from trailing
  /// coefficient magnitudes relative to coeff_scale).
  std::vector<Complex> roots() const;

  /// First `order` Taylor coefficients of p(z + h) in h, by repeated
  /// synthetic division.
  std::vector<Complex> taylor_at(Complex z, int order) const;
};

}  // namespace vessel
