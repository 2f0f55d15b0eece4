#pragma once

#include <utility>
#include <vector>

#include "vessel/numeric.hpp"
#include "vessel/unipoly.hpp"

namespace vessel {

/// Dense bivariate polynomial; coeff(i, j) multiplies l1^i * l2^j.
class BivariatePoly {
 public:
  BivariatePoly() : coeffs_(CMat::Zero(1, 1)) {}
  explicit BivariatePoly(CMat coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  /// Expands det(l1 * s2 - l2 * s1 + g) by interpolation on a tensor grid of
  /// roots of unity (exact up to floating error for degree <= matrix size).
  static BivariatePoly pencil_determinant(const CMat& s1, const CMat& s2, const CMat& g);

  const CMat& coeffs() const { return coeffs_; }
  Complex coeff(int i, int j) const;
  int degree1() const { return static_cast<int>(coeffs_.rows()) - 1; }
  int degree2() const { return static_cast<int>(coeffs_.cols()) - 1; }
  int total_degree() const;
  bool is_constant() const { return total_degree() <= 0; }

  Complex eval(Complex l1, Complex l2) const;
  /// Sum of |c_ij| |l1|^i |l2|^j, the natural scale for on-curve residuals.
  double eval_scale(Complex l1, Complex l2) const;
  double coeff_scale() const;

  BivariatePoly d_lambda1() const;
  BivariatePoly d_lambda2() const;

  /// Coefficients of the univariate polynomial p(l1, .) in l2.
  UniPoly slice_at_lambda1(Complex l1) const;

  /// Homogeneous top-degree form as q(u) with u = l1/l2:
  /// q(u) = sum_i coeff(i, d - i) u^i where d = total_degree().
  UniPoly top_form() const;

  /// Roots of the top form in P^1 as normalized (l1, l2) pairs, one entry per
  /// root with multiplicity (the root at (1:0) accounts for degree drop).
  std::vector<std::pair<Complex, Complex>> infinity_directions() const;

  /// True when |grad p| at the point clears residual_tol times the local
  /// scale of the gradient polynomials.
  bool smooth_at(Complex l1, Complex l2, const ToleranceProfile& tol) const;

  /// Relative proportionality constant: this ~ mu * other on a sample grid.
  /// Returns false when no scalar fits within residual_tol.
  bool proportional_to(const BivariatePoly& other, const ToleranceProfile& tol,
                       Complex* mu_out) const;

 private:
  void trim();
  CMat coeffs_;
};

}  // namespace vessel
