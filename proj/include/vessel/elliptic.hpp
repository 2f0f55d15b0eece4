#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "vessel/numeric.hpp"

namespace vessel {

/// Short Weierstrass model y^2 = x^3 + a x + b over the complex numbers.
/// The point at infinity O is the group identity and the Abel-map base point.
struct EllipticCurve {
  Complex a{0.0}, b{0.0};

  bool nonsingular(const ToleranceProfile& tol) const;
};

struct ECPoint {
  enum class Kind { affine, infinity };
  Kind kind = Kind::infinity;
  Complex x{0.0}, y{0.0};

  static ECPoint O() { return ECPoint{}; }
  static ECPoint affine(Complex x, Complex y) {
    ECPoint p;
    p.kind = Kind::affine;
    p.x = x;
    p.y = y;
    return p;
  }
  bool is_infinity() const { return kind == Kind::infinity; }
};

/// Formal sum of curve points with (possibly negative) multiplicities.
struct ECDivisor {
  std::vector<std::pair<ECPoint, int>> entries;
  int degree() const {
    int d = 0;
    for (const auto& [p, m] : entries) d += m;
    return d;
  }
};

/// Line alpha*x + beta*y + gamma used as a straight-line-program factor.
struct ECLine {
  Complex alpha{0.0}, beta{0.0}, gamma{0.0};
  Complex eval(const ECPoint& p) const { return alpha * p.x + beta * p.y + gamma; }
};

/// Function with a prescribed principal divisor, kept as a product of
/// chord/vertical line values with exponents +-1 (never expanded).
struct MillerFunction {
  Complex scale{1.0};
  std::vector<std::pair<ECLine, int>> factors;
  ECDivisor divisor;  // declared divisor, tracked exactly through the reduction

  /// Value at a point off the support (including O); throws otherwise.
  Complex eval(const ECPoint& p) const;

  /// Limit at O from the leading coefficients (x ~ t^-2, y ~ t^-3); defined
  /// only when the factor orders at O cancel.
  Complex eval_at_infinity() const;
};

bool ec_on_curve(const EllipticCurve& e, const ECPoint& p, const ToleranceProfile& tol);

bool ec_same_point(const ECPoint& p, const ECPoint& q, const ToleranceProfile& tol);

/// Chord-tangent group law; off-curve inputs are rejected.
ECPoint ec_group_op(const EllipticCurve& e, const ECPoint& p, const ECPoint& q,
                    const ToleranceProfile& tol = {});

ECPoint ec_negate(const ECPoint& p);

ECPoint ec_scalar_mult(const EllipticCurve& e, long n, const ECPoint& p,
                       const ToleranceProfile& tol = {});

/// Canonical homomorphism Div(X) -> (X, +): the +-sum of points with
/// multiplicities (negatives via inversion).
ECPoint phi_of_divisor(const EllipticCurve& e, const ECDivisor& d,
                       const ToleranceProfile& tol = {});

/// Degree zero and Phi(D) = O.
bool is_principal(const EllipticCurve& e, const ECDivisor& d, const ToleranceProfile& tol = {});

/// Straight-line program with divisor exactly D; rejects non-principal D.
MillerFunction miller_build(const EllipticCurve& e, const ECDivisor& d,
                            const ToleranceProfile& tol = {});

/// The unique completion making the tuple a No-Feedback tuple:
/// p_r = Phi(Z - D_inf - sum of the partial points).
ECPoint forbidden_point(const EllipticCurve& e, const ECDivisor& z, const ECDivisor& d_inf,
                        const std::vector<ECPoint>& partial_points,
                        const ToleranceProfile& tol = {});

struct Genus1Achievability {
  bool achievable = false;
  std::optional<MillerFunction> f;  // normalized to value 1 on supp(D_inf)
  double certificate = 0.0;         // worst |f(q) - 1| over supp(D_inf)
};

/// P is achievable iff Z - P is principal and the Miller function for Z - P
/// takes a single common value on supp(D_inf) (then rescaled to 1).
Genus1Achievability genus1_achievability(const EllipticCurve& e, const ECDivisor& z,
                                         const ECDivisor& p, const ECDivisor& d_inf,
                                         const ToleranceProfile& tol);

}  // namespace vessel
