#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vessel/bipoly.hpp"
#include "vessel/numeric.hpp"

namespace vessel {

/// Projective direction (xi1 : xi2), stored with unit Euclidean norm and the
/// first nonzero component rotated to the positive real axis.
struct Direction {
  Complex xi1{1.0}, xi2{0.0};

  Direction() = default;
  Direction(Complex x1, Complex x2);
};

struct CurvePoint {
  enum class Kind { affine, at_infinity };
  Kind kind = Kind::affine;
  Complex lambda1{0.0}, lambda2{0.0};  // affine coordinates
  Complex l1{0.0}, l2{0.0};            // homogeneous asymptote direction

  static CurvePoint affine(Complex a, Complex b) {
    CurvePoint p;
    p.lambda1 = a;
    p.lambda2 = b;
    return p;
  }
  static CurvePoint at_infinity(Complex h1, Complex h2) {
    CurvePoint p;
    p.kind = Kind::at_infinity;
    p.l1 = h1;
    p.l2 = h2;
    return p;
  }
  bool is_affine() const { return kind == Kind::affine; }
};

/// Commutative two-operator vessel over finite-dimensional complex spaces.
///
/// State space dimension n, input dimension m (= dim of the tilde input
/// space), output dimension m_star. declared_r / declared_s record the powers
/// of the irreducible factorization of the discriminant polynomials; they are
/// user-declared, not computed.
struct Vessel {
  int n = 0, m = 0, m_star = 0;
  CMat A1, A2;       // n x n
  CMat B_tilde;      // n x m
  CMat C;            // m_star x n
  CMat D;            // m_star x m
  CMat D_tilde;      // m_star x m_star
  CMat sigma1, sigma2, gamma;                    // m x m
  CMat sigma1_star, sigma2_star, gamma_star;     // m_star x m_star
  int declared_r = 1, declared_s = 1;

  bool dimensions_consistent() const;
  CMat sigma_xi(const Direction& xi) const { return xi.xi1 * sigma1 + xi.xi2 * sigma2; }
  CMat sigma_star_xi(const Direction& xi) const {
    return xi.xi1 * sigma1_star + xi.xi2 * sigma2_star;
  }
  CMat A_xi(const Direction& xi) const { return xi.xi1 * A1 + xi.xi2 * A2; }
  CMat B_xi(const Direction& xi) const { return B_tilde * sigma_xi(xi); }
};

struct ValidationReport {
  struct Entry {
    std::string name;
    double residual = 0.0;
    double scale = 0.0;
    bool pass = false;
  };
  std::vector<Entry> conditions;
  bool structural_ok = true;
  std::string structural_message;
  bool d_invertible = false;
  bool d_tilde_invertible = false;
  bool pass = false;
};

struct DiscriminantResult {
  BivariatePoly p_in, p_out;
  std::optional<Complex> mu;  // p_out ~ mu * p_in when present
};

enum class FiberSide { input, output };

struct FiberBasis {
  CurvePoint point;
  FiberSide side = FiberSide::input;
  CMat basis;             // orthonormal kernel columns
  double residual = 0.0;  // max relative pencil residual over columns
  int expected_dim = 1;   // mu_p * r under maximality at a smooth point
  bool maximality_ok = true;
};

struct CurveSample {
  std::vector<CurvePoint> affine;
  std::vector<CurvePoint> at_infinity;
};

struct MinimalityReport {
  bool controllable = false;
  bool observable = false;
  bool minimal = false;
  int krylov_rank_ctrb = 0;
  int krylov_rank_obs = 0;
};

struct RestrictedMinimality {
  bool controllable = false;
  bool observable = false;
  bool minimal = false;
};

/// Residuals of the vessel conditions (A1)-(A4) plus invertibility of D and
/// D_tilde. Dimension mismatches are reported structurally, with no residuals.
ValidationReport validate_vessel(const Vessel& v, const ToleranceProfile& tol);

/// Input/output discriminant polynomials and, when one exists, the
/// proportionality constant between them.
DiscriminantResult discriminant_polys(const Vessel& v, const ToleranceProfile& tol);

bool is_regular_direction(const Vessel& v, const Direction& xi, const ToleranceProfile& tol);

/// Deterministic search over a fixed candidate sequence; throws when
/// max_tries candidates are exhausted.
Direction find_regular_direction(const Vessel& v, const ToleranceProfile& tol,
                                 int max_tries = 64);

/// Kernel of the curve pencil at an affine point of the discriminant curve.
FiberBasis curve_fiber(const Vessel& v, const CurvePoint& p, FiberSide side,
                       const ToleranceProfile& tol);

/// Fiber over a point at infinity: kernel of l1*sigma2 - l2*sigma1 (input) or
/// the starred pencil (output).
FiberBasis infinity_fiber(const Vessel& v, const CurvePoint& p, FiberSide side,
                          const ToleranceProfile& tol);

/// Affine points found by fixing lambda1 on a seeded grid and root-solving
/// p_in(lambda1, .), plus the points over the line at infinity. Throws when
/// the top form has a repeated root (transversality assumption violated).
CurveSample sample_curve_points(const BivariatePoly& p_in, int count, unsigned seed,
                                const ToleranceProfile& tol);

MinimalityReport minimality_report(const Vessel& v, const ToleranceProfile& tol);

/// Classical Krylov ranks of (A_xi, B_xi) and (C, A_xi).
RestrictedMinimality restricted_minimality(const Vessel& v, const Direction& xi,
                                           const ToleranceProfile& tol);

/// State-space similarity: (N^-1 A1 N, N^-1 A2 N, N^-1 B_tilde, C N, ...).
Vessel similarity_transform(const Vessel& v, const CMat& n_iso, const ToleranceProfile& tol);

}  // namespace vessel
