#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vessel/feedback.hpp"
#include "vessel/transfer.hpp"
#include "vessel/unipoly.hpp"
#include "vessel/vessel.hpp"

namespace vessel {

/// Data for the single-input family whose discriminant curve is the line
/// c*l1 - l2 + d = 0 (so A2 = c A1 + d I and all operator data is scalar).
/// The starred data is derived from the intertwining constraint
/// sigma1_star * D = D_tilde * sigma1.
struct LineVesselSpec {
  int n = 1;
  CMat A1;             // n x n
  Complex c{1.0}, d{0.0};
  Complex sigma1{1.0};  // nonzero
  CVec b;               // n x 1
  CMat c_row;           // 1 x n
  Complex D{1.0}, D_tilde{1.0};  // nonzero
};

/// Marked points of the line at infinity in the genus-0 coordinate t.
struct MarkedPoints {
  std::vector<Complex> finite;
  bool include_infinity = false;
  int degree() const { return static_cast<int>(finite.size()) + (include_infinity ? 1 : 0); }
};

/// Basis of L(Z - D_inf) on the projective line, kept in partial-fraction
/// form over the pole support of Z for evaluation stability.
struct RationalFunctionBasis {
  struct Term {
    Complex pole{0.0};
    int order = 0;  // order 0 encodes the constant term 1
  };
  std::vector<Term> terms;      // shared term list
  std::vector<CVec> coeffs;     // one aligned coefficient vector per function
  std::vector<std::pair<Complex, int>> pole_support;  // from Z
  MarkedPoints marks;           // D_inf

  int size() const { return static_cast<int>(coeffs.size()); }
  Complex eval(int idx, Complex t) const;
  double eval_scale(int idx, Complex t) const;
  Complex eval_combo(const CVec& a, Complex t) const;
};

struct FeedbackDimension {
  int value = 0;
  bool exact = true;  // false when only the Riemann-Roch lower bound applies
};

struct BuildFResult {
  UniPoly numerator, denominator;  // f = numerator / denominator
  std::vector<Complex> induced_poles;  // all denominator roots (the induced P)
  std::vector<std::pair<Complex, int>> f_zero_divisor;  // reduced, clustered
  std::vector<std::pair<Complex, int>> f_pole_divisor;  // reduced, clustered
  std::vector<Complex> cancellations;
  double mark_certificate = 0.0;  // worst relative |f(q) - 1| over the marks
  bool certificate_ok = true;
};

struct PlacementOutcome {
  FeedbackOp F;
  Direction xi;
  std::vector<Complex> desired;
  std::vector<Complex> achieved;
  Divisor open_loop_poles;  // Z of the placement problem
  double spectrum_mismatch = 0.0;
  bool spectra_match = false;
  bool admissible = false;
  std::string route;  // "interpolation" or "ackermann"
  std::optional<BuildFResult> f_result;  // interpolation route only
  bool condition_checked = false;
  PlacementCheck condition;
};

/// Builds the line-family vessel; rejects uncontrollable/unobservable data
/// with the Krylov ranks in the message.
Vessel build_line_vessel(const LineVesselSpec& spec, const ToleranceProfile& tol);

/// fb.dim by genus: g=0 gives max(n-m+1, 0); g=1 gives max(ell + n-m, 0);
/// g>=2 gives n-m-g+1 exactly when n-m > 2g-2, otherwise only the bound.
FeedbackDimension feedback_dimension(int genus, int n, int m, int ell_correction = 0);

/// Basis of L(Z - D_inf) for genus 0; empty when deg(Z - D_inf) + 1 <= 0.
RationalFunctionBasis basis_L_genus0(const Divisor& z, const MarkedPoints& d_inf,
                                     const ToleranceProfile& tol);

/// det of the evaluation matrix b_ij = f_i(p_j); zero marks a No-Feedback tuple.
Complex nf_determinant(const RationalFunctionBasis& basis, const std::vector<Complex>& points,
                       const ToleranceProfile& tol);

/// Solves sum_i a_i f_i(p_j) = -1 for all j; throws when the tuple is in the
/// No-Feedback set (singular evaluation matrix).
CVec solve_interpolation(const RationalFunctionBasis& basis, const std::vector<Complex>& points,
                         const ToleranceProfile& tol);

/// f = 1/(g+1) for g = sum a_i f_i, in numerator/denominator form with the
/// value-one certificate on the marks and divisor bookkeeping.
BuildFResult build_f(const CVec& coefficients, const RationalFunctionBasis& basis,
                     const ToleranceProfile& tol);

/// Classical single-input pole placement: spectrum(A - b K) = desired.
CMat ackermann_oracle(const CMat& a, const CVec& b, const std::vector<Complex>& desired,
                      const ToleranceProfile& tol);

/// End-to-end pole placement for a minimal line-family vessel. Distinct
/// desired points away from the open-loop spectrum go through the
/// interpolation construction; multiplicities and collisions go through the
/// characteristic-polynomial (Ackermann) route. Closed-loop convention:
/// A_i + B sigma_i F, so F = -K against the classical oracle.
PlacementOutcome place_poles_genus0(const Vessel& v, const std::vector<Complex>& desired,
                                    const ToleranceProfile& tol);

}  // namespace vessel
