#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vessel/vessel.hpp"

namespace vessel {

/// Rational matrix function in state-space form: W(l) = D + C (l I - A)^-1 B.
/// Square (as many outputs as inputs) so that inversion makes sense.
struct RealizedRMF {
  CMat A, B, C, D;
  std::string label;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int io_dim() const { return static_cast<int>(D.rows()); }
  bool dims_ok() const {
    return A.rows() == A.cols() && B.rows() == A.rows() && C.cols() == A.rows() &&
           D.rows() == D.cols() && C.rows() == D.rows() && B.cols() == D.cols();
  }
};

struct DivisorEntry {
  Complex point;
  int mult = 1;
  std::optional<CVec> direction;  // only attached at simple points
};

/// Formal multiset of points with multiplicities (pole or zero data).
struct Divisor {
  std::vector<DivisorEntry> entries;
  int degree() const {
    int d = 0;
    for (const auto& e : entries) d += e.mult;
    return d;
  }
};

struct SpectrumPoint {
  Complex lambda1, lambda2;
  int mult = 1;
  bool on_curve = false;
  bool smooth = false;
};

struct SpectrumReport {
  std::vector<SpectrumPoint> points;
  bool curve_checked = false;
};

struct TransferValue {
  CVec value;             // w = S(p) v
  double out_residual = 0.0;  // relative residual of w against the output pencil
  Direction xi_used;
};

/// Joint spectrum of a commuting pair via Schur form of a fixed generic
/// linear combination; pairs clustered within eig_cluster_tol. When a curve
/// polynomial is supplied, each pair is flagged on-curve / smooth.
SpectrumReport joint_spectrum(const CMat& a1, const CMat& a2, const ToleranceProfile& tol,
                              const BivariatePoly* curve = nullptr);

/// Joint spectrum of (A1, A2) of a vessel with curve flags filled in.
SpectrumReport vessel_spectrum(const Vessel& v, const ToleranceProfile& tol);

/// Transfer function applied to a fiber vector at an affine curve point,
/// with the internal direction chosen from a fixed fan for conditioning.
/// At a point over the line at infinity the value is D v.
TransferValue transfer_eval(const Vessel& v, const CurvePoint& p, const CVec& fiber_vec,
                            const ToleranceProfile& tol);

/// Same, but with a caller-forced internal direction (exercises the
/// independence of the choice).
TransferValue transfer_eval_with_direction(const Vessel& v, const CurvePoint& p,
                                           const CVec& fiber_vec, const Direction& xi,
                                           const ToleranceProfile& tol);

/// Restricted transfer function S_xi(l) = D + C (l I - A_xi)^-1 B_xi.
RealizedRMF restricted_transfer(const Vessel& v, const Direction& xi,
                                const ToleranceProfile& tol);

CMat rmf_eval(const RealizedRMF& w, Complex lambda, const ToleranceProfile& tol);
CMat rmf_value_at_infinity(const RealizedRMF& w);

/// Inverse realization (A - B D^-1 C, B D^-1, -D^-1 C, D^-1), verified by a
/// product check at sample points away from the poles.
RealizedRMF rmf_inverse(const RealizedRMF& w, const ToleranceProfile& tol);

/// Series interconnection: (second * first)(l) = second(l) * first(l).
RealizedRMF rmf_compose(const RealizedRMF& second, const RealizedRMF& first);

/// Controllable-observable part via Krylov range/co-kernel projection.
RealizedRMF rmf_minimalize(const RealizedRMF& w, const ToleranceProfile& tol);

bool rmf_is_minimal(const RealizedRMF& w, const ToleranceProfile& tol);

/// Pole divisor from the eigenvalue clusters of A; left directions (through
/// B) attached at simple eigenvalues. Requires a minimal realization.
Divisor rmf_pole_divisor(const RealizedRMF& w, const ToleranceProfile& tol);

/// Zero divisor = pole divisor of the minimalized inverse realization.
Divisor rmf_zero_divisor(const RealizedRMF& w, const ToleranceProfile& tol);

/// Multiset containment with direction-parallelism checks at simple points.
bool divisor_contains(const Divisor& small, const Divisor& big, const ToleranceProfile& tol);

struct PlacementCheck {
  bool zero_containment = false;
  bool infinity_match = false;
  bool conditions_hold = false;
  bool lemma_pole_containment = false;  // LP(T^-1 S) within LP(S)
  bool lemma_consistent = false;
  std::string witness;
  Divisor lz_t, lz_s, lp_r, lp_s;
};

/// Checks the pole placement conditions for target T against open loop S:
/// zero-divisor containment and matching value at infinity, plus the
/// divisor-difference consistency on the instance.
PlacementCheck placement_condition_check(const RealizedRMF& s, const RealizedRMF& t,
                                         const ToleranceProfile& tol);

}  // namespace vessel
