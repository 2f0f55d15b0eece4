#pragma once

#include <vector>

#include "vessel/transfer.hpp"
#include "vessel/vessel.hpp"

namespace vessel {

/// State feedback operator F : H -> E (an m x n matrix).
struct FeedbackOp {
  CMat F;
};

struct AdmissibilityReport {
  bool admissible = false;
  double residual_state = 0.0;   // sigma2 F A1 - sigma1 F A2 + gamma F
  double residual_input = 0.0;   // sigma1 F B sigma2 - sigma2 F B sigma1
  double scale_state = 0.0;
  double scale_input = 0.0;
};

struct FactorizationReport {
  double max_residual = 0.0;  // relative to the per-point scale
  int points_checked = 0;
  std::vector<int> skipped;   // indices of points skipped near a spectrum
};

/// Residuals of the two admissibility equations.
AdmissibilityReport is_admissible(const Vessel& v, const FeedbackOp& f,
                                  const ToleranceProfile& tol);

/// Closed-loop vessel (A1 + B sigma1 F, A2 + B sigma2 F, B, C + D F, ...).
/// Rejects inadmissible F.
Vessel closed_loop(const Vessel& v, const FeedbackOp& f, const ToleranceProfile& tol);

/// Controller vessel (A1, A2, B, -F, I, I, sigma1, sigma2, gamma, repeated).
/// No admissibility guard: validation of the result is the admissibility
/// signal (it passes iff F is admissible).
Vessel controller_vessel(const Vessel& v, const FeedbackOp& f);

/// Orthonormal basis of the space of admissible feedback operators, computed
/// as the kernel of the vectorized constraint map.
std::vector<CMat> admissible_basis(const Vessel& v, const ToleranceProfile& tol);

/// Verifies S = S_cl o S_ctrl on fiber vectors at the given curve points.
/// Points within 10 * eig_cluster_tol of the open- or closed-loop joint
/// spectrum are skipped and reported.
FactorizationReport factorization_check(const Vessel& v, const FeedbackOp& f,
                                        const std::vector<CurvePoint>& points,
                                        const ToleranceProfile& tol);

}  // namespace vessel
