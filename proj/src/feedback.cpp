#include "vessel/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vessel/errors.hpp"

namespace vessel {

AdmissibilityReport is_admissible(const Vessel& v, const FeedbackOp& f,
                                  const ToleranceProfile& tol) {
  if (f.F.rows() != v.m || f.F.cols() != v.n)
    throw std::invalid_argument("is_admissible: F must be m x n");
  AdmissibilityReport rep;
  const double nF = f.F.norm(), nA1 = v.A1.norm(), nA2 = v.A2.norm(),
               nB = v.B_tilde.norm(), ns1 = v.sigma1.norm(), ns2 = v.sigma2.norm(),
               ng = v.gamma.norm();
  rep.residual_state =
      (v.sigma2 * f.F * v.A1 - v.sigma1 * f.F * v.A2 + v.gamma * f.F).norm();
  rep.scale_state = ns2 * nF * nA1 + ns1 * nF * nA2 + ng * nF;
  rep.residual_input =
      (v.sigma1 * f.F * v.B_tilde * v.sigma2 - v.sigma2 * f.F * v.B_tilde * v.sigma1).norm();
  rep.scale_input = 2.0 * ns1 * nF * nB * ns2;
  rep.admissible = rep.residual_state <= tol.residual_tol * rep.scale_state &&
                   rep.residual_input <= tol.residual_tol * rep.scale_input;
  // All-zero data is admissible by convention (residuals vanish exactly).
  if (rep.scale_state == 0.0 && rep.scale_input == 0.0)
    rep.admissible = rep.residual_state == 0.0 && rep.residual_input == 0.0;
  return rep;
}

Vessel closed_loop(const Vessel& v, const FeedbackOp& f, const ToleranceProfile& tol) {
  if (!is_admissible(v, f, tol).admissible)
    throw std::invalid_argument("closed_loop: feedback operator is not admissible");
  Vessel cl = v;
  cl.A1 = v.A1 + v.B_tilde * v.sigma1 * f.F;
  cl.A2 = v.A2 + v.B_tilde * v.sigma2 * f.F;
  cl.C = v.C + v.D * f.F;
  return cl;
}

Vessel controller_vessel(const Vessel& v, const FeedbackOp& f) {
  if (f.F.rows() != v.m || f.F.cols() != v.n)
    throw std::invalid_argument("controller_vessel: F must be m x n");
  Vessel ctrl;
  ctrl.n = v.n;
  ctrl.m = v.m;
  ctrl.m_star = v.m;
  ctrl.A1 = v.A1;
  ctrl.A2 = v.A2;
  ctrl.B_tilde = v.B_tilde;
  ctrl.C = -f.F;
  ctrl.D = CMat::Identity(v.m, v.m);
  ctrl.D_tilde = CMat::Identity(v.m, v.m);
  ctrl.sigma1 = v.sigma1;
  ctrl.sigma2 = v.sigma2;
  ctrl.gamma = v.gamma;
  ctrl.sigma1_star = v.sigma1;
  ctrl.sigma2_star = v.sigma2;
  ctrl.gamma_star = v.gamma;
  ctrl.declared_r = v.declared_r;
  ctrl.declared_s = v.declared_r;
  return ctrl;
}

std::vector<CMat> admissible_basis(const Vessel& v, const ToleranceProfile& tol) {
  const int m = v.m, n = v.n;
  const CMat eye_n = CMat::Identity(n, n);
  // vec(sigma2 F A1 - sigma1 F A2 + gamma F) = M1 vec(F)
  CMat m1 = kron(v.A1.transpose(), v.sigma2) - kron(v.A2.transpose(), v.sigma1) +
            kron(eye_n, v.gamma);
  // vec(sigma1 F B sigma2 - sigma2 F B sigma1) = M2 vec(F)
  CMat m2 = kron((v.B_tilde * v.sigma2).transpose(), v.sigma1) -
            kron((v.B_tilde * v.sigma1).transpose(), v.sigma2);
  CMat stacked(m1.rows() + m2.rows(), m1.cols());
  stacked.topRows(m1.rows()) = m1;
  stacked.bottomRows(m2.rows()) = m2;
  // Reference scale from the constraint terms: the stacked matrix itself is
  // a residual and can be numerically zero.
  const double reference =
      v.A1.norm() * v.sigma2.norm() + v.A2.norm() * v.sigma1.norm() +
      std::sqrt(static_cast<double>(n)) * v.gamma.norm() +
      2.0 * v.B_tilde.norm() * v.sigma1.norm() * v.sigma2.norm();
  CMat kernel = nullspace_basis_scaled(stacked, reference, tol);
  std::vector<CMat> out;
  for (Eigen::Index j = 0; j < kernel.cols(); ++j) {
    CMat f(m, n);
    for (int col = 0; col < n; ++col)
      f.col(col) = kernel.col(j).segment(static_cast<Eigen::Index>(col) * m, m);
    out.push_back(std::move(f));
  }
  return out;
}

FactorizationReport factorization_check(const Vessel& v, const FeedbackOp& f,
                                        const std::vector<CurvePoint>& points,
                                        const ToleranceProfile& tol) {
  Vessel cl = closed_loop(v, f, tol);
  Vessel ctrl = controller_vessel(v, f);

  SpectrumReport open_spec = joint_spectrum(v.A1, v.A2, tol);
  SpectrumReport closed_spec = joint_spectrum(cl.A1, cl.A2, tol);
  auto near_spectrum = [&](const CurvePoint& p) {
    const double guard = 10.0 * tol.eig_cluster_tol;
    for (const auto* spec : {&open_spec, &closed_spec})
      for (const auto& s : spec->points)
        if (std::max(std::abs(p.lambda1 - s.lambda1), std::abs(p.lambda2 - s.lambda2)) <= guard)
          return true;
    return false;
  };

  FactorizationReport rep;
  for (size_t i = 0; i < points.size(); ++i) {
    const CurvePoint& p = points[i];
    if (!p.is_affine() || near_spectrum(p)) {
      rep.skipped.push_back(static_cast<int>(i));
      continue;
    }
    FiberBasis fiber = curve_fiber(v, p, FiberSide::input, tol);
    for (Eigen::Index j = 0; j < fiber.basis.cols(); ++j) {
      CVec vec = fiber.basis.col(j);
      CVec mid = transfer_eval(ctrl, p, vec, tol).value;
      CVec through = transfer_eval(cl, p, mid, tol).value;
      CVec direct = transfer_eval(v, p, vec, tol).value;
      double scale = vec.norm() + mid.norm() + through.norm() + direct.norm();
      double resid = (through - direct).norm() / (scale > 0.0 ? scale : 1.0);
      rep.max_residual = std::max(rep.max_residual, resid);
      ++rep.points_checked;
    }
  }
  return rep;
}

}  // namespace vessel
