#include "vessel/transfer.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "vessel/errors.hpp"

namespace vessel {

namespace {

// Fixed "generic" combination weights for simultaneous triangularization.
const Complex kComboWeights[] = {
    {0.5372859213, 0.3412093117},
    {1.2376450316, -0.7210113212},
    {-0.3141592653, 0.9134820417},
    {2.0918273645, 0.1723940516},
};

double strict_lower_norm(const CMat& t) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < t.cols(); ++j)
    for (Eigen::Index i = j + 1; i < t.rows(); ++i) acc += std::norm(t(i, j));
  return std::sqrt(acc);
}

struct Pair2 {
  Complex l1, l2;
};

std::vector<std::vector<int>> cluster_pairs(const std::vector<Pair2>& vals, double radius) {
  const int n = static_cast<int>(vals.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  auto dist = [](const Pair2& a, const Pair2& b) {
    return std::max(std::abs(a.l1 - b.l1), std::abs(a.l2 - b.l2));
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist(vals[i], vals[j]) <= radius) parent[find(i)] = find(j);
  std::vector<std::vector<int>> groups(n);
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& g : groups)
    if (!g.empty()) out.push_back(std::move(g));
  return out;
}

}  // namespace

SpectrumReport joint_spectrum(const CMat& a1, const CMat& a2, const ToleranceProfile& tol,
                              const BivariatePoly* curve) {
  if (a1.rows() != a1.cols() || a2.rows() != a2.cols() || a1.rows() != a2.rows())
    throw std::invalid_argument("joint_spectrum: matrices must be square and equal-sized");
  const Eigen::Index n = a1.rows();
  SpectrumReport rep;
  rep.curve_checked = curve != nullptr;
  if (n == 0) return rep;

  const double commutator_scale = 2.0 * a1.norm() * a2.norm();
  if ((a1 * a2 - a2 * a1).norm() > tol.residual_tol * std::max(commutator_scale, 1e-300))
    throw std::invalid_argument("joint_spectrum: matrices do not commute within tolerance");

  const double tri_tol = std::max(tol.residual_tol, 1e13 * 2.2e-16);
  CMat t1, t2;
  bool ok = false;
  for (Complex w : kComboWeights) {
    CMat combo = a1 + w * a2;
    Eigen::ComplexSchur<CMat> schur(combo, /*computeU=*/true);
    if (schur.info() != Eigen::Success) continue;
    const CMat& u = schur.matrixU();
    t1 = u.adjoint() * a1 * u;
    t2 = u.adjoint() * a2 * u;
    if (strict_lower_norm(t1) <= tri_tol * std::max(a1.norm(), 1e-300) &&
        strict_lower_norm(t2) <= tri_tol * std::max(a2.norm(), 1e-300)) {
      ok = true;
      break;
    }
  }
  if (!ok)
    throw NumericalError("joint_spectrum: simultaneous triangularization failed");

  std::vector<Pair2> diag(n);
  for (Eigen::Index i = 0; i < n; ++i) diag[i] = {t1(i, i), t2(i, i)};
  for (auto& group : cluster_pairs(diag, tol.eig_cluster_tol)) {
    SpectrumPoint p;
    Complex s1 = 0.0, s2 = 0.0;
    for (int idx : group) {
      s1 += diag[idx].l1;
      s2 += diag[idx].l2;
    }
    p.lambda1 = s1 / static_cast<double>(group.size());
    p.lambda2 = s2 / static_cast<double>(group.size());
    p.mult = static_cast<int>(group.size());
    if (curve) {
      double value = std::abs(curve->eval(p.lambda1, p.lambda2));
      double scale = curve->eval_scale(p.lambda1, p.lambda2);
      p.on_curve = value <= tol.residual_tol * scale;
      p.smooth = curve->smooth_at(p.lambda1, p.lambda2, tol);
    }
    rep.points.push_back(p);
  }
  std::sort(rep.points.begin(), rep.points.end(), [](const SpectrumPoint& a, const SpectrumPoint& b) {
    if (a.lambda1.real() != b.lambda1.real()) return a.lambda1.real() < b.lambda1.real();
    if (a.lambda1.imag() != b.lambda1.imag()) return a.lambda1.imag() < b.lambda1.imag();
    if (a.lambda2.real() != b.lambda2.real()) return a.lambda2.real() < b.lambda2.real();
    return a.lambda2.imag() < b.lambda2.imag();
  });
  return rep;
}

SpectrumReport vessel_spectrum(const Vessel& v, const ToleranceProfile& tol) {
  BivariatePoly p_in = BivariatePoly::pencil_determinant(v.sigma1, v.sigma2, v.gamma);
  return joint_spectrum(v.A1, v.A2, tol, &p_in);
}

namespace {

TransferValue eval_at_direction(const Vessel& v, const CurvePoint& p, const CVec& fiber_vec,
                                const Direction& xi, const ToleranceProfile& tol,
                                bool enforce_conditioning) {
  const CMat pencil =
      xi.xi1 * (p.lambda1 * CMat::Identity(v.n, v.n) - v.A1) +
      xi.xi2 * (p.lambda2 * CMat::Identity(v.n, v.n) - v.A2);
  Eigen::JacobiSVD<CMat> svd(pencil, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (v.n > 0) {
    const double smin = sv(sv.size() - 1), smax = sv(0);
    if (smax == 0.0 || smin <= tol.rank_tol * smax) {
      if (enforce_conditioning)
        throw PoleError("transfer_eval: direction pencil numerically singular", smin);
    }
  }
  TransferValue out;
  out.xi_used = xi;
  if (v.n == 0) {
    out.value = v.D * fiber_vec;
  } else {
    CVec rhs = v.B_tilde * (v.sigma_xi(xi) * fiber_vec);
    out.value = v.D * fiber_vec + v.C * svd.solve(rhs);
  }
  const CMat out_pencil =
      p.lambda1 * v.sigma2_star - p.lambda2 * v.sigma1_star + v.gamma_star;
  const double scale = (std::abs(p.lambda1) * v.sigma2_star.norm() +
                        std::abs(p.lambda2) * v.sigma1_star.norm() + v.gamma_star.norm()) *
                       out.value.norm();
  out.out_residual = scale > 0.0 ? (out_pencil * out.value).norm() / scale : 0.0;
  return out;
}

}  // namespace

TransferValue transfer_eval_with_direction(const Vessel& v, const CurvePoint& p,
                                           const CVec& fiber_vec, const Direction& xi,
                                           const ToleranceProfile& tol) {
  if (!p.is_affine())
    throw std::invalid_argument("transfer_eval_with_direction: point must be affine");
  return eval_at_direction(v, p, fiber_vec, xi, tol, /*enforce_conditioning=*/true);
}

TransferValue transfer_eval(const Vessel& v, const CurvePoint& p, const CVec& fiber_vec,
                            const ToleranceProfile& tol) {
  if (fiber_vec.size() != v.m)
    throw std::invalid_argument("transfer_eval: fiber vector has wrong dimension");

  if (!p.is_affine()) {
    // Value over the line at infinity is D (restricted bundle map value).
    TransferValue out;
    out.value = v.D * fiber_vec;
    const CMat out_pencil = p.l1 * v.sigma2_star - p.l2 * v.sigma1_star;
    const double scale = (std::abs(p.l1) * v.sigma2_star.norm() +
                          std::abs(p.l2) * v.sigma1_star.norm()) *
                         out.value.norm();
    out.out_residual = scale > 0.0 ? (out_pencil * out.value).norm() / scale : 0.0;
    return out;
  }

  // Membership of v in the input fiber doubles as the on-curve check. The
  // scale references the pencil coefficients, not the (near-singular) pencil.
  const CMat in_pencil = p.lambda1 * v.sigma2 - p.lambda2 * v.sigma1 + v.gamma;
  const double in_scale = (std::abs(p.lambda1) * v.sigma2.norm() +
                           std::abs(p.lambda2) * v.sigma1.norm() + v.gamma.norm()) *
                          fiber_vec.norm();
  if (in_scale > 0.0 &&
      (in_pencil * fiber_vec).norm() > 1e3 * tol.residual_tol * in_scale)
    throw std::invalid_argument("transfer_eval: vector is not in the input fiber at p");

  // Sweep a fixed fan of internal directions and keep the best conditioned.
  static const std::vector<Direction> fan = [] {
    std::vector<Direction> f;
    for (int k = 0; k < 16; ++k) {
      double th = std::numbers::pi * k / 16.0;
      f.emplace_back(std::cos(th), std::sin(th));
    }
    f.emplace_back(Complex(1.0, 0.0), Complex(0.0, 0.7));
    f.emplace_back(Complex(0.0, 0.7), Complex(1.0, 0.0));
    f.emplace_back(Complex(1.0, 0.3), Complex(0.3, -1.0));
    f.emplace_back(Complex(0.6, -0.4), Complex(1.0, 0.5));
    return f;
  }();

  const Direction* best = nullptr;
  double best_cond = -1.0;
  for (const Direction& xi : fan) {
    const CMat pencil = xi.xi1 * (p.lambda1 * CMat::Identity(v.n, v.n) - v.A1) +
                        xi.xi2 * (p.lambda2 * CMat::Identity(v.n, v.n) - v.A2);
    if (v.n == 0) {
      best = &xi;
      break;
    }
    Eigen::JacobiSVD<CMat> svd(pencil);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    if (smax == 0.0) continue;
    const double rcond = sv(sv.size() - 1) / smax;
    if (rcond > best_cond) {
      best_cond = rcond;
      best = &xi;
    }
  }
  if (!best || (v.n > 0 && best_cond <= tol.rank_tol))
    throw PoleError("transfer_eval: no invertible direction combination (point at or near the joint spectrum)",
                    best_cond);
  return eval_at_direction(v, p, fiber_vec, *best, tol, /*enforce_conditioning=*/true);
}

RealizedRMF restricted_transfer(const Vessel& v, const Direction& xi, const ToleranceProfile& tol) {
  if (!is_regular_direction(v, xi, tol))
    throw std::invalid_argument("restricted_transfer: xi is not a regular direction");
  RealizedRMF w;
  w.A = v.A_xi(xi);
  w.B = v.B_xi(xi);
  w.C = v.C;
  w.D = v.D;
  w.label = "restricted transfer";
  return w;
}

CMat rmf_eval(const RealizedRMF& w, Complex lambda, const ToleranceProfile& tol) {
  if (!w.dims_ok()) throw std::invalid_argument("rmf_eval: inconsistent realization dims");
  const Eigen::Index k = w.A.rows();
  if (k == 0) return w.D;
  CMat pencil = lambda * CMat::Identity(k, k) - w.A;
  Eigen::JacobiSVD<CMat> svd(pencil, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double pencil_scale = std::max(sv(0), 1.0 + w.A.norm());
  if (sv(0) == 0.0 || sv(sv.size() - 1) <= tol.rank_tol * pencil_scale) {
    Eigen::ComplexEigenSolver<CMat> es(w.A, false);
    double dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i)
      dist = std::min(dist, std::abs(lambda - es.eigenvalues()(i)));
    throw PoleError("rmf_eval: evaluation at a pole", dist);
  }
  return w.D + w.C * svd.solve(CMat(w.B));
}

CMat rmf_value_at_infinity(const RealizedRMF& w) { return w.D; }

RealizedRMF rmf_inverse(const RealizedRMF& w, const ToleranceProfile& tol) {
  if (!w.dims_ok()) throw std::invalid_argument("rmf_inverse: inconsistent realization dims");
  if (rank_with_tol(w.D, tol) < w.io_dim())
    throw std::invalid_argument("rmf_inverse: D-term is singular");
  Eigen::PartialPivLU<CMat> lu(w.D);
  RealizedRMF inv;
  inv.A = w.A - w.B * lu.solve(CMat(w.C));
  inv.B = w.B * lu.inverse();
  inv.C = -lu.solve(CMat(w.C));
  inv.D = lu.inverse();
  inv.label = w.label.empty() ? "inverse" : w.label + "^-1";

  // Product check at sample points away from the poles of both realizations.
  const double radius = w.A.norm() + inv.A.norm() + 1.0;
  int checked = 0;
  for (int s = 0; s < 24 && checked < 10; ++s) {
    double th = 2.0 * std::numbers::pi * s / 24.0 + 0.19;
    Complex lambda = radius * Complex(std::cos(th), std::sin(th));
    CMat w_val, inv_val;
    try {
      w_val = rmf_eval(w, lambda, tol);
      inv_val = rmf_eval(inv, lambda, tol);
    } catch (const PoleError&) {
      continue;
    }
    ++checked;
    CMat err = w_val * inv_val - CMat::Identity(w.io_dim(), w.io_dim());
    if (err.norm() > 1e3 * tol.residual_tol * (1.0 + w_val.norm() * inv_val.norm()))
      throw NumericalError("rmf_inverse: product check failed (ill-conditioned realization)");
  }
  return inv;
}

RealizedRMF rmf_compose(const RealizedRMF& second, const RealizedRMF& first) {
  if (!second.dims_ok() || !first.dims_ok() || second.io_dim() != first.io_dim())
    throw std::invalid_argument("rmf_compose: dimension mismatch");
  const Eigen::Index k1 = first.A.rows(), k2 = second.A.rows(), q = first.io_dim();
  RealizedRMF out;
  out.A = CMat::Zero(k1 + k2, k1 + k2);
  out.A.topLeftCorner(k1, k1) = first.A;
  out.A.bottomLeftCorner(k2, k1) = second.B * first.C;
  out.A.bottomRightCorner(k2, k2) = second.A;
  out.B = CMat::Zero(k1 + k2, q);
  out.B.topRows(k1) = first.B;
  out.B.bottomRows(k2) = second.B * first.D;
  out.C = CMat::Zero(q, k1 + k2);
  out.C.leftCols(k1) = second.D * first.C;
  out.C.rightCols(k2) = second.C;
  out.D = second.D * first.D;
  out.label = second.label + " * " + first.label;
  return out;
}

namespace {

// Krylov blocks normalized per power: A^k B grows like |A|^k and the raw
// matrix would drown the weakly excited directions in the SVD.
CMat ctrb_matrix(const CMat& a, const CMat& b) {
  const Eigen::Index k = a.rows(), q = b.cols();
  CMat out(k, k * q);
  CMat w = b;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double s = w.norm();
    out.middleCols(i * q, q) = s > 0.0 ? CMat(w / s) : w;
    w = a * w;
  }
  return out;
}

CMat obs_matrix(const CMat& c, const CMat& a) {
  const Eigen::Index k = a.rows(), q = c.rows();
  CMat out(k * q, k);
  CMat s = c;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double nrm = s.norm();
    out.middleRows(i * q, q) = nrm > 0.0 ? CMat(s / nrm) : s;
    s = s * a;
  }
  return out;
}

CMat range_basis(const CMat& m, const ToleranceProfile& tol) {
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(0) > 0.0 && sv(i) > tol.rank_tol * sv(0)) ++rank;
  return svd.matrixU().leftCols(rank);
}

}  // namespace

RealizedRMF rmf_minimalize(const RealizedRMF& w, const ToleranceProfile& tol) {
  RealizedRMF cur = w;
  for (int pass = 0; pass < 3; ++pass) {
    if (cur.state_dim() == 0) break;
    // Controllable part.
    CMat uc = range_basis(ctrb_matrix(cur.A, cur.B), tol);
    if (uc.cols() < cur.A.rows()) {
      cur.A = (uc.adjoint() * cur.A * uc).eval();
      cur.B = (uc.adjoint() * cur.B).eval();
      cur.C = (cur.C * uc).eval();
    }
    if (cur.state_dim() == 0) break;
    // Observable part (quotient by the unobservable subspace).
    CMat uo = range_basis(obs_matrix(cur.C, cur.A).adjoint(), tol);
    if (uo.cols() < cur.A.rows()) {
      cur.A = (uo.adjoint() * cur.A * uo).eval();
      cur.B = (uo.adjoint() * cur.B).eval();
      cur.C = (cur.C * uo).eval();
    }
    if (rmf_is_minimal(cur, tol)) break;
  }
  cur.label = w.label.empty() ? "minimal" : w.label;
  return cur;
}

bool rmf_is_minimal(const RealizedRMF& w, const ToleranceProfile& tol) {
  if (!w.dims_ok()) throw std::invalid_argument("rmf_is_minimal: inconsistent dims");
  const Eigen::Index k = w.A.rows();
  if (k == 0) return true;
  return rank_with_tol(ctrb_matrix(w.A, w.B), tol) == k &&
         rank_with_tol(obs_matrix(w.C, w.A), tol) == k;
}

Divisor rmf_pole_divisor(const RealizedRMF& w, const ToleranceProfile& tol) {
  if (!rmf_is_minimal(w, tol))
    throw std::invalid_argument("rmf_pole_divisor: realization is not minimal, pole data unreliable");
  Divisor d;
  if (w.state_dim() == 0) return d;
  for (const EigenPair& p : eig_decompose(w.A, tol)) {
    DivisorEntry e;
    e.point = p.value;
    e.mult = p.multiplicity;
    if (p.multiplicity == 1 && p.left.size() > 0) e.direction = (p.left.adjoint() * w.B).adjoint();
    d.entries.push_back(std::move(e));
  }
  return d;
}

Divisor rmf_zero_divisor(const RealizedRMF& w, const ToleranceProfile& tol) {
  RealizedRMF inv = rmf_inverse(w, tol);
  return rmf_pole_divisor(rmf_minimalize(inv, tol), tol);
}

bool divisor_contains(const Divisor& small, const Divisor& big, const ToleranceProfile& tol) {
  for (const auto& e : small.entries) {
    int avail = 0;
    const DivisorEntry* match = nullptr;
    for (const auto& b : big.entries) {
      if (std::abs(e.point - b.point) <= tol.eig_cluster_tol) {
        avail += b.mult;
        match = &b;
      }
    }
    if (avail < e.mult) return false;
    if (e.direction && match && match->direction && e.mult == 1 && match->mult == 1) {
      const CVec &u = *e.direction, &v = *match->direction;
      double denom = u.norm() * v.norm();
      if (denom == 0.0) return false;
      double cos_angle = std::abs((u.adjoint() * v)(0, 0)) / denom;
      if (1.0 - cos_angle > tol.eig_cluster_tol) return false;
    }
  }
  return true;
}

PlacementCheck placement_condition_check(const RealizedRMF& s, const RealizedRMF& t,
                                         const ToleranceProfile& tol) {
  if (s.io_dim() != t.io_dim())
    throw std::invalid_argument("placement_condition_check: dimension mismatch");
  PlacementCheck out;
  out.lz_s = rmf_zero_divisor(s, tol);
  out.lz_t = rmf_zero_divisor(t, tol);
  out.zero_containment = divisor_contains(out.lz_t, out.lz_s, tol);
  const double d_gap = (t.D - s.D).norm();
  out.infinity_match = d_gap <= tol.residual_tol * std::max({s.D.norm(), t.D.norm(), 1e-300});
  out.conditions_hold = out.zero_containment && out.infinity_match;

  RealizedRMF r = rmf_minimalize(rmf_compose(rmf_inverse(t, tol), s), tol);
  out.lp_r = rmf_pole_divisor(r, tol);
  out.lp_s = rmf_pole_divisor(rmf_minimalize(s, tol), tol);
  out.lemma_pole_containment = divisor_contains(out.lp_r, out.lp_s, tol);
  out.lemma_consistent = out.lemma_pole_containment == out.zero_containment;

  if (!out.zero_containment)
    out.witness = "a left zero of T is not matched in LZ(S)";
  else if (!out.infinity_match)
    out.witness = "value at infinity differs: |D_T - D_S| = " + std::to_string(d_gap);
  return out;
}

}  // namespace vessel
