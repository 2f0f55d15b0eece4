#include "vessel/vessel.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "vessel/errors.hpp"

namespace vessel {

Direction::Direction(Complex x1, Complex x2) {
  double nrm = std::sqrt(std::norm(x1) + std::norm(x2));
  if (nrm == 0.0) throw std::invalid_argument("Direction: xi must be nonzero");
  x1 /= nrm;
  x2 /= nrm;
  Complex lead = std::abs(x1) > 1e-14 ? x1 : x2;
  Complex phase = lead / std::abs(lead);
  xi1 = x1 / phase;
  xi2 = x2 / phase;
}

bool Vessel::dimensions_consistent() const {
  if (n < 0 || m <= 0 || m_star <= 0) return false;
  auto is = [](const CMat& M, int r, int c) { return M.rows() == r && M.cols() == c; };
  return is(A1, n, n) && is(A2, n, n) && is(B_tilde, n, m) && is(C, m_star, n) &&
         is(D, m_star, m) && is(D_tilde, m_star, m_star) && is(sigma1, m, m) &&
         is(sigma2, m, m) && is(gamma, m, m) && is(sigma1_star, m_star, m_star) &&
         is(sigma2_star, m_star, m_star) && is(gamma_star, m_star, m_star);
}

ValidationReport validate_vessel(const Vessel& v, const ToleranceProfile& tol) {
  ValidationReport rep;
  if (!v.dimensions_consistent()) {
    rep.structural_ok = false;
    rep.structural_message = "inconsistent operator dimensions";
    rep.pass = false;
    return rep;
  }
  if (v.m != v.m_star) {
    // Invertibility of D forces dim E = dim E_star; the (A4) equations are
    // not even well-typed otherwise.
    rep.structural_ok = false;
    rep.structural_message = "m != m_star: D cannot be invertible";
    rep.pass = false;
    return rep;
  }
  auto add = [&](const std::string& name, const CMat& resid, double scale) {
    ValidationReport::Entry e;
    e.name = name;
    e.residual = resid.norm();
    e.scale = scale;
    e.pass = e.residual <= tol.residual_tol * scale;
    rep.conditions.push_back(e);
  };
  const double nA1 = v.A1.norm(), nA2 = v.A2.norm(), nB = v.B_tilde.norm(),
               nC = v.C.norm(), nD = v.D.norm(), nDt = v.D_tilde.norm(),
               ns1 = v.sigma1.norm(), ns2 = v.sigma2.norm(), ng = v.gamma.norm(),
               ns1s = v.sigma1_star.norm(), ns2s = v.sigma2_star.norm(),
               ngs = v.gamma_star.norm();

  add("A1: commutation", v.A1 * v.A2 - v.A2 * v.A1, 2.0 * nA1 * nA2);
  add("A2: input linkage",
      v.A1 * v.B_tilde * v.sigma2 - v.A2 * v.B_tilde * v.sigma1 + v.B_tilde * v.gamma,
      nA1 * nB * ns2 + nA2 * nB * ns1 + nB * ng);
  add("A3: output linkage",
      v.sigma2_star * v.C * v.A1 - v.sigma1_star * v.C * v.A2 + v.gamma_star * v.C,
      ns2s * nC * nA1 + ns1s * nC * nA2 + ngs * nC);
  {
    // Both sigma-intertwining equations of (A4) report as one condition.
    CMat stacked(2 * v.m_star, v.m);
    stacked.topRows(v.m_star) = v.sigma1_star * v.D - v.D_tilde * v.sigma1;
    stacked.bottomRows(v.m_star) = v.sigma2_star * v.D - v.D_tilde * v.sigma2;
    add("A4: sigma intertwining", stacked,
        ns1s * nD + nDt * ns1 + ns2s * nD + nDt * ns2);
  }
  add("A4: gamma linkage",
      v.gamma_star * v.D - v.D_tilde * v.gamma -
          v.sigma1_star * v.C * v.B_tilde * v.sigma2 +
          v.sigma2_star * v.C * v.B_tilde * v.sigma1,
      ngs * nD + nDt * ng + ns1s * nC * nB * ns2 + ns2s * nC * nB * ns1);

  rep.d_invertible = v.m == v.m_star && rank_with_tol(v.D, tol) == v.m;
  rep.d_tilde_invertible = rank_with_tol(v.D_tilde, tol) == v.m_star;
  rep.pass = rep.d_invertible && rep.d_tilde_invertible;
  for (const auto& e : rep.conditions) rep.pass = rep.pass && e.pass;
  return rep;
}

DiscriminantResult discriminant_polys(const Vessel& v, const ToleranceProfile& tol) {
  DiscriminantResult out;
  out.p_in = BivariatePoly::pencil_determinant(v.sigma1, v.sigma2, v.gamma);
  out.p_out = BivariatePoly::pencil_determinant(v.sigma1_star, v.sigma2_star, v.gamma_star);
  Complex mu;
  if (out.p_out.proportional_to(out.p_in, tol, &mu)) out.mu = mu;
  return out;
}

bool is_regular_direction(const Vessel& v, const Direction& xi, const ToleranceProfile& tol) {
  Eigen::JacobiSVD<CMat> svd(v.sigma_xi(xi));
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return false;
  return sv(sv.size() - 1) > tol.rank_tol * sv(0);
}

Direction find_regular_direction(const Vessel& v, const ToleranceProfile& tol, int max_tries) {
  std::vector<Direction> fixed = {
      Direction(1.0, 0.0), Direction(0.0, 1.0), Direction(1.0, 1.0),
      Direction(1.0, -1.0), Direction(1.0, Complex(0.0, 1.0))};
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < max_tries; ++k) {
    Direction cand = k < static_cast<int>(fixed.size())
                         ? fixed[k]
                         : Direction(Complex(u(rng), u(rng)), Complex(u(rng), u(rng)));
    if (is_regular_direction(v, cand, tol)) return cand;
  }
  throw NumericalError("no regular direction found: det(sigma_xi) may vanish identically");
}

namespace {

FiberBasis pencil_kernel(const CMat& pencil, double pencil_scale, const CurvePoint& p,
                         FiberSide side, int expected, const ToleranceProfile& tol) {
  FiberBasis fb;
  fb.point = p;
  fb.side = side;
  fb.basis = nullspace_basis_scaled(pencil, pencil_scale, tol);
  if (fb.basis.cols() == 0)
    throw NumericalError("curve fiber: empty kernel at an on-curve point (numerical inconsistency)");
  const double scale = std::max(pencil_scale, pencil.norm());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < fb.basis.cols(); ++j)
    worst = std::max(worst, (pencil * fb.basis.col(j)).norm() / (scale > 0 ? scale : 1.0));
  fb.residual = worst;
  fb.expected_dim = expected;
  fb.maximality_ok = expected < 0 || fb.basis.cols() == expected;
  return fb;
}

}  // namespace

FiberBasis curve_fiber(const Vessel& v, const CurvePoint& p, FiberSide side,
                       const ToleranceProfile& tol) {
  if (!p.is_affine()) throw std::invalid_argument("curve_fiber: point must be affine");
  const bool input = side == FiberSide::input;
  const CMat pencil = input
                          ? (p.lambda1 * v.sigma2 - p.lambda2 * v.sigma1 + v.gamma).eval()
                          : (p.lambda1 * v.sigma2_star - p.lambda2 * v.sigma1_star + v.gamma_star).eval();
  const double pencil_scale =
      input ? std::abs(p.lambda1) * v.sigma2.norm() + std::abs(p.lambda2) * v.sigma1.norm() +
                  v.gamma.norm()
            : std::abs(p.lambda1) * v.sigma2_star.norm() +
                  std::abs(p.lambda2) * v.sigma1_star.norm() + v.gamma_star.norm();
  BivariatePoly poly = input ? BivariatePoly::pencil_determinant(v.sigma1, v.sigma2, v.gamma)
                             : BivariatePoly::pencil_determinant(v.sigma1_star, v.sigma2_star,
                                                                 v.gamma_star);
  const double value = std::abs(poly.eval(p.lambda1, p.lambda2));
  const double scale = poly.eval_scale(p.lambda1, p.lambda2);
  if (value > tol.residual_tol * scale)
    throw std::invalid_argument("curve_fiber: point is not on the discriminant curve");
  // Maximality check only where smoothness is certified.
  int expected = -1;
  if (poly.smooth_at(p.lambda1, p.lambda2, tol))
    expected = input ? v.declared_r : v.declared_s;
  return pencil_kernel(pencil, pencil_scale, p, side, expected, tol);
}

FiberBasis infinity_fiber(const Vessel& v, const CurvePoint& p, FiberSide side,
                          const ToleranceProfile& tol) {
  if (p.is_affine()) throw std::invalid_argument("infinity_fiber: point must be at infinity");
  const CMat pencil = side == FiberSide::input
                          ? (p.l1 * v.sigma2 - p.l2 * v.sigma1).eval()
                          : (p.l1 * v.sigma2_star - p.l2 * v.sigma1_star).eval();
  const double pencil_scale =
      side == FiberSide::input
          ? std::abs(p.l1) * v.sigma2.norm() + std::abs(p.l2) * v.sigma1.norm()
          : std::abs(p.l1) * v.sigma2_star.norm() + std::abs(p.l2) * v.sigma1_star.norm();
  return pencil_kernel(pencil, pencil_scale, p, side, -1, tol);
}

CurveSample sample_curve_points(const BivariatePoly& p_in, int count, unsigned seed,
                                const ToleranceProfile& tol) {
  if (p_in.is_constant())
    throw std::invalid_argument("sample_curve_points: polynomial is constant");
  CurveSample out;

  auto inf = p_in.infinity_directions();
  for (size_t i = 0; i < inf.size(); ++i)
    for (size_t j = i + 1; j < inf.size(); ++j) {
      Complex cross = inf[i].first * inf[j].second - inf[i].second * inf[j].first;
      if (std::abs(cross) <= tol.eig_cluster_tol)
        throw NumericalError(
            "sample_curve_points: repeated point at infinity (transversality assumption violated)");
    }
  for (auto& [h1, h2] : inf) out.at_infinity.push_back(CurvePoint::at_infinity(h1, h2));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.8, 1.8);
  const int max_attempts = 60 + 40 * count;
  int attempts = 0;
  while (static_cast<int>(out.affine.size()) < count && attempts++ < max_attempts) {
    Complex l1(u(rng), u(rng));
    UniPoly slice = p_in.slice_at_lambda1(l1);
    if (slice.is_zero(1e-14 * std::max(1.0, p_in.coeff_scale()))) continue;  // resample
    if (slice.coeff_scale() == 0.0) continue;
    int deg = static_cast<int>(slice.c.size()) - 1;
    while (deg > 0 && std::abs(slice.c[deg]) <= 1e-12 * slice.coeff_scale()) --deg;
    if (deg == 0) continue;  // no lambda2 roots on this slice
    for (Complex l2 : slice.roots()) {
      if (static_cast<int>(out.affine.size()) >= count) break;
      double value = std::abs(p_in.eval(l1, l2));
      double scale = p_in.eval_scale(l1, l2);
      if (value <= tol.residual_tol * scale) out.affine.push_back(CurvePoint::affine(l1, l2));
    }
  }
  if (static_cast<int>(out.affine.size()) < count)
    throw NumericalError("sample_curve_points: could not collect requested points");
  return out;
}

namespace {

CMat stacked_krylov_ctrb(const Vessel& v) {
  const int n = v.n;
  std::vector<CMat> a2_pows;  // A2^k B
  CMat w = v.B_tilde;
  for (int k = 0; k < n; ++k) {
    a2_pows.push_back(w);
    w = v.A2 * w;
  }
  std::vector<CMat> blocks;
  for (int n2 = 0; n2 < n; ++n2) {
    CMat z = a2_pows[n2];
    for (int n1 = 0; n1 + n2 < n; ++n1) {
      blocks.push_back(z);
      z = v.A1 * z;
    }
  }
  CMat out(n, static_cast<Eigen::Index>(blocks.size()) * v.m);
  for (size_t i = 0; i < blocks.size(); ++i)
    out.middleCols(static_cast<Eigen::Index>(i) * v.m, v.m) = blocks[i];
  return out;
}

CMat stacked_krylov_obs(const Vessel& v) {
  const int n = v.n;
  std::vector<CMat> a1_rows;  // C A1^k
  CMat s = v.C;
  for (int k = 0; k < n; ++k) {
    a1_rows.push_back(s);
    s = s * v.A1;
  }
  std::vector<CMat> blocks;
  for (int n1 = 0; n1 < n; ++n1) {
    CMat t = a1_rows[n1];
    for (int n2 = 0; n1 + n2 < n; ++n2) {
      blocks.push_back(t);
      t = t * v.A2;
    }
  }
  CMat out(static_cast<Eigen::Index>(blocks.size()) * v.m_star, n);
  for (size_t i = 0; i < blocks.size(); ++i)
    out.middleRows(static_cast<Eigen::Index>(i) * v.m_star, v.m_star) = blocks[i];
  return out;
}

}  // namespace

MinimalityReport minimality_report(const Vessel& v, const ToleranceProfile& tol) {
  MinimalityReport rep;
  if (v.n == 0) {
    rep.controllable = rep.observable = rep.minimal = true;
    return rep;
  }
  rep.krylov_rank_ctrb = rank_with_tol(stacked_krylov_ctrb(v), tol);
  rep.krylov_rank_obs = rank_with_tol(stacked_krylov_obs(v), tol);
  rep.controllable = rep.krylov_rank_ctrb == v.n;
  rep.observable = rep.krylov_rank_obs == v.n;
  rep.minimal = rep.controllable && rep.observable;
  return rep;
}

RestrictedMinimality restricted_minimality(const Vessel& v, const Direction& xi,
                                           const ToleranceProfile& tol) {
  RestrictedMinimality out;
  const int n = v.n;
  if (n == 0) {
    out.controllable = out.observable = out.minimal = true;
    return out;
  }
  const CMat a = v.A_xi(xi), b = v.B_xi(xi);
  CMat ctrb(n, static_cast<Eigen::Index>(n) * v.m);
  CMat w = b;
  for (int k = 0; k < n; ++k) {
    ctrb.middleCols(static_cast<Eigen::Index>(k) * v.m, v.m) = w;
    w = a * w;
  }
  CMat obs(static_cast<Eigen::Index>(n) * v.m_star, n);
  CMat s = v.C;
  for (int k = 0; k < n; ++k) {
    obs.middleRows(static_cast<Eigen::Index>(k) * v.m_star, v.m_star) = s;
    s = s * a;
  }
  out.controllable = rank_with_tol(ctrb, tol) == n;
  out.observable = rank_with_tol(obs, tol) == n;
  out.minimal = out.controllable && out.observable;
  return out;
}

Vessel similarity_transform(const Vessel& v, const CMat& n_iso, const ToleranceProfile& tol) {
  if (n_iso.rows() != v.n || n_iso.cols() != v.n)
    throw std::invalid_argument("similarity_transform: N must be n x n");
  if (v.n > 0 && rank_with_tol(n_iso, tol) < v.n)
    throw std::invalid_argument("similarity_transform: N is numerically singular");
  Vessel out = v;
  if (v.n == 0) return out;
  Eigen::PartialPivLU<CMat> lu(n_iso);
  out.A1 = lu.solve(v.A1 * n_iso);
  out.A2 = lu.solve(v.A2 * n_iso);
  out.B_tilde = lu.solve(v.B_tilde);
  out.C = v.C * n_iso;
  return out;
}

}  // namespace vessel
