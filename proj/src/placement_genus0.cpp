#include "vessel/placement_genus0.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vessel/errors.hpp"

namespace vessel {

Complex RationalFunctionBasis::eval(int idx, Complex t) const {
  return eval_combo(CVec::Unit(static_cast<Eigen::Index>(coeffs.size()), idx), t);
}

double RationalFunctionBasis::eval_scale(int idx, Complex t) const {
  const CVec& a = coeffs[idx];
  double acc = 0.0;
  for (size_t k = 0; k < terms.size(); ++k) {
    double term = terms[k].order == 0
                      ? 1.0
                      : 1.0 / std::pow(std::abs(t - terms[k].pole), terms[k].order);
    acc += std::abs(a(static_cast<Eigen::Index>(k))) * term;
  }
  return acc;
}

Complex RationalFunctionBasis::eval_combo(const CVec& a, Complex t) const {
  Complex acc = 0.0;
  for (size_t k = 0; k < terms.size(); ++k) {
    Complex combined = 0.0;
    for (int i = 0; i < size(); ++i)
      combined += a(i) * coeffs[i](static_cast<Eigen::Index>(k));
    if (terms[k].order == 0)
      acc += combined;
    else
      acc += combined / std::pow(t - terms[k].pole, static_cast<double>(terms[k].order));
  }
  return acc;
}

Vessel build_line_vessel(const LineVesselSpec& spec, const ToleranceProfile& tol) {
  const int n = spec.n;
  if (n <= 0 || spec.A1.rows() != n || spec.A1.cols() != n || spec.b.size() != n ||
      spec.c_row.rows() != 1 || spec.c_row.cols() != n)
    throw std::invalid_argument("build_line_vessel: inconsistent dimensions");
  if (spec.sigma1 == Complex(0.0) || spec.D == Complex(0.0) || spec.D_tilde == Complex(0.0))
    throw std::invalid_argument("build_line_vessel: sigma1, D, D_tilde must be nonzero");

  // Classical Krylov checks; A2 is a polynomial in A1 so these are the
  // vessel-level checks as well.
  CMat ctrb(n, n), obs(n, n);
  CMat w = spec.b;
  CMat s = spec.c_row;
  for (int k = 0; k < n; ++k) {
    ctrb.col(k) = w;
    obs.row(k) = s;
    w = spec.A1 * w;
    s = s * spec.A1;
  }
  const int rc = rank_with_tol(ctrb, tol), ro = rank_with_tol(obs, tol);
  if (rc < n || ro < n)
    throw std::invalid_argument("build_line_vessel: spec is not minimal (Krylov ranks " +
                                std::to_string(rc) + "/" + std::to_string(ro) + " of " +
                                std::to_string(n) + ")");

  const Complex s1 = spec.sigma1;
  const Complex s1_star = spec.D_tilde * s1 / spec.D;
  Vessel v;
  v.n = n;
  v.m = 1;
  v.m_star = 1;
  v.A1 = spec.A1;
  v.A2 = spec.c * spec.A1 + spec.d * CMat::Identity(n, n);
  v.B_tilde = spec.b;
  v.C = spec.c_row;
  v.D = CMat::Constant(1, 1, spec.D);
  v.D_tilde = CMat::Constant(1, 1, spec.D_tilde);
  v.sigma1 = CMat::Constant(1, 1, s1);
  v.sigma2 = CMat::Constant(1, 1, spec.c * s1);
  v.gamma = CMat::Constant(1, 1, spec.d * s1);
  v.sigma1_star = CMat::Constant(1, 1, s1_star);
  v.sigma2_star = CMat::Constant(1, 1, spec.c * s1_star);
  v.gamma_star = CMat::Constant(1, 1, spec.d * s1_star);
  v.declared_r = 1;
  v.declared_s = 1;
  return v;
}

FeedbackDimension feedback_dimension(int genus, int n, int m, int ell_correction) {
  if (n < 0 || m < 0 || genus < 0 || ell_correction < 0)
    throw std::invalid_argument("feedback_dimension: negative arguments");
  FeedbackDimension out;
  if (genus == 0) {
    out.value = std::max(n - m + 1, 0);  // ell correction vanishes whenever positive
    out.exact = true;
  } else if (genus == 1) {
    out.value = std::max(ell_correction + n - m, 0);
    out.exact = true;
  } else {
    if (n - m > 2 * genus - 2) {
      out.value = n - m - genus + 1;
      out.exact = true;
    } else {
      out.value = std::max(ell_correction + n - m - genus + 1, 0);
      out.exact = false;
    }
  }
  return out;
}

RationalFunctionBasis basis_L_genus0(const Divisor& z, const MarkedPoints& d_inf,
                                     const ToleranceProfile& tol) {
  RationalFunctionBasis basis;
  basis.marks = d_inf;
  std::vector<Complex> q_roots;  // Z support expanded with multiplicity
  for (const auto& e : z.entries) {
    if (e.mult <= 0) throw std::invalid_argument("basis_L_genus0: Z must be effective");
    basis.pole_support.emplace_back(e.point, e.mult);
    for (int k = 0; k < e.mult; ++k) q_roots.push_back(e.point);
  }
  const int deg_z = static_cast<int>(q_roots.size());
  for (Complex q : d_inf.finite)
    for (const auto& [p, o] : basis.pole_support)
      if (std::abs(q - p) <= tol.eig_cluster_tol)
        throw std::invalid_argument("basis_L_genus0: D_inf meets the support of Z");

  basis.terms.push_back({Complex(0.0), 0});  // constant term
  for (const auto& [p, o] : basis.pole_support)
    for (int k = 1; k <= o; ++k) basis.terms.push_back({p, k});

  const int r = deg_z - d_inf.degree() + 1;
  if (r <= 0) return basis;

  // Numerators N(t) t^(r-1-j) over the common denominator Q vanish on the
  // marks by construction. Partial fractions come from the local expansion
  // P/Q_rest at each pole (Taylor shift plus series division), which avoids
  // any global solve.
  UniPoly n_poly = UniPoly::from_roots(d_inf.finite);
  const int dim = deg_z + 1;

  for (int j = 0; j < r; ++j) {
    UniPoly p_num = n_poly;
    for (int e = 0; e < r - 1 - j; ++e) p_num = p_num * UniPoly({0.0, 1.0});
    CVec coeff = CVec::Zero(dim);
    // Constant term: Q is monic of degree deg_z.
    if (static_cast<int>(p_num.c.size()) > deg_z) coeff(0) = p_num.c[deg_z];

    int slot = 1;
    for (const auto& [pole, mult] : basis.pole_support) {
      std::vector<Complex> rest_roots;
      int removed = 0;
      for (Complex zr : q_roots) {
        if (removed < mult && zr == pole) {
          ++removed;
          continue;
        }
        rest_roots.push_back(zr);
      }
      UniPoly q_rest = UniPoly::from_roots(rest_roots);
      std::vector<Complex> p_series = p_num.taylor_at(pole, mult);
      std::vector<Complex> q_series = q_rest.taylor_at(pole, mult);
      // c = p / q as formal power series up to order mult - 1.
      std::vector<Complex> series(mult);
      for (int i = 0; i < mult; ++i) {
        Complex acc = p_series[i];
        for (int l = 1; l <= i; ++l) acc -= q_series[l] * series[i - l];
        series[i] = acc / q_series[0];
      }
      // series[i] multiplies (t - pole)^(i - mult): order k term gets
      // series[mult - k].
      for (int k = 1; k <= mult; ++k) coeff(slot + k - 1) = series[mult - k];
      slot += mult;
    }
    basis.coeffs.push_back(coeff);
  }
  return basis;
}

namespace {

void check_point_tuple(const RationalFunctionBasis& basis, const std::vector<Complex>& points,
                       const ToleranceProfile& tol) {
  const size_t r = basis.coeffs.size();
  if (points.size() != r)
    throw std::invalid_argument("expected exactly " + std::to_string(r) + " points");
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j)
      if (std::abs(points[i] - points[j]) <= tol.eig_cluster_tol)
        throw std::invalid_argument("points must be pairwise distinct");
  for (Complex p : points) {
    for (const auto& [z, o] : basis.pole_support)
      if (std::abs(p - z) <= tol.eig_cluster_tol)
        throw std::invalid_argument("point lies in the pole support of the basis");
    for (Complex q : basis.marks.finite)
      if (std::abs(p - q) <= tol.eig_cluster_tol)
        throw std::invalid_argument("point lies on D_inf");
  }
}

CMat evaluation_matrix(const RationalFunctionBasis& basis, const std::vector<Complex>& points) {
  const int r = basis.size();
  CMat m(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) m(i, j) = basis.eval(i, points[j]);
  return m;
}

}  // namespace

Complex nf_determinant(const RationalFunctionBasis& basis, const std::vector<Complex>& points,
                       const ToleranceProfile& tol) {
  check_point_tuple(basis, points, tol);
  if (basis.size() == 0) return 1.0;
  return evaluation_matrix(basis, points).determinant();
}

CVec solve_interpolation(const RationalFunctionBasis& basis, const std::vector<Complex>& points,
                         const ToleranceProfile& tol) {
  check_point_tuple(basis, points, tol);
  const int r = basis.size();
  if (r == 0) return CVec(0);
  // Rows are the conditions sum_i a_i f_i(p_j) = -1.
  CMat m = evaluation_matrix(basis, points).transpose();
  if (rank_with_tol(m, tol) < r)
    throw NumericalError("solve_interpolation: tuple lies in the No-Feedback set");
  CVec rhs = CVec::Constant(r, Complex(-1.0));
  CVec a = m.partialPivLu().solve(rhs);
  const double resid = (m * a - rhs).norm();
  if (resid > std::max(tol.residual_tol, 1e-8) * (m.norm() * a.norm() + 1.0))
    throw NumericalError("solve_interpolation: solve residual too large");
  return a;
}

BuildFResult build_f(const CVec& coefficients, const RationalFunctionBasis& basis,
                     const ToleranceProfile& tol) {
  if (coefficients.size() != basis.size())
    throw std::invalid_argument("build_f: coefficient count does not match basis");
  BuildFResult out;

  std::vector<Complex> q_roots;
  for (const auto& [p, o] : basis.pole_support)
    for (int k = 0; k < o; ++k) q_roots.push_back(p);
  UniPoly q_poly = UniPoly::from_roots(q_roots);

  // Combined partial-fraction coefficients of g.
  CVec combined = CVec::Zero(static_cast<Eigen::Index>(basis.terms.size()));
  for (int i = 0; i < basis.size(); ++i) combined += coefficients(i) * basis.coeffs[i];

  // Numerator of g over the common denominator Q.
  UniPoly pg = UniPoly::constant(0.0);
  for (size_t k = 0; k < basis.terms.size(); ++k) {
    if (combined(static_cast<Eigen::Index>(k)) == Complex(0.0)) continue;
    UniPoly factor;
    if (basis.terms[k].order == 0) {
      factor = q_poly;
    } else {
      std::vector<Complex> reduced = q_roots;
      for (int rm = 0; rm < basis.terms[k].order; ++rm) {
        auto it = std::find_if(reduced.begin(), reduced.end(), [&](Complex z) {
          return z == basis.terms[k].pole;
        });
        if (it == reduced.end())
          throw NumericalError("build_f: inconsistent basis pole support");
        reduced.erase(it);
      }
      factor = UniPoly::from_roots(reduced);
    }
    pg = pg + factor * combined(static_cast<Eigen::Index>(k));
  }

  out.numerator = q_poly;
  out.denominator = pg + q_poly;
  if (out.denominator.is_zero(1e-13 * std::max(1.0, out.denominator.coeff_scale())))
    throw NumericalError("build_f: g + 1 vanishes identically");

  // Certificate: value one on every mark.
  double worst = 0.0;
  for (Complex q : basis.marks.finite) {
    const Complex fn = out.numerator.eval(q), fd = out.denominator.eval(q);
    const double scale = out.numerator.eval_scale(q) + out.denominator.eval_scale(q);
    worst = std::max(worst, std::abs(fn - fd) / (scale > 0 ? scale : 1.0));
  }
  if (basis.marks.include_infinity) {
    const int dz = static_cast<int>(q_roots.size());
    Complex lead_den = dz < static_cast<int>(out.denominator.c.size())
                           ? out.denominator.c[dz]
                           : Complex(0.0);
    worst = std::max(worst, std::abs(lead_den - Complex(1.0)));
  }
  out.mark_certificate = worst;
  out.certificate_ok = worst <= std::max(tol.residual_tol, 1e-10) * 10.0;

  out.induced_poles = out.denominator.roots();

  // Cancellation bookkeeping: zeros of f sit at the roots of Q unless the
  // denominator vanishes there too.
  std::vector<Complex> zero_roots;
  std::vector<bool> pole_used(out.induced_poles.size(), false);
  for (Complex z : q_roots) {
    const double dval = std::abs(out.denominator.eval(z));
    const double dscale = out.denominator.eval_scale(z) + out.denominator.coeff_scale();
    if (dval <= 1e3 * tol.residual_tol * (dscale > 0 ? dscale : 1.0)) {
      out.cancellations.push_back(z);
      double bestd = std::numeric_limits<double>::infinity();
      int best = -1;
      for (size_t i = 0; i < out.induced_poles.size(); ++i) {
        if (pole_used[i]) continue;
        double dd = std::abs(out.induced_poles[i] - z);
        if (dd < bestd) {
          bestd = dd;
          best = static_cast<int>(i);
        }
      }
      if (best >= 0) pole_used[best] = true;
    } else {
      zero_roots.push_back(z);
    }
  }
  auto clustered = [&](const std::vector<Complex>& pts) {
    std::vector<std::pair<Complex, int>> divisor;
    for (Complex p : pts) {
      bool merged = false;
      for (auto& [c, m] : divisor)
        if (std::abs(c - p) <= tol.eig_cluster_tol) {
          ++m;
          merged = true;
          break;
        }
      if (!merged) divisor.emplace_back(p, 1);
    }
    return divisor;
  };
  out.f_zero_divisor = clustered(zero_roots);
  std::vector<Complex> pole_roots;
  for (size_t i = 0; i < out.induced_poles.size(); ++i)
    if (!pole_used[i]) pole_roots.push_back(out.induced_poles[i]);
  out.f_pole_divisor = clustered(pole_roots);
  return out;
}

CMat ackermann_oracle(const CMat& a, const CVec& b, const std::vector<Complex>& desired,
                      const ToleranceProfile& tol) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || b.size() != n)
    throw std::invalid_argument("ackermann_oracle: A must be square, b of matching size");
  if (static_cast<int>(desired.size()) != n)
    throw std::invalid_argument("ackermann_oracle: need exactly n desired eigenvalues");
  CMat ctrb(n, n);
  CMat w = b;
  for (int k = 0; k < n; ++k) {
    ctrb.col(k) = w;
    w = a * w;
  }
  if (rank_with_tol(ctrb, tol) < n)
    throw std::invalid_argument("ackermann_oracle: pair (A, b) is not controllable");
  CMat pa = CMat::Identity(n, n);
  for (Complex mu : desired) pa = pa * (a - mu * CMat::Identity(n, n));
  CVec en = CVec::Unit(n, n - 1);
  // K = e_n^T Ctrb^-1 p(A)
  CMat k_row = (ctrb.transpose().partialPivLu().solve(en)).transpose() * pa;
  return k_row;
}

PlacementOutcome place_poles_genus0(const Vessel& v, const std::vector<Complex>& desired,
                                    const ToleranceProfile& tol) {
  if (v.m != 1)
    throw std::invalid_argument("place_poles_genus0: single-input (m = 1) vessels only");
  if (v.declared_r != 1 || v.declared_s != 1)
    throw std::invalid_argument("place_poles_genus0: requires declared_r = declared_s = 1");
  if (static_cast<int>(desired.size()) != v.n)
    throw std::invalid_argument("place_poles_genus0: need exactly n desired poles");
  MinimalityReport mr = minimality_report(v, tol);
  if (!mr.minimal)
    throw std::invalid_argument("place_poles_genus0: vessel is not minimal (Krylov ranks " +
                                std::to_string(mr.krylov_rank_ctrb) + "/" +
                                std::to_string(mr.krylov_rank_obs) + ")");

  PlacementOutcome out;
  out.desired = desired;
  out.xi = find_regular_direction(v, tol);
  const CMat a = v.A_xi(out.xi);
  const CMat b_mat = v.B_xi(out.xi);
  const CVec b = b_mat.col(0);
  const int n = v.n;

  std::vector<EigenPair> open_eigs = eig_decompose(a, tol);
  for (const auto& e : open_eigs)
    out.open_loop_poles.entries.push_back({e.value, e.multiplicity, std::nullopt});

  bool distinct = true;
  for (size_t i = 0; i < desired.size() && distinct; ++i)
    for (size_t j = i + 1; j < desired.size(); ++j)
      if (std::abs(desired[i] - desired[j]) <= tol.eig_cluster_tol) {
        distinct = false;
        break;
      }
  bool off_open_spectrum = true;
  for (Complex p : desired)
    for (const auto& e : open_eigs)
      if (std::abs(p - e.value) <= 10.0 * tol.eig_cluster_tol) off_open_spectrum = false;

  if (distinct && off_open_spectrum) {
    out.route = "interpolation";
    MarkedPoints d_inf;
    d_inf.include_infinity = true;
    RationalFunctionBasis basis = basis_L_genus0(out.open_loop_poles, d_inf, tol);
    CVec coeff = solve_interpolation(basis, desired, tol);
    out.f_result = build_f(coeff, basis, tol);

    // Recover F from g = -F (lambda I - A)^-1 B by sampling the resolvent.
    const double radius = a.norm() + 1.5;
    CMat samples(n, n);
    CVec rhs(n);
    int filled = 0;
    for (int s = 0; s < 4 * n && filled < n; ++s) {
      double th = 2.0 * std::numbers::pi * s / (4.0 * n) + 0.37;
      Complex lambda = radius * Complex(std::cos(th), std::sin(th));
      bool near = false;
      for (const auto& e : open_eigs)
        if (std::abs(lambda - e.value) < 1e-3 * radius) near = true;
      for (Complex p : desired)
        if (std::abs(lambda - p) < 1e-6 * radius) near = true;
      if (near) continue;
      CMat pencil = lambda * CMat::Identity(n, n) - a;
      samples.col(filled) = pencil.partialPivLu().solve(b);
      rhs(filled) = -basis.eval_combo(coeff, lambda);
      ++filled;
    }
    if (filled < n)
      throw NumericalError("place_poles_genus0: could not sample the resolvent");
    if (rank_with_tol(samples, tol) < n)
      throw NumericalError("place_poles_genus0: resolvent samples are rank deficient");
    CVec fftrans = samples.transpose().partialPivLu().solve(rhs);
    out.F.F = fftrans.transpose();
  } else {
    out.route = "ackermann";
    CMat k = ackermann_oracle(a, b, desired, tol);
    out.F.F = -k;
  }

  out.admissible = is_admissible(v, out.F, tol).admissible;

  // Achieved closed-loop restricted spectrum vs the desired multiset.
  const CMat a_cl = a + b_mat * out.F.F;
  std::vector<Complex> achieved;
  for (const auto& e : eig_decompose(a_cl, tol))
    for (int k = 0; k < e.multiplicity; ++k) achieved.push_back(e.value);
  out.achieved = achieved;
  std::vector<bool> used(achieved.size(), false);
  double worst = 0.0;
  for (Complex want : desired) {
    double bestd = std::numeric_limits<double>::infinity();
    int best = -1;
    for (size_t i = 0; i < achieved.size(); ++i) {
      if (used[i]) continue;
      double dd = std::abs(achieved[i] - want);
      if (dd < bestd) {
        bestd = dd;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) {
      worst = std::numeric_limits<double>::infinity();
      break;
    }
    used[best] = true;
    worst = std::max(worst, bestd);
  }
  out.spectrum_mismatch = worst;
  const double spread = 1.0 + a_cl.norm();
  out.spectra_match = worst <= std::max(tol.eig_cluster_tol * spread, tol.eig_cluster_tol);

  // Placement conditions between open- and closed-loop restricted transfers,
  // when the closed loop stays minimal (no pole/zero cancellation).
  Vessel cl = closed_loop(v, out.F, tol);
  RealizedRMF s_open = restricted_transfer(v, out.xi, tol);
  RealizedRMF t_closed = restricted_transfer(cl, out.xi, tol);
  if (rmf_is_minimal(t_closed, tol) && rmf_is_minimal(s_open, tol)) {
    out.condition = placement_condition_check(s_open, t_closed, tol);
    out.condition_checked = true;
  }
  return out;
}

}  // namespace vessel
