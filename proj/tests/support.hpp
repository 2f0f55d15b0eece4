#pragma once

#include <random>
#include <vector>

#include "vessel/elliptic.hpp"
#include "vessel/placement_genus0.hpp"
#include "vessel/transfer.hpp"
#include "vessel/vessel.hpp"

namespace testsupport {

using vessel::CMat;
using vessel::Complex;
using vessel::CVec;

class Rng {
 public:
  explicit Rng(unsigned seed) : gen_(seed) {}

  double real(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  Complex cplx(double scale = 1.0) { return Complex(real(), real()) * scale; }
  Complex cplx_away_from_zero(double lo = 0.4, double hi = 1.6) {
    double mag = real(lo, hi);
    double th = real(0.0, 6.283185307179586);
    return Complex(mag * std::cos(th), mag * std::sin(th));
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  CMat matrix(int rows, int cols, double scale = 1.0) {
    CMat m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = cplx(scale);
    return m;
  }
  CVec vec(int n, double scale = 1.0) {
    CVec v(n);
    for (int i = 0; i < n; ++i) v(i) = cplx(scale);
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

/// Random minimal line-family vessel with n in [1, max_n].
inline vessel::LineVesselSpec random_line_spec(Rng& rng, int max_n = 8) {
  vessel::LineVesselSpec spec;
  for (int attempt = 0; attempt < 64; ++attempt) {
    spec.n = rng.integer(1, max_n);
    spec.A1 = rng.matrix(spec.n, spec.n);
    spec.c = rng.cplx_away_from_zero(0.5, 1.5);
    spec.d = rng.cplx();
    spec.sigma1 = rng.cplx_away_from_zero();
    spec.b = rng.vec(spec.n);
    spec.c_row = rng.matrix(1, spec.n);
    spec.D = rng.cplx_away_from_zero();
    spec.D_tilde = rng.cplx_away_from_zero();
    try {
      vessel::build_line_vessel(spec, vessel::ToleranceProfile{});
      return spec;
    } catch (const std::invalid_argument&) {
      continue;  // resample on a non-minimal draw
    }
  }
  throw std::runtime_error("random_line_spec: could not draw a minimal spec");
}

inline vessel::Vessel random_line_vessel(Rng& rng, int max_n = 8) {
  return vessel::build_line_vessel(random_line_spec(rng, max_n), vessel::ToleranceProfile{});
}

/// Block direct sum of two line-family vessels: a genuinely two-input vessel
/// on which a generic F is inadmissible (the admissible set is the
/// block-diagonal feedbacks).
inline vessel::Vessel direct_sum_line_vessels(Rng& rng, int max_n_each = 4) {
  using vessel::ToleranceProfile;
  const ToleranceProfile tol;
  for (int attempt = 0; attempt < 64; ++attempt) {
    vessel::Vessel a = random_line_vessel(rng, max_n_each);
    vessel::Vessel b = random_line_vessel(rng, max_n_each);
    vessel::Vessel v;
    v.n = a.n + b.n;
    v.m = 2;
    v.m_star = 2;
    auto blk = [&](const CMat& x, const CMat& y) {
      CMat out = CMat::Zero(x.rows() + y.rows(), x.cols() + y.cols());
      out.topLeftCorner(x.rows(), x.cols()) = x;
      out.bottomRightCorner(y.rows(), y.cols()) = y;
      return out;
    };
    v.A1 = blk(a.A1, b.A1);
    v.A2 = blk(a.A2, b.A2);
    v.B_tilde = blk(a.B_tilde, b.B_tilde);
    v.C = blk(a.C, b.C);
    v.D = blk(a.D, b.D);
    v.D_tilde = blk(a.D_tilde, b.D_tilde);
    v.sigma1 = blk(a.sigma1, b.sigma1);
    v.sigma2 = blk(a.sigma2, b.sigma2);
    v.gamma = blk(a.gamma, b.gamma);
    v.sigma1_star = blk(a.sigma1_star, b.sigma1_star);
    v.sigma2_star = blk(a.sigma2_star, b.sigma2_star);
    v.gamma_star = blk(a.gamma_star, b.gamma_star);
    v.declared_r = 1;
    v.declared_s = 1;
    if (vessel::validate_vessel(v, tol).pass) return v;
  }
  throw std::runtime_error("direct_sum_line_vessels: could not build a valid vessel");
}

/// Scalar rational function from prescribed simple zeros/poles (equal counts)
/// realized in diagonal state-space form via partial fractions.
inline vessel::RealizedRMF scalar_rmf(const std::vector<Complex>& zeros,
                                      const std::vector<Complex>& poles, Complex gain) {
  const int n = static_cast<int>(poles.size());
  vessel::RealizedRMF w;
  w.A = CMat::Zero(n, n);
  w.B = CMat::Ones(n, 1);
  w.C = CMat::Zero(1, n);
  // S = gain * prod(l - z_i) / prod(l - p_i) with deg num == deg den:
  // D = gain, residues r_k = gain * prod(p_k - z_i) / prod_{j != k}(p_k - p_j).
  w.D = CMat::Constant(1, 1, gain);
  for (int k = 0; k < n; ++k) {
    w.A(k, k) = poles[k];
    Complex num = gain, den = 1.0;
    for (Complex z : zeros) num *= poles[k] - z;
    for (int j = 0; j < n; ++j)
      if (j != k) den *= poles[k] - poles[j];
    w.C(0, k) = num / den;
  }
  return w;
}

/// Random affine point on y^2 = x^3 + ax + b via a complex square root.
inline vessel::ECPoint random_ec_point(Rng& rng, const vessel::EllipticCurve& e) {
  Complex x = rng.cplx(1.2);
  Complex y = std::sqrt(x * x * x + e.a * x + e.b);
  if (rng.real() > 0.0) y = -y;
  return vessel::ECPoint::affine(x, y);
}

inline vessel::EllipticCurve random_curve(Rng& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    vessel::EllipticCurve e{rng.cplx_away_from_zero(0.5, 1.5), rng.cplx_away_from_zero(0.5, 1.5)};
    if (e.nonsingular(vessel::ToleranceProfile{})) return e;
  }
  throw std::runtime_error("random_curve: could not draw a nonsingular curve");
}

inline double rel_gap(const CVec& a, const CVec& b) {
  return (a - b).norm() / (std::max(a.norm(), b.norm()) + 1e-300);
}

inline double point_gap(const vessel::ECPoint& p, const vessel::ECPoint& q) {
  if (p.is_infinity() || q.is_infinity())
    return p.is_infinity() == q.is_infinity() ? 0.0 : 1.0;
  return std::abs(p.x - q.x) / (1.0 + std::max(std::abs(p.x), std::abs(q.x))) +
         std::abs(p.y - q.y) / (1.0 + std::max(std::abs(p.y), std::abs(q.y)));
}

}  // namespace testsupport
