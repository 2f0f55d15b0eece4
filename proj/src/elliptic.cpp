#include "vessel/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vessel/errors.hpp"

namespace vessel {

namespace {
// Affine coordinates beyond this magnitude are treated as the identity;
// matches a 1e-8 neighbourhood of O in the chart at infinity.
constexpr double kIdentityCoord = 1e8;
}  // namespace

bool EllipticCurve::nonsingular(const ToleranceProfile& tol) const {
  const Complex disc = 4.0 * a * a * a + 27.0 * b * b;
  const double scale = 4.0 * std::pow(std::abs(a), 3) + 27.0 * std::pow(std::abs(b), 2) + 1.0;
  return std::abs(disc) > tol.residual_tol * scale;
}

Complex MillerFunction::eval_at_infinity() const {
  long order = 0;
  Complex acc = scale;
  for (const auto& [line, exp] : factors) {
    const bool vertical = line.beta == Complex(0.0);
    order += exp * (vertical ? -2 : -3);
    const Complex lead = vertical ? line.alpha : line.beta;
    if (exp > 0)
      for (int k = 0; k < exp; ++k) acc *= lead;
    else
      for (int k = 0; k < -exp; ++k) acc /= lead;
  }
  if (order != 0)
    throw std::invalid_argument("MillerFunction::eval_at_infinity: pole or zero at O");
  return acc;
}

Complex MillerFunction::eval(const ECPoint& p) const {
  if (p.is_infinity()) return eval_at_infinity();
  Complex acc = scale;
  for (const auto& [line, exp] : factors) {
    const Complex v = line.eval(p);
    const double line_scale = std::abs(line.alpha) * std::abs(p.x) +
                              std::abs(line.beta) * std::abs(p.y) + std::abs(line.gamma) + 1e-300;
    if (std::abs(v) <= 1e-12 * line_scale)
      throw std::invalid_argument("MillerFunction::eval: point is on the support");
    if (exp > 0)
      for (int k = 0; k < exp; ++k) acc *= v;
    else
      for (int k = 0; k < -exp; ++k) acc /= v;
  }
  return acc;
}

bool ec_on_curve(const EllipticCurve& e, const ECPoint& p, const ToleranceProfile& tol) {
  if (p.is_infinity()) return true;
  const Complex resid = p.y * p.y - (p.x * p.x * p.x + e.a * p.x + e.b);
  const double scale = std::norm(p.y) + std::pow(std::abs(p.x), 3) +
                       std::abs(e.a) * std::abs(p.x) + std::abs(e.b) + 1.0;
  return std::abs(resid) <= tol.residual_tol * scale;
}

bool ec_same_point(const ECPoint& p, const ECPoint& q, const ToleranceProfile& tol) {
  if (p.is_infinity() || q.is_infinity()) return p.is_infinity() && q.is_infinity();
  const double ctol = tol.eig_cluster_tol;
  return std::abs(p.x - q.x) <= ctol * (1.0 + std::max(std::abs(p.x), std::abs(q.x))) &&
         std::abs(p.y - q.y) <= ctol * (1.0 + std::max(std::abs(p.y), std::abs(q.y)));
}

ECPoint ec_negate(const ECPoint& p) {
  if (p.is_infinity()) return p;
  return ECPoint::affine(p.x, -p.y);
}

ECPoint ec_group_op(const EllipticCurve& e, const ECPoint& p, const ECPoint& q,
                    const ToleranceProfile& tol) {
  if (!ec_on_curve(e, p, tol) || !ec_on_curve(e, q, tol))
    throw std::invalid_argument("ec_group_op: point is not on the curve");
  if (p.is_infinity()) return q;
  if (q.is_infinity()) return p;

  const double ctol = tol.eig_cluster_tol;
  Complex slope;
  if (std::abs(p.x - q.x) <= ctol * (1.0 + std::max(std::abs(p.x), std::abs(q.x)))) {
    if (std::abs(p.y + q.y) <= ctol * (1.0 + std::abs(p.y) + std::abs(q.y)))
      return ECPoint::O();  // inverse pair (or 2-torsion tangent)
    slope = (3.0 * p.x * p.x + e.a) / (2.0 * p.y);
  } else {
    slope = (q.y - p.y) / (q.x - p.x);
  }
  const Complex x3 = slope * slope - p.x - q.x;
  const Complex y3 = slope * (p.x - x3) - p.y;
  if (std::abs(x3) >= kIdentityCoord) return ECPoint::O();
  return ECPoint::affine(x3, y3);
}

ECPoint ec_scalar_mult(const EllipticCurve& e, long n, const ECPoint& p,
                       const ToleranceProfile& tol) {
  if (n == 0 || p.is_infinity()) return ECPoint::O();
  ECPoint base = n > 0 ? p : ec_negate(p);
  unsigned long k = static_cast<unsigned long>(n > 0 ? n : -n);
  ECPoint acc = ECPoint::O();
  while (k > 0) {
    if (k & 1UL) acc = ec_group_op(e, acc, base, tol);
    k >>= 1UL;
    if (k > 0) base = ec_group_op(e, base, base, tol);
  }
  return acc;
}

ECPoint phi_of_divisor(const EllipticCurve& e, const ECDivisor& d, const ToleranceProfile& tol) {
  ECPoint acc = ECPoint::O();
  for (const auto& [p, m] : d.entries) {
    if (!ec_on_curve(e, p, tol))
      throw std::invalid_argument("phi_of_divisor: divisor point is not on the curve");
    acc = ec_group_op(e, acc, ec_scalar_mult(e, m, p, tol), tol);
  }
  return acc;
}

namespace {

bool is_identity(const ECPoint& p) {
  return p.is_infinity() || std::abs(p.x) >= kIdentityCoord;
}

}  // namespace

bool is_principal(const EllipticCurve& e, const ECDivisor& d, const ToleranceProfile& tol) {
  if (d.degree() != 0) return false;
  return is_identity(phi_of_divisor(e, d, tol));
}

namespace {

ECLine vertical_line(const ECPoint& p) { return ECLine{1.0, 0.0, -p.x}; }

// Chord through two distinct points, or the tangent when they coincide.
// Callers guarantee the line is not vertical.
ECLine chord_line(const EllipticCurve& e, const ECPoint& p, const ECPoint& q,
                  const ToleranceProfile& tol) {
  Complex slope;
  if (ec_same_point(p, q, tol))
    slope = (3.0 * p.x * p.x + e.a) / (2.0 * p.y);
  else
    slope = (q.y - p.y) / (q.x - p.x);
  return ECLine{-slope, 1.0, slope * p.x - p.y};
}

struct WorkingDivisor {
  std::vector<std::pair<ECPoint, int>> affine;
  int at_o = 0;

  void add(const ECPoint& p, int delta, const ToleranceProfile& tol) {
    if (p.is_infinity()) {
      at_o += delta;
      return;
    }
    for (auto& [q, m] : affine)
      if (ec_same_point(p, q, tol)) {
        m += delta;
        if (m == 0)
          affine.erase(std::remove_if(affine.begin(), affine.end(),
                                      [](const auto& e) { return e.second == 0; }),
                       affine.end());
        return;
      }
    if (delta != 0) affine.emplace_back(p, delta);
  }

  int positive_count() const {
    int c = 0;
    for (const auto& [p, m] : affine)
      if (m > 0) c += m;
    return c;
  }
  int negative_count() const {
    int c = 0;
    for (const auto& [p, m] : affine)
      if (m < 0) c -= m;
    return c;
  }
};

}  // namespace

MillerFunction miller_build(const EllipticCurve& e, const ECDivisor& d,
                            const ToleranceProfile& tol) {
  if (!is_principal(e, d, tol))
    throw std::invalid_argument("miller_build: divisor is not principal");
  MillerFunction fn;
  fn.divisor = d;

  WorkingDivisor work;
  for (const auto& [p, m] : d.entries) {
    if (!ec_on_curve(e, p, tol))
      throw std::invalid_argument("miller_build: divisor point is not on the curve");
    work.add(p, m, tol);
  }

  // Appending a factor line^exp subtracts exp * div(line) from the working
  // divisor; the input divisor always equals work + div(program).
  auto append = [&](const ECLine& line, int exp) { fn.factors.emplace_back(line, exp); };

  auto pick_two = [&](bool positive, ECPoint& p, ECPoint& q) {
    int found = 0;
    for (auto& [pt, m] : work.affine) {
      int avail = positive ? m : -m;
      while (avail > 0 && found < 2) {
        (found == 0 ? p : q) = pt;
        ++found;
        --avail;
      }
      if (found == 2) return;
    }
  };

  // Each pass trades two same-sign affine points for one (or none), so the
  // loop terminates in O(deg) steps.
  const int max_steps = 4 * (work.positive_count() + work.negative_count()) + 64;
  for (int guard = 0; guard < max_steps; ++guard) {
    const int cp = work.positive_count(), cn = work.negative_count();
    if (cp >= 2 || cn >= 2) {
      const bool positive = cp >= 2;
      const int sgn = positive ? +1 : -1;
      ECPoint p, q;
      pick_two(positive, p, q);
      if (ec_same_point(q, ec_negate(p), tol)) {
        // (P) + (-P) - 2(O) is a vertical-line divisor.
        append(vertical_line(p), sgn);
        work.add(p, -sgn, tol);
        work.add(q, -sgn, tol);
        work.at_o += 2 * sgn;
      } else {
        ECPoint s = ec_group_op(e, p, q, tol);
        if (s.is_infinity()) {  // inverse pair caught by the group op
          append(vertical_line(p), sgn);
          work.add(p, -sgn, tol);
          work.add(q, -sgn, tol);
          work.at_o += 2 * sgn;
        } else {
          // (P) + (Q) = (P+Q) + (O) + div(chord / vertical at P+Q).
          append(chord_line(e, p, q, tol), sgn);
          append(vertical_line(s), -sgn);
          work.add(p, -sgn, tol);
          work.add(q, -sgn, tol);
          work.add(s, sgn, tol);
          work.at_o += sgn;
        }
      }
      continue;
    }
    if (cp == 1 && cn == 1) {
      // Reflect the negative point through a vertical so two positives remain.
      const ECPoint neg = [&] {
        for (auto& [pt, m] : work.affine)
          if (m < 0) return pt;
        throw NumericalError("miller_build: lost a negative point");
      }();
      append(vertical_line(neg), -1);
      work.add(neg, +1, tol);
      work.add(ec_negate(neg), +1, tol);
      work.at_o -= 2;
      continue;
    }
    break;
  }

  if (!work.affine.empty() || work.at_o != 0)
    throw NumericalError(
        "miller_build: reduction did not close (principality holds only outside tolerance)");

  // Merge factors with identical lines (exact duplicates produced by the
  // reduction) and drop those that cancel.
  std::vector<std::pair<ECLine, int>> merged;
  for (const auto& [line, exp] : fn.factors) {
    bool found = false;
    for (auto& [ml, me] : merged)
      if (ml.alpha == line.alpha && ml.beta == line.beta && ml.gamma == line.gamma) {
        me += exp;
        found = true;
        break;
      }
    if (!found) merged.emplace_back(line, exp);
  }
  fn.factors.clear();
  for (const auto& [line, exp] : merged)
    if (exp != 0) fn.factors.emplace_back(line, exp);
  return fn;
}

ECPoint forbidden_point(const EllipticCurve& e, const ECDivisor& z, const ECDivisor& d_inf,
                        const std::vector<ECPoint>& partial_points, const ToleranceProfile& tol) {
  const int r = z.degree() - d_inf.degree();
  if (r < 1) throw std::invalid_argument("forbidden_point: requires deg(Z - D_inf) >= 1");
  if (static_cast<int>(partial_points.size()) != r - 1)
    throw std::invalid_argument("forbidden_point: expected r - 1 partial points");
  ECDivisor total;
  for (const auto& [p, m] : z.entries) total.entries.emplace_back(p, m);
  for (const auto& [p, m] : d_inf.entries) total.entries.emplace_back(p, -m);
  for (const ECPoint& p : partial_points) total.entries.emplace_back(p, -1);
  return phi_of_divisor(e, total, tol);
}

Genus1Achievability genus1_achievability(const EllipticCurve& e, const ECDivisor& z,
                                         const ECDivisor& p, const ECDivisor& d_inf,
                                         const ToleranceProfile& tol) {
  for (const auto& [pt, m] : z.entries)
    if (m <= 0) throw std::invalid_argument("genus1_achievability: Z must be effective");
  for (const auto& [pt, m] : p.entries)
    if (m <= 0) throw std::invalid_argument("genus1_achievability: P must be effective");
  if (z.degree() != p.degree())
    throw std::invalid_argument("genus1_achievability: deg P must equal deg Z");

  ECDivisor diff;
  for (const auto& [pt, m] : z.entries) diff.entries.emplace_back(pt, m);
  for (const auto& [pt, m] : p.entries) diff.entries.emplace_back(pt, -m);

  for (const auto& [q, mq] : d_inf.entries)
    for (const auto& [pt, m] : diff.entries)
      if (ec_same_point(q, pt, tol))
        throw std::invalid_argument("genus1_achievability: D_inf meets supp(Z - P)");

  Genus1Achievability out;
  if (!is_principal(e, diff, tol)) return out;

  MillerFunction f = miller_build(e, diff, tol);
  std::vector<Complex> values;
  for (const auto& [q, mq] : d_inf.entries) values.push_back(f.eval(q));
  if (values.empty())
    throw std::invalid_argument("genus1_achievability: D_inf is empty");

  double maxv = 0.0;
  for (Complex v : values) maxv = std::max(maxv, std::abs(v));
  const double agree_tol = std::max(1e3 * tol.residual_tol, 1e-9);
  bool equal = maxv > 0.0;
  for (Complex v : values)
    if (std::abs(v - values[0]) > agree_tol * (maxv + 1.0)) equal = false;
  if (!equal) return out;

  f.scale /= values[0];
  double cert = 0.0;
  for (const auto& [q, mq] : d_inf.entries) cert = std::max(cert, std::abs(f.eval(q) - 1.0));
  out.achievable = true;
  out.f = std::move(f);
  out.certificate = cert;
  return out;
}

}  // namespace vessel
