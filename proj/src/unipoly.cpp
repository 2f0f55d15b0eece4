#include "vessel/unipoly.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "vessel/errors.hpp"

namespace vessel {

UniPoly UniPoly::from_roots(const std::vector<Complex>& roots, Complex lead) {
  UniPoly p({lead});
  for (Complex r : roots) p = p * UniPoly({-r, 1.0});
  return p;
}

int UniPoly::degree() const {
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
    if (c[i] != Complex(0.0)) return i;
  return -1;
}

bool UniPoly::is_zero(double abs_eps) const {
  for (const Complex& v : c)
    if (std::abs(v) > abs_eps) return false;
  return true;
}

Complex UniPoly::eval(Complex x) const {
  Complex acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double UniPoly::eval_scale(Complex x) const {
  double acc = 0.0, p = 1.0;
  const double ax = std::abs(x);
  for (const Complex& v : c) {
    acc += std::abs(v) * p;
    p *= ax;
  }
  return acc;
}

double UniPoly::coeff_scale() const {
  double m = 0.0;
  for (const Complex& v : c) m = std::max(m, std::abs(v));
  return m;
}

UniPoly UniPoly::derivative() const {
  if (c.size() <= 1) return UniPoly({Complex(0.0)});
  std::vector<Complex> d(c.size() - 1);
  for (size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
  return UniPoly(std::move(d));
}

void UniPoly::trim(double abs_eps) {
  while (c.size() > 1 && std::abs(c.back()) <= abs_eps) c.pop_back();
  for (Complex& v : c)
    if (std::abs(v) <= abs_eps) v = 0.0;
}

UniPoly UniPoly::operator+(const UniPoly& o) const {
  std::vector<Complex> out(std::max(c.size(), o.c.size()), Complex(0.0));
  for (size_t i = 0; i < c.size(); ++i) out[i] += c[i];
  for (size_t i = 0; i < o.c.size(); ++i) out[i] += o.c[i];
  return UniPoly(std::move(out));
}

UniPoly UniPoly::operator-(const UniPoly& o) const {
  std::vector<Complex> out(std::max(c.size(), o.c.size()), Complex(0.0));
  for (size_t i = 0; i < c.size(); ++i) out[i] += c[i];
  for (size_t i = 0; i < o.c.size(); ++i) out[i] -= o.c[i];
  return UniPoly(std::move(out));
}

UniPoly UniPoly::operator*(const UniPoly& o) const {
  if (c.empty() || o.c.empty()) return UniPoly({Complex(0.0)});
  std::vector<Complex> out(c.size() + o.c.size() - 1, Complex(0.0));
  for (size_t i = 0; i < c.size(); ++i)
    for (size_t j = 0; j < o.c.size(); ++j) out[i + j] += c[i] * o.c[j];
  return UniPoly(std::move(out));
}

UniPoly UniPoly::operator*(Complex s) const {
  UniPoly out = *this;
  for (Complex& v : out.c) v *= s;
  return out;
}

std::vector<Complex> UniPoly::taylor_at(Complex z, int order) const {
  std::vector<Complex> taylor;
  std::vector<Complex> cur = c;
  for (int k = 0; k < order && !cur.empty(); ++k) {
    const int deg = static_cast<int>(cur.size()) - 1;
    if (deg == 0) {
      taylor.push_back(cur[0]);
      cur.clear();
      continue;
    }
    std::vector<Complex> quot(deg);
    quot[deg - 1] = cur[deg];
    for (int i = deg - 1; i >= 1; --i) quot[i - 1] = cur[i] + z * quot[i];
    taylor.push_back(cur[0] + z * quot[0]);
    cur = std::move(quot);
  }
  taylor.resize(order, Complex(0.0));
  return taylor;
}

std::vector<Complex> UniPoly::roots() const {
  // Effective degree: drop leading coefficients that are negligible
  // relative to the largest one.
  const double scale = coeff_scale();
  if (scale == 0.0) throw NumericalError("UniPoly::roots: zero polynomial");
  int deg = static_cast<int>(c.size()) - 1;
  while (deg > 0 && std::abs(c[deg]) <= 1e-14 * scale) --deg;
  if (deg == 0) return {};

  CMat companion = CMat::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -c[i] / c[deg];
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<CMat> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("UniPoly::roots: eigen solver failed");
  std::vector<Complex> out(deg);
  for (int i = 0; i < deg; ++i) out[i] = solver.eigenvalues()(i);
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

}  // namespace vessel
