#include "vessel/bipoly.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vessel/errors.hpp"

namespace vessel {

namespace {
constexpr double kTrimRel = 1e-11;
}

BivariatePoly BivariatePoly::pencil_determinant(const CMat& s1, const CMat& s2,
                                                const CMat& g) {
  const Eigen::Index m = s1.rows();
  if (s1.cols() != m || s2.rows() != m || s2.cols() != m || g.rows() != m ||
      g.cols() != m)
    throw std::invalid_argument("pencil_determinant: operands must be square and equal-sized");
  const Eigen::Index k = m + 1;  // grid size per variable, degree <= m

  CMat nodes_pow(k, k);  // V[a][i] = x_a^i with x_a the k-th roots of unity
  std::vector<Complex> nodes(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    double th = 2.0 * std::numbers::pi * static_cast<double>(a) / static_cast<double>(k);
    nodes[a] = Complex(std::cos(th), std::sin(th));
    for (Eigen::Index i = 0; i < k; ++i) nodes_pow(a, i) = std::pow(nodes[a], static_cast<double>(i));
  }

  CMat evals(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b)
      evals(a, b) = (nodes[a] * s2 - nodes[b] * s1 + g).determinant();

  Eigen::PartialPivLU<CMat> lu(nodes_pow);
  CMat t1 = lu.solve(evals);          // V^-1 E
  CMat coeffs = lu.solve(t1.transpose()).transpose();  // (V^-1 (V^-1 E)^T)^T
  return BivariatePoly(std::move(coeffs));
}

void BivariatePoly::trim() {
  const double cut = kTrimRel * coeff_scale();
  for (Eigen::Index i = 0; i < coeffs_.rows(); ++i)
    for (Eigen::Index j = 0; j < coeffs_.cols(); ++j)
      if (std::abs(coeffs_(i, j)) <= cut) coeffs_(i, j) = 0.0;
  Eigen::Index r = coeffs_.rows(), c = coeffs_.cols();
  while (r > 1 && coeffs_.row(r - 1).norm() == 0.0) --r;
  while (c > 1 && coeffs_.leftCols(c).col(c - 1).topRows(r).norm() == 0.0) --c;
  coeffs_ = coeffs_.topLeftCorner(r, c).eval();
}

Complex BivariatePoly::coeff(int i, int j) const {
  if (i < 0 || j < 0 || i > degree1() || j > degree2()) return 0.0;
  return coeffs_(i, j);
}

int BivariatePoly::total_degree() const {
  int d = 0;
  for (int i = 0; i <= degree1(); ++i)
    for (int j = 0; j <= degree2(); ++j)
      if (coeffs_(i, j) != Complex(0.0)) d = std::max(d, i + j);
  return d;
}

Complex BivariatePoly::eval(Complex l1, Complex l2) const {
  // Horner in l1 of Horner-in-l2 rows.
  Complex acc = 0.0;
  for (int i = degree1(); i >= 0; --i) {
    Complex row = 0.0;
    for (int j = degree2(); j >= 0; --j) row = row * l2 + coeffs_(i, j);
    acc = acc * l1 + row;
  }
  return acc;
}

double BivariatePoly::eval_scale(Complex l1, Complex l2) const {
  const double a1 = std::abs(l1), a2 = std::abs(l2);
  double acc = 0.0, p1 = 1.0;
  for (int i = 0; i <= degree1(); ++i) {
    double p2 = 1.0;
    for (int j = 0; j <= degree2(); ++j) {
      acc += std::abs(coeffs_(i, j)) * p1 * p2;
      p2 *= a2;
    }
    p1 *= a1;
  }
  return acc;
}

double BivariatePoly::coeff_scale() const {
  return coeffs_.cwiseAbs().maxCoeff();
}

BivariatePoly BivariatePoly::d_lambda1() const {
  if (degree1() == 0) return BivariatePoly(CMat::Zero(1, degree2() + 1));
  CMat d(degree1(), degree2() + 1);
  for (int i = 1; i <= degree1(); ++i)
    for (int j = 0; j <= degree2(); ++j)
      d(i - 1, j) = coeffs_(i, j) * static_cast<double>(i);
  return BivariatePoly(std::move(d));
}

BivariatePoly BivariatePoly::d_lambda2() const {
  if (degree2() == 0) return BivariatePoly(CMat::Zero(degree1() + 1, 1));
  CMat d(degree1() + 1, degree2());
  for (int i = 0; i <= degree1(); ++i)
    for (int j = 1; j <= degree2(); ++j)
      d(i, j - 1) = coeffs_(i, j) * static_cast<double>(j);
  return BivariatePoly(std::move(d));
}

UniPoly BivariatePoly::slice_at_lambda1(Complex l1) const {
  std::vector<Complex> q(degree2() + 1, Complex(0.0));
  for (int j = 0; j <= degree2(); ++j) {
    Complex acc = 0.0;
    for (int i = degree1(); i >= 0; --i) acc = acc * l1 + coeffs_(i, j);
    q[j] = acc;
  }
  return UniPoly(std::move(q));
}

UniPoly BivariatePoly::top_form() const {
  const int d = total_degree();
  std::vector<Complex> q(d + 1, Complex(0.0));
  for (int i = 0; i <= d; ++i) q[i] = coeff(i, d - i);
  return UniPoly(std::move(q));
}

std::vector<std::pair<Complex, Complex>> BivariatePoly::infinity_directions() const {
  const int d = total_degree();
  std::vector<std::pair<Complex, Complex>> out;
  if (d <= 0) return out;
  UniPoly q = top_form();
  const double scale = q.coeff_scale();
  int e = static_cast<int>(q.c.size()) - 1;
  while (e > 0 && std::abs(q.c[e]) <= 1e-12 * scale) --e;
  q.c.resize(e + 1);
  auto normalized = [](Complex l1, Complex l2) {
    double nrm = std::sqrt(std::norm(l1) + std::norm(l2));
    l1 /= nrm;
    l2 /= nrm;
    Complex lead = std::abs(l1) >= std::abs(l2) ? l1 : l2;
    Complex phase = lead / std::abs(lead);
    return std::make_pair(l1 / phase, l2 / phase);
  };
  if (e > 0)
    for (Complex u : q.roots()) out.push_back(normalized(u, 1.0));
  for (int i = 0; i < d - e; ++i) out.emplace_back(Complex(1.0), Complex(0.0));
  return out;
}

bool BivariatePoly::smooth_at(Complex l1, Complex l2, const ToleranceProfile& tol) const {
  BivariatePoly px = d_lambda1(), py = d_lambda2();
  const double grad = std::abs(px.eval(l1, l2)) + std::abs(py.eval(l1, l2));
  const double scale = px.eval_scale(l1, l2) + py.eval_scale(l1, l2);
  if (scale == 0.0) return false;
  return grad > tol.residual_tol * scale;
}

bool BivariatePoly::proportional_to(const BivariatePoly& other, const ToleranceProfile& tol,
                                    Complex* mu_out) const {
  const int k = std::max({degree1(), degree2(), other.degree1(), other.degree2()}) + 2;
  Complex num = 0.0;
  double den = 0.0;
  std::vector<std::pair<Complex, Complex>> grid;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      double t1 = 2.0 * std::numbers::pi * a / k, t2 = 2.0 * std::numbers::pi * b / k;
      Complex x = 1.37 * Complex(std::cos(t1), std::sin(t1));
      Complex y = 1.37 * Complex(std::cos(t2 + 0.21), std::sin(t2 + 0.21));
      grid.emplace_back(x, y);
      Complex v = other.eval(x, y);
      num += std::conj(v) * eval(x, y);
      den += std::norm(v);
    }
  if (den == 0.0) return false;
  const Complex mu = num / den;
  for (auto [x, y] : grid) {
    double scale = eval_scale(x, y) + std::abs(mu) * other.eval_scale(x, y);
    if (std::abs(eval(x, y) - mu * other.eval(x, y)) > tol.residual_tol * scale)
      return false;
  }
  if (mu_out) *mu_out = mu;
  return true;
}

}  // namespace vessel
