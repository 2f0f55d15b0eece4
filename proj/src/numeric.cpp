#include "vessel/numeric.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "vessel/errors.hpp"

namespace vessel {

bool all_finite(const CMat& m) {
  return m.allFinite();
}

namespace {

Eigen::VectorXd singular_values(const CMat& m) {
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues();
}

int rank_from_singulars(const Eigen::VectorXd& sv, double rank_tol) {
  if (sv.size() == 0) return 0;
  const double cutoff = rank_tol * sv(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) ++r;
  return r;
}

}  // namespace

int rank_with_tol(const CMat& m, const ToleranceProfile& tol) {
  if (m.size() == 0) throw std::invalid_argument("rank_with_tol: empty matrix");
  return rank_from_singulars(singular_values(m), tol.rank_tol);
}

CMat nullspace_basis(const CMat& m, const ToleranceProfile& tol) {
  if (m.size() == 0) throw std::invalid_argument("nullspace_basis: empty matrix");
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullV);
  const int rank = rank_from_singulars(svd.singularValues(), tol.rank_tol);
  const Eigen::Index dim = m.cols() - rank;
  return svd.matrixV().rightCols(dim);
}

CMat nullspace_basis_scaled(const CMat& m, double reference_scale, const ToleranceProfile& tol) {
  if (m.size() == 0) throw std::invalid_argument("nullspace_basis_scaled: empty matrix");
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = tol.rank_tol * std::max(sv.size() ? sv(0) : 0.0, reference_scale);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

namespace {

// Single-linkage clustering of complex values within radius.
std::vector<std::vector<int>> cluster_indices(const std::vector<Complex>& vals,
                                              double radius) {
  const int n = static_cast<int>(vals.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(vals[i] - vals[j]) <= radius) parent[find(i)] = find(j);
  std::vector<std::vector<int>> groups(n);
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& g : groups)
    if (!g.empty()) out.push_back(std::move(g));
  return out;
}

}  // namespace

namespace {

// Parlett-Reinsch balancing: power-of-two diagonal similarity equalizing
// off-diagonal row and column norms. Wide dynamic ranges (for example the
// residue entries of A - B D^-1 C) otherwise cost several digits of
// eigenvalue accuracy.
Eigen::VectorXd balance_in_place(CMat& a) {
  const Eigen::Index n = a.rows();
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
  bool converged = false;
  for (int sweep = 0; sweep < 32 && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0;
      const double s = c + r;
      while (c < r / 2.0) {
        c *= 2.0;
        r /= 2.0;
        f *= 2.0;
      }
      while (c >= r * 2.0) {
        c /= 2.0;
        r *= 2.0;
        f /= 2.0;
      }
      if (c + r < 0.95 * s) {
        converged = false;
        scale(i) *= f;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
  return scale;
}

}  // namespace

std::vector<EigenPair> eig_decompose(const CMat& m, const ToleranceProfile& tol) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("eig_decompose: matrix must be square");
  const Eigen::Index n = m.rows();
  if (n == 0) return {};

  CMat balanced = m;
  Eigen::VectorXd scale = balance_in_place(balanced);

  Eigen::ComplexEigenSolver<CMat> right_solver(balanced, /*computeEigenvectors=*/true);
  if (right_solver.info() != Eigen::Success)
    throw NumericalError("eig_decompose: eigen solver failed");
  Eigen::ComplexEigenSolver<CMat> left_solver(balanced.adjoint(), true);
  if (left_solver.info() != Eigen::Success)
    throw NumericalError("eig_decompose: adjoint eigen solver failed");

  std::vector<Complex> vals(n);
  for (Eigen::Index i = 0; i < n; ++i) vals[i] = right_solver.eigenvalues()(i);
  // Left eigenvalues in the w^H M = lambda w^H convention.
  std::vector<Complex> left_vals(n);
  for (Eigen::Index i = 0; i < n; ++i)
    left_vals[i] = std::conj(left_solver.eigenvalues()(i));

  // Undo the balancing similarity on the vectors.
  auto unbalance_right = [&](CVec v) {
    for (Eigen::Index i = 0; i < n; ++i) v(i) *= scale(i);
    return CVec(v / v.norm());
  };
  auto unbalance_left = [&](CVec w) {
    for (Eigen::Index i = 0; i < n; ++i) w(i) /= scale(i);
    return CVec(w / w.norm());
  };

  std::vector<EigenPair> out;
  std::vector<bool> left_used(n, false);
  for (auto& group : cluster_indices(vals, tol.eig_cluster_tol)) {
    EigenPair p;
    Complex sum = 0.0;
    for (int idx : group) sum += vals[idx];
    p.value = sum / static_cast<double>(group.size());
    p.multiplicity = static_cast<int>(group.size());

    double best = -1.0;
    for (int idx : group) {
      CVec v = unbalance_right(right_solver.eigenvectors().col(idx));
      double resid = (m * v - p.value * v).norm();
      if (best < 0.0 || resid < best) {
        best = resid;
        p.right = v;
      }
    }
    // Nearest unused left eigenvector with the best residual against the
    // cluster representative.
    int pick = -1;
    double best_left = -1.0;
    CVec best_w;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (left_used[i]) continue;
      CVec w = unbalance_left(left_solver.eigenvectors().col(i));
      double resid = (w.adjoint() * m - p.value * w.adjoint()).norm();
      if (pick < 0 || resid < best_left) {
        best_left = resid;
        pick = static_cast<int>(i);
        best_w = w;
      }
    }
    if (pick >= 0) {
      left_used[pick] = true;
      p.left = best_w;
    }
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), [](const EigenPair& a, const EigenPair& b) {
    if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
    return a.value.imag() < b.value.imag();
  });
  return out;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace vessel
