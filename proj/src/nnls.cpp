#include "stepcon/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace stepcon {

namespace {

// Least-squares solution restricted to the passive columns; zero elsewhere.
Vector passive_solve(const Matrix& A, const Vector& b, const std::vector<bool>& passive) {
  std::vector<Index> idx;
  for (std::size_t j = 0; j < passive.size(); ++j) {
    if (passive[j]) idx.push_back(static_cast<Index>(j));
  }
  Vector z = Vector::Zero(A.cols());
  if (idx.empty()) return z;
  Matrix Ap(A.rows(), static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) Ap.col(static_cast<Index>(i)) = A.col(idx[i]);
  const Vector zp = Ap.completeOrthogonalDecomposition().solve(b);
  for (std::size_t i = 0; i < idx.size(); ++i) z[idx[i]] = zp[static_cast<Index>(i)];
  return z;
}

}  // namespace

NnlsResult nnls(const Matrix& A, const Vector& b, double tol, int max_iterations) {
  if (A.rows() != b.size()) throw Error(ErrorCode::kShapeMismatch, "nnls: A and b disagree");
  const Index n = A.cols();
  if (max_iterations <= 0) max_iterations = static_cast<int>(100 * (A.rows() + n));

  NnlsResult res;
  res.x = Vector::Zero(n);
  if (n == 0) {
    res.residual = b.norm();
    return res;
  }

  // Scale the dual-feasibility tolerance to the problem.
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff() * std::max(1.0, b.cwiseAbs().maxCoeff()));
  const double dual_tol = tol * scale;

  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Vector& x = res.x;
  int iter = 0;
  while (true) {
    const Vector w = A.transpose() * (b - A * x);
    Index best = -1;
    double best_w = dual_tol;
    for (Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    while (true) {
      if (++iter > max_iterations) {
        throw Error(ErrorCode::kNoConvergence, "nnls: iteration cap reached");
      }
      Vector z = passive_solve(A, b, passive);
      bool feasible = true;
      for (Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= tol) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        x = z;
        break;
      }
      // Step from x toward z until the first passive coordinate hits zero.
      double alpha = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= tol) {
          const double denom = x[j] - z[j];
          if (denom > 0.0) alpha = std::min(alpha, x[j] / denom);
        }
      }
      if (!std::isfinite(alpha)) alpha = 0.0;
      x += alpha * (z - x);
      for (Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x[j] <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x[j] = 0.0;
        }
      }
    }
  }
  res.iterations = iter;
  res.residual = (A * x - b).norm();
  return res;
}

}  // namespace stepcon
