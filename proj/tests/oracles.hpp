#pragma once

// Independent reference implementations used by the tests. They are written
// from the definitions directly and share no code with the library.

#include "stepcon/problem.hpp"
#include "stepcon/stationarity.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <memory>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using stepcon::Index;
using stepcon::Matrix;
using stepcon::Vector;

inline double col_max(const Matrix& Z, Index n) {
  double m = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < Z.rows(); ++i) m = std::max(m, Z(i, n));
  return m;
}

inline Index count_positive_columns(const Matrix& Z) {
  Index c = 0;
  for (Index n = 0; n < Z.cols(); ++n) c += col_max(Z, n) > 0.0 ? 1 : 0;
  return c;
}

/// Keeps the columns flagged in `keep`, clamps every other column to min(., 0).
inline Matrix clamp_except(const Matrix& Z, const std::vector<bool>& keep) {
  Matrix P = Z;
  for (Index n = 0; n < Z.cols(); ++n) {
    if (keep[static_cast<std::size_t>(n)]) continue;
    for (Index m = 0; m < Z.rows(); ++m) P(m, n) = std::min(P(m, n), 0.0);
  }
  return P;
}

struct BruteProjection {
  double distance = 0.0;
  std::vector<Matrix> argmin;  // distinct minimizers
};

/// Minimum over all subsets of at most s kept columns. Every candidate is in
/// S, and every nearest point of S has this form, so this is the projection.
inline BruteProjection brute_force_projection(const Matrix& Z, Index s, double tie_tol = 1e-12) {
  const Index N = Z.cols();
  std::vector<std::pair<double, Matrix>> cands;
  for (unsigned mask = 0; mask < (1u << N); ++mask) {
    if (__builtin_popcount(mask) > s) continue;
    std::vector<bool> keep(static_cast<std::size_t>(N));
    for (Index n = 0; n < N; ++n) keep[static_cast<std::size_t>(n)] = (mask >> n) & 1u;
    Matrix P = clamp_except(Z, keep);
    cands.emplace_back((Z - P).norm(), std::move(P));
  }
  BruteProjection out;
  out.distance = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) out.distance = std::min(out.distance, c.first);
  for (auto& c : cands) {
    if (c.first > out.distance + tie_tol) continue;
    const bool seen = std::any_of(out.argmin.begin(), out.argmin.end(),
                                  [&](const Matrix& A) { return A == c.second; });
    if (!seen) out.argmin.push_back(c.second);
  }
  return out;
}

/// Tangent cone of S at Z by subset enumeration: D is tangent iff some
/// Gamma subset of Gamma_0 with |Gamma| <= s - |Gamma_+| leaves D <= 0 on
/// the zero entries of the remaining Gamma_0 columns.
inline bool tangent_cone_enum(const Matrix& Z, const Matrix& D, Index s, double tol) {
  std::vector<Index> plus, zero;
  for (Index n = 0; n < Z.cols(); ++n) {
    const double mx = col_max(Z, n);
    if (mx > 0) plus.push_back(n);
    if (mx == 0) zero.push_back(n);
  }
  const Index budget = s - static_cast<Index>(plus.size());
  const std::size_t z = zero.size();
  for (unsigned mask = 0; mask < (1u << z); ++mask) {
    if (__builtin_popcount(mask) > budget) continue;
    bool ok = true;
    for (std::size_t j = 0; j < z && ok; ++j) {
      if ((mask >> j) & 1u) continue;
      const Index n = zero[j];
      for (Index m = 0; m < Z.rows(); ++m) {
        if (Z(m, n) == 0.0 && D(m, n) > tol) ok = false;
      }
    }
    if (ok) return true;
  }
  return false;
}

/// Central-difference Jacobian of a vector function.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& F, const Vector& w, double h = 1e-6) {
  const Vector f0 = F(w);
  Matrix J(f0.size(), w.size());
  for (Index i = 0; i < w.size(); ++i) {
    Vector wp = w, wm = w;
    wp(i) += h;
    wm(i) -= h;
    J.col(i) = (F(wp) - F(wm)) / (2.0 * h);
  }
  return J;
}

/// Stationarity residual written out from its definition: gradient block
/// over V, then Z on V, then W off V, each column-major.
inline Vector residual_by_summation(const stepcon::Problem& p, const Vector& x, const Matrix& W,
                                    const std::vector<std::pair<Index, Index>>& V) {
  const Index K = p.num_vars(), M = p.rows(), N = p.cols();
  const Matrix Z = p.constraints(x);
  Vector g = p.objective_gradient(x);
  std::vector<bool> inV(static_cast<std::size_t>(M * N), false);
  for (auto [m, n] : V) inV[static_cast<std::size_t>(m + n * M)] = true;
  for (Index n = 0; n < N; ++n)
    for (Index m = 0; m < M; ++m)
      if (inV[static_cast<std::size_t>(m + n * M)]) g += W(m, n) * p.constraint_gradient(x, m, n);
  std::vector<double> out(g.data(), g.data() + K);
  for (Index n = 0; n < N; ++n)
    for (Index m = 0; m < M; ++m)
      if (inV[static_cast<std::size_t>(m + n * M)]) out.push_back(Z(m, n));
  for (Index n = 0; n < N; ++n)
    for (Index m = 0; m < M; ++m)
      if (!inV[static_cast<std::size_t>(m + n * M)]) out.push_back(W(m, n));
  return Eigen::Map<Vector>(out.data(), static_cast<Index>(out.size()));
}

inline Matrix uniform_matrix(std::mt19937_64& rng, Index M, Index N, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix Z(M, N);
  for (Index n = 0; n < N; ++n)
    for (Index m = 0; m < M; ++m) Z(m, n) = u(rng);
  return Z;
}

inline Matrix integer_matrix(std::mt19937_64& rng, Index M, Index N, int lo, int hi) {
  std::uniform_int_distribution<int> u(lo, hi);
  Matrix Z(M, N);
  for (Index n = 0; n < N; ++n)
    for (Index m = 0; m < M; ++m) Z(m, n) = u(rng);
  return Z;
}

/// Problem with G(x) = Z0 + sum_k x_k B_k (affine, so Z0 = G(0)) and
/// f(x) = 0.5 ||x||^2 + c^T x. Used to place arbitrary (Z, W) pairs at x = 0.
class AffineProblem final : public stepcon::Problem {
 public:
  AffineProblem(Matrix Z0, std::vector<Matrix> B, Vector c)
      : Z0_(std::move(Z0)), B_(std::move(B)), c_(std::move(c)) {}
  Index num_vars() const override { return static_cast<Index>(B_.size()); }
  Index rows() const override { return Z0_.rows(); }
  Index cols() const override { return Z0_.cols(); }
  double objective(const Vector& x) const override { return 0.5 * x.squaredNorm() + c_.dot(x); }
  Vector objective_gradient(const Vector& x) const override { return x + c_; }
  Matrix objective_hessian(const Vector& x) const override {
    return Matrix::Identity(x.size(), x.size());
  }
  Matrix constraints(const Vector& x) const override {
    Matrix Z = Z0_;
    for (std::size_t k = 0; k < B_.size(); ++k) Z += x(static_cast<Index>(k)) * B_[k];
    return Z;
  }
  Vector constraint_gradient(const Vector&, Index m, Index n) const override {
    Vector g(num_vars());
    for (std::size_t k = 0; k < B_.size(); ++k) g(static_cast<Index>(k)) = B_[k](m, n);
    return g;
  }
  Matrix constraint_hessian(const Vector& x, Index, Index) const override {
    return Matrix::Zero(x.size(), x.size());
  }

 private:
  Matrix Z0_;
  std::vector<Matrix> B_;
  Vector c_;
};

/// A point (x = 0, W) of an affine problem whose constraint values at 0 are
/// a chosen integer matrix Z. Used to compare the stationarity checker
/// against the projection characterization.
struct StationarityCase {
  std::shared_ptr<AffineProblem> problem;
  Matrix Z;
  Matrix W;
  double tau = 1.0;
  Index s = 1;
  Vector c;  // grad f(0)
};

/// `constructed` cases have W >= 0 supported on the zero entries of Gamma_0
/// columns and a gradient that balances it exactly; the others use random W
/// and, half the time, a perturbed gradient. Integer data and tau in
/// {0.5, 1, 2} keep every comparison exact.
inline StationarityCase make_stationarity_case(std::mt19937_64& rng, bool constructed,
                                               Index M = 2, Index N = 5, Index K = 3) {
  StationarityCase out;
  std::uniform_int_distribution<int> pick(0, 2);
  out.s = 1 + pick(rng) % 2;
  out.tau = std::array<double, 3>{0.5, 1.0, 2.0}[static_cast<std::size_t>(pick(rng))];
  out.Z = integer_matrix(rng, M, N, -2, 1);
  out.W = integer_matrix(rng, M, N, -1, 2);
  if (constructed) {
    Index positive = 0;
    for (Index n = 0; n < N; ++n) {
      if (col_max(out.Z, n) <= 0.0) continue;
      if (++positive > out.s) out.Z.col(n).array() -= 2.0;  // now nonpositive, max <= -1
    }
    for (Index n = 0; n < N; ++n)
      for (Index m = 0; m < M; ++m)
        if (out.Z(m, n) != 0.0 || col_max(out.Z, n) != 0.0 || positive < out.s) out.W(m, n) = 0.0;
    out.W = 0.5 * out.W.cwiseMax(0.0).cwiseMin(1.0);
  }
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Matrix> B(static_cast<std::size_t>(K), Matrix(M, N));
  for (Matrix& b : B)
    for (Index n = 0; n < N; ++n)
      for (Index m = 0; m < M; ++m) b(m, n) = std::round(4.0 * g(rng));
  out.c = Vector::Zero(K);
  for (Index k = 0; k < K; ++k)
    for (Index n = 0; n < N; ++n)
      for (Index m = 0; m < M; ++m) out.c(k) -= out.W(m, n) * B[static_cast<std::size_t>(k)](m, n);
  if (!constructed && pick(rng) == 0) out.c(0) += 1.0;
  out.problem = std::make_shared<AffineProblem>(out.Z, std::move(B), out.c);
  return out;
}

/// ||grad f(0) + sum over all entries of W_mn grad G_mn(0)||.
inline double full_gradient_residual(const StationarityCase& sc) {
  Vector r = sc.c;
  for (Index n = 0; n < sc.Z.cols(); ++n)
    for (Index m = 0; m < sc.Z.rows(); ++m)
      r += sc.W(m, n) * sc.problem->constraint_gradient(Vector::Zero(sc.c.size()), m, n);
  return r.norm();
}

}  // namespace oracle
