#pragma once

#include "stepcon/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>

namespace stepcon {

/// min f(x) s.t. ||G(x)||_0^+ <= s, with G : R^K -> R^{M x N}.
///
/// Implementations must be immutable after construction; all evaluators are
/// const and may be called concurrently.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual Index num_vars() const = 0;  // K
  virtual Index rows() const = 0;      // M
  virtual Index cols() const = 0;      // N

  virtual double objective(const Vector& x) const = 0;
  virtual Vector objective_gradient(const Vector& x) const = 0;
  virtual Matrix objective_hessian(const Vector& x) const = 0;

  virtual Matrix constraints(const Vector& x) const = 0;
  virtual Vector constraint_gradient(const Vector& x, Index m, Index n) const = 0;
  virtual Matrix constraint_hessian(const Vector& x, Index m, Index n) const = 0;

  /// K x |pairs| matrix whose columns are the constraint gradients, in order.
  virtual Matrix constraint_jacobian(const Vector& x, std::span<const IndexPair> pairs) const;

  /// sum_i weights[i] * hess G_{pairs[i]}(x).
  virtual Matrix weighted_constraint_hessian(const Vector& x, std::span<const IndexPair> pairs,
                                             std::span<const double> weights) const;
};

struct NormOptParams {
  Index K = 10;
  Index M = 1;
  Index N = 100;
  double b = 100.0;
  double lambda1 = 0.5;
  double lambda2 = 0.5;
  std::uint64_t seed = 0;
};

/// Penalized norm-optimization benchmark:
///   f(x)    = lambda2 ||x||^2 + sum_k (lambda1 (-x_k)^+ - x_k)
///   G_mn(x) = sum_k xi_{mk,n}^2 x_k^2 - b
/// The penalty kink at x_k = 0 uses subgradient 0 and contributes nothing to
/// the Hessian, so hess f = 2 lambda2 I everywhere.
class NormOptProblem final : public Problem {
 public:
  /// `samples[n]` is the M x K matrix of raw realizations xi for sample n.
  NormOptProblem(std::vector<Matrix> samples, double b, double lambda1, double lambda2,
                 std::uint64_t seed = 0);

  Index num_vars() const override { return K_; }
  Index rows() const override { return M_; }
  Index cols() const override { return N_; }

  double objective(const Vector& x) const override;
  Vector objective_gradient(const Vector& x) const override;
  Matrix objective_hessian(const Vector& x) const override;
  Matrix constraints(const Vector& x) const override;
  Vector constraint_gradient(const Vector& x, Index m, Index n) const override;
  Matrix constraint_hessian(const Vector& x, Index m, Index n) const override;
  Matrix constraint_jacobian(const Vector& x, std::span<const IndexPair> pairs) const override;
  Matrix weighted_constraint_hessian(const Vector& x, std::span<const IndexPair> pairs,
                                     std::span<const double> weights) const override;

  const std::vector<Matrix>& samples() const { return samples_; }
  /// Row (m + n M) holds xi_{m.,n}^2.
  const Matrix& squared_samples() const { return xi_sq_; }
  double b() const { return b_; }
  double lambda1() const { return lambda1_; }
  double lambda2() const { return lambda2_; }
  std::uint64_t seed() const { return seed_; }

 private:
  Index K_, M_, N_;
  std::vector<Matrix> samples_;
  Matrix xi_sq_;
  double b_, lambda1_, lambda2_;
  std::uint64_t seed_;
};

/// Draws xi i.i.d. standard normal from a seeded mt19937_64, sample by sample,
/// row by row.
NormOptProblem make_norm_opt(const NormOptParams& params);

/// K = 2, M = 1, N = 2 instance with f(x) = (x1 - 2)^2 and
/// G(x) = (x1^2 - x2, x2 - 1); intended for s = 1. Its point (1, 1) is BKKT
/// but not KKT.
class CounterexampleProblem final : public Problem {
 public:
  static constexpr Index kSparsity = 1;

  Index num_vars() const override { return 2; }
  Index rows() const override { return 1; }
  Index cols() const override { return 2; }
  double objective(const Vector& x) const override;
  Vector objective_gradient(const Vector& x) const override;
  Matrix objective_hessian(const Vector& x) const override;
  Matrix constraints(const Vector& x) const override;
  Vector constraint_gradient(const Vector& x, Index m, Index n) const override;
  Matrix constraint_hessian(const Vector& x, Index m, Index n) const override;
};

CounterexampleProblem make_counterexample();

/// Problem assembled from user callbacks. Missing Hessian callbacks are
/// treated as zero.
class CallbackProblem final : public Problem {
 public:
  struct Callbacks {
    std::function<double(const Vector&)> f;
    std::function<Vector(const Vector&)> grad_f;
    std::function<Matrix(const Vector&)> hess_f;
    std::function<Matrix(const Vector&)> G;
    std::function<Vector(const Vector&, Index, Index)> grad_G;
    std::function<Matrix(const Vector&, Index, Index)> hess_G;
  };

  CallbackProblem(Index K, Index M, Index N, Callbacks callbacks);

  Index num_vars() const override { return K_; }
  Index rows() const override { return M_; }
  Index cols() const override { return N_; }
  double objective(const Vector& x) const override;
  Vector objective_gradient(const Vector& x) const override;
  Matrix objective_hessian(const Vector& x) const override;
  Matrix constraints(const Vector& x) const override;
  Vector constraint_gradient(const Vector& x, Index m, Index n) const override;
  Matrix constraint_hessian(const Vector& x, Index m, Index n) const override;

 private:
  Index K_, M_, N_;
  Callbacks cb_;
};

struct SampleLayout {
  double b = 100.0;
  double lambda1 = 0.5;
  double lambda2 = 0.5;
};

/// Reads raw xi values: one sample per block of M lines, K comma-separated
/// values per line, blocks separated by blank lines, optional '#' comments.
NormOptProblem load_samples(const std::filesystem::path& path, const SampleLayout& layout);
NormOptProblem parse_samples(std::istream& in, const SampleLayout& layout);

/// Writes the raw samples of `problem` in the format read by load_samples,
/// with enough digits for an exact round trip.
void write_samples(const NormOptProblem& problem, const std::filesystem::path& path);
void write_samples(const NormOptProblem& problem, std::ostream& out);

}  // namespace stepcon
