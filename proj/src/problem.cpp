#include "stepcon/problem.hpp"

#include "number_format.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace stepcon {

Matrix Problem::constraint_jacobian(const Vector& x, std::span<const IndexPair> pairs) const {
  Matrix J(num_vars(), static_cast<Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    J.col(static_cast<Index>(i)) = constraint_gradient(x, pairs[i].row, pairs[i].col);
  }
  return J;
}

Matrix Problem::weighted_constraint_hessian(const Vector& x, std::span<const IndexPair> pairs,
                                            std::span<const double> weights) const {
  Matrix H = Matrix::Zero(num_vars(), num_vars());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (weights[i] != 0.0) H += weights[i] * constraint_hessian(x, pairs[i].row, pairs[i].col);
  }
  return H;
}

// ---------------------------------------------------------------------------
// NormOptProblem

NormOptProblem::NormOptProblem(std::vector<Matrix> samples, double b, double lambda1,
                               double lambda2, std::uint64_t seed)
    : samples_(std::move(samples)), b_(b), lambda1_(lambda1), lambda2_(lambda2), seed_(seed) {
  if (samples_.empty()) throw Error(ErrorCode::kInvalidArgument, "at least one sample required");
  M_ = samples_.front().rows();
  K_ = samples_.front().cols();
  N_ = static_cast<Index>(samples_.size());
  if (M_ < 1 || K_ < 1) throw Error(ErrorCode::kInvalidArgument, "samples must be nonempty");
  if (!(b_ > 0.0) || !(lambda1_ > 0.0) || !(lambda2_ > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "b, lambda1 and lambda2 must be positive");
  }
  xi_sq_.resize(M_ * N_, K_);
  for (Index n = 0; n < N_; ++n) {
    const Matrix& xi = samples_[static_cast<std::size_t>(n)];
    if (xi.rows() != M_ || xi.cols() != K_) {
      throw Error(ErrorCode::kShapeMismatch, "sample " + std::to_string(n) + " has wrong shape");
    }
    if (!xi.allFinite()) throw Error(ErrorCode::kInvalidArgument, "non-finite sample value");
    xi_sq_.middleRows(n * M_, M_) = xi.cwiseAbs2();
  }
}

double NormOptProblem::objective(const Vector& x) const {
  double f = lambda2_ * x.squaredNorm();
  for (Index k = 0; k < K_; ++k) f += lambda1_ * std::max(-x[k], 0.0) - x[k];
  return f;
}

Vector NormOptProblem::objective_gradient(const Vector& x) const {
  Vector g(K_);
  for (Index k = 0; k < K_; ++k) g[k] = 2.0 * lambda2_ * x[k] - 1.0 - (x[k] < 0.0 ? lambda1_ : 0.0);
  return g;
}

Matrix NormOptProblem::objective_hessian(const Vector&) const {
  return 2.0 * lambda2_ * Matrix::Identity(K_, K_);
}

Matrix NormOptProblem::constraints(const Vector& x) const {
  const Vector v = xi_sq_ * x.cwiseAbs2();
  Matrix G = Eigen::Map<const Matrix>(v.data(), M_, N_);
  G.array() -= b_;
  return G;
}

Vector NormOptProblem::constraint_gradient(const Vector& x, Index m, Index n) const {
  return 2.0 * xi_sq_.row(m + n * M_).transpose().cwiseProduct(x);
}

Matrix NormOptProblem::constraint_hessian(const Vector&, Index m, Index n) const {
  return (2.0 * xi_sq_.row(m + n * M_).transpose()).asDiagonal();
}

Matrix NormOptProblem::constraint_jacobian(const Vector& x, std::span<const IndexPair> pairs) const {
  Matrix J(K_, static_cast<Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    J.col(static_cast<Index>(i)) =
        2.0 * xi_sq_.row(pairs[i].row + pairs[i].col * M_).transpose().cwiseProduct(x);
  }
  return J;
}

Matrix NormOptProblem::weighted_constraint_hessian(const Vector&, std::span<const IndexPair> pairs,
                                                   std::span<const double> weights) const {
  Vector diag = Vector::Zero(K_);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    diag += (2.0 * weights[i]) * xi_sq_.row(pairs[i].row + pairs[i].col * M_).transpose();
  }
  return diag.asDiagonal();
}

NormOptProblem make_norm_opt(const NormOptParams& p) {
  if (p.K < 1 || p.M < 1 || p.N < 1) {
    throw Error(ErrorCode::kInvalidArgument, "K, M and N must all be >= 1");
  }
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Matrix> samples(static_cast<std::size_t>(p.N), Matrix(p.M, p.K));
  for (auto& xi : samples) {
    for (Index m = 0; m < p.M; ++m) {
      for (Index k = 0; k < p.K; ++k) xi(m, k) = normal(rng);
    }
  }
  return NormOptProblem(std::move(samples), p.b, p.lambda1, p.lambda2, p.seed);
}

// ---------------------------------------------------------------------------
// CounterexampleProblem

double CounterexampleProblem::objective(const Vector& x) const {
  return (x[0] - 2.0) * (x[0] - 2.0);
}

Vector CounterexampleProblem::objective_gradient(const Vector& x) const {
  return Vector{{2.0 * (x[0] - 2.0), 0.0}};
}

Matrix CounterexampleProblem::objective_hessian(const Vector&) const {
  return Matrix{{2.0, 0.0}, {0.0, 0.0}};
}

Matrix CounterexampleProblem::constraints(const Vector& x) const {
  return Matrix{{x[0] * x[0] - x[1], x[1] - 1.0}};
}

Vector CounterexampleProblem::constraint_gradient(const Vector& x, Index, Index n) const {
  if (n == 0) return Vector{{2.0 * x[0], -1.0}};
  return Vector{{0.0, 1.0}};
}

Matrix CounterexampleProblem::constraint_hessian(const Vector&, Index, Index n) const {
  if (n == 0) return Matrix{{2.0, 0.0}, {0.0, 0.0}};
  return Matrix::Zero(2, 2);
}

CounterexampleProblem make_counterexample() { return {}; }

// ---------------------------------------------------------------------------
// CallbackProblem

CallbackProblem::CallbackProblem(Index K, Index M, Index N, Callbacks callbacks)
    : K_(K), M_(M), N_(N), cb_(std::move(callbacks)) {
  if (K < 1 || M < 1 || N < 1) throw Error(ErrorCode::kInvalidArgument, "dimensions must be >= 1");
  if (!cb_.f || !cb_.grad_f || !cb_.G || !cb_.grad_G) {
    throw Error(ErrorCode::kInvalidArgument, "f, grad_f, G and grad_G callbacks are required");
  }
}

double CallbackProblem::objective(const Vector& x) const { return cb_.f(x); }
Vector CallbackProblem::objective_gradient(const Vector& x) const { return cb_.grad_f(x); }
Matrix CallbackProblem::objective_hessian(const Vector& x) const {
  return cb_.hess_f ? cb_.hess_f(x) : Matrix::Zero(K_, K_);
}
Matrix CallbackProblem::constraints(const Vector& x) const { return cb_.G(x); }
Vector CallbackProblem::constraint_gradient(const Vector& x, Index m, Index n) const {
  return cb_.grad_G(x, m, n);
}
Matrix CallbackProblem::constraint_hessian(const Vector& x, Index m, Index n) const {
  return cb_.hess_G ? cb_.hess_G(x, m, n) : Matrix::Zero(K_, K_);
}

// ---------------------------------------------------------------------------
// Sample files

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

NormOptProblem parse_samples(std::istream& in, const SampleLayout& layout) {
  std::vector<std::vector<std::vector<double>>> blocks;
  std::vector<std::vector<double>> current;
  std::string line;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (!current.empty()) blocks.push_back(std::move(current));
    current.clear();
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') continue;
    if (is_blank(line)) {
      flush();
      continue;
    }
    std::vector<double> row;
    for (const std::string& cell : split_csv(line)) {
      double v = 0.0;
      if (!detail::parse_double(cell, v)) {
        throw Error(ErrorCode::kParse,
                    "line " + std::to_string(lineno) + ": cannot parse '" + cell + "' as a number");
      }
      row.push_back(v);
    }
    current.push_back(std::move(row));
  }
  flush();
  if (blocks.empty()) throw Error(ErrorCode::kParse, "sample file contains no samples");

  const std::size_t M = blocks.front().size();
  const std::size_t K = blocks.front().front().size();
  std::vector<Matrix> samples;
  samples.reserve(blocks.size());
  for (std::size_t n = 0; n < blocks.size(); ++n) {
    if (blocks[n].size() != M) {
      throw Error(ErrorCode::kShapeMismatch, "sample " + std::to_string(n + 1) + " has " +
                                                 std::to_string(blocks[n].size()) +
                                                 " rows, expected " + std::to_string(M));
    }
    Matrix xi(static_cast<Index>(M), static_cast<Index>(K));
    for (std::size_t m = 0; m < M; ++m) {
      if (blocks[n][m].size() != K) {
        throw Error(ErrorCode::kShapeMismatch, "sample " + std::to_string(n + 1) + " row " +
                                                   std::to_string(m + 1) + " has " +
                                                   std::to_string(blocks[n][m].size()) +
                                                   " values, expected " + std::to_string(K));
      }
      for (std::size_t k = 0; k < K; ++k) {
        xi(static_cast<Index>(m), static_cast<Index>(k)) = blocks[n][m][k];
      }
    }
    samples.push_back(std::move(xi));
  }
  return NormOptProblem(std::move(samples), layout.b, layout.lambda1, layout.lambda2);
}

NormOptProblem load_samples(const std::filesystem::path& path, const SampleLayout& layout) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open sample file " + path.string());
  return parse_samples(in, layout);
}

void write_samples(const NormOptProblem& problem, std::ostream& out) {
  out << "# K=" << problem.num_vars() << " M=" << problem.rows() << " N=" << problem.cols()
      << " seed=" << problem.seed() << '\n';
  bool first = true;
  for (const Matrix& xi : problem.samples()) {
    if (!first) out << '\n';
    first = false;
    for (Index m = 0; m < xi.rows(); ++m) {
      for (Index k = 0; k < xi.cols(); ++k) {
        if (k > 0) out << ',';
        out << detail::format_double(xi(m, k));
      }
      out << '\n';
    }
  }
}

void write_samples(const NormOptProblem& problem, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write sample file " + path.string());
  write_samples(problem, out);
  if (!out) throw Error(ErrorCode::kIo, "error while writing " + path.string());
}

}  // namespace stepcon
