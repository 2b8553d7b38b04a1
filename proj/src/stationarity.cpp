#include "stepcon/stationarity.hpp"

#include "stepcon/nnls.hpp"
#include "stepcon/step_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stepcon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRankTol = 1e-10;

void check_point(const Problem& problem, const PrimalDualPoint& point) {
  if (point.x.size() != problem.num_vars()) {
    throw Error(ErrorCode::kShapeMismatch, "x has wrong length");
  }
  if (point.W.rows() != problem.rows() || point.W.cols() != problem.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "W has wrong shape");
  }
}

std::vector<double> gather(const Matrix& A, std::span<const IndexPair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const IndexPair& p : pairs) out.push_back(A(p.row, p.col));
  return out;
}

// min ||grad f + sum_V W_mn grad G_mn|| over W_V >= 0.
StationarityReport nnls_report(const Problem& problem, const Vector& x, const ActiveSet& V,
                               StationarityKind kind, double tol) {
  StationarityReport rep;
  rep.kind = kind;
  rep.tolerance = tol;
  rep.active_set = V;
  const Vector g = problem.objective_gradient(x);
  Matrix W = Matrix::Zero(problem.rows(), problem.cols());
  if (V.empty()) {
    rep.residual = g.norm();
  } else {
    const Matrix A = problem.constraint_jacobian(x, V.pairs);
    const NnlsResult sol = nnls(A, -g);
    for (std::size_t i = 0; i < V.size(); ++i) {
      W(V.pairs[i].row, V.pairs[i].col) = sol.x[static_cast<Index>(i)];
    }
    rep.residual = sol.residual;
  }
  rep.equation_residual = rep.residual;
  rep.witness_W = std::move(W);
  rep.satisfied = rep.residual <= tol;
  return rep;
}

}  // namespace

PrimalDualPoint PrimalDualPoint::zeros(const Problem& problem) {
  return {Vector::Zero(problem.num_vars()), Matrix::Zero(problem.rows(), problem.cols())};
}

ActiveSet active_set_of(const Matrix& Lambda, const ColumnSet& T) {
  ActiveSet u;
  ColumnSet cols = T;
  std::sort(cols.begin(), cols.end());
  for (Index n : cols) {
    if (n < 0 || n >= Lambda.cols()) throw Error(ErrorCode::kInvalidArgument, "column out of range");
    for (Index m = 0; m < Lambda.rows(); ++m) {
      if (Lambda(m, n) >= 0.0) u.pairs.push_back({m, n});
    }
  }
  return u;
}

ActiveSet active_set(const Problem& problem, const PrimalDualPoint& point, double tau,
                     const ColumnSet& T) {
  check_point(problem, point);
  return active_set_of(problem.constraints(point.x) + tau * point.W, T);
}

Vector stack(const PrimalDualPoint& point, const ActiveSet& V) {
  const Index K = point.x.size();
  const Index M = point.W.rows();
  const Index N = point.W.cols();
  Vector w(K + M * N);
  w.head(K) = point.x;
  Index i = K;
  for (const IndexPair& p : V.pairs) w[i++] = point.W(p.row, p.col);
  for (const IndexPair& p : V.complement(M, N)) w[i++] = point.W(p.row, p.col);
  return w;
}

PrimalDualPoint unstack(const Vector& w, const ActiveSet& V, Index K, Index M, Index N) {
  if (w.size() != K + M * N) throw Error(ErrorCode::kShapeMismatch, "stacked vector has wrong length");
  PrimalDualPoint p{w.head(K), Matrix(M, N)};
  Index i = K;
  for (const IndexPair& q : V.pairs) p.W(q.row, q.col) = w[i++];
  for (const IndexPair& q : V.complement(M, N)) p.W(q.row, q.col) = w[i++];
  return p;
}

Vector residual_F(const Problem& problem, const PrimalDualPoint& point, const ActiveSet& V) {
  check_point(problem, point);
  const Index K = problem.num_vars();
  const Index M = problem.rows();
  const Index N = problem.cols();
  Vector F(K + M * N);

  Vector g = problem.objective_gradient(point.x);
  if (!V.empty()) {
    const std::vector<double> wv = gather(point.W, V.pairs);
    g += problem.constraint_jacobian(point.x, V.pairs) *
         Eigen::Map<const Vector>(wv.data(), static_cast<Index>(wv.size()));
  }
  F.head(K) = g;

  const Matrix Z = problem.constraints(point.x);
  Index i = K;
  for (const IndexPair& p : V.pairs) F[i++] = Z(p.row, p.col);
  for (const IndexPair& p : V.complement(M, N)) F[i++] = point.W(p.row, p.col);
  return F;
}

Matrix theta(const Problem& problem, const PrimalDualPoint& point, const ActiveSet& V) {
  check_point(problem, point);
  Matrix H = problem.objective_hessian(point.x);
  if (!V.empty()) {
    const std::vector<double> wv = gather(point.W, V.pairs);
    H += problem.weighted_constraint_hessian(point.x, V.pairs, wv);
  }
  return H;
}

Matrix newton_matrix(const Problem& problem, const PrimalDualPoint& point, const ActiveSet& V,
                     double mu) {
  if (mu < 0.0) throw Error(ErrorCode::kInvalidArgument, "mu must be nonnegative");
  const Index K = problem.num_vars();
  const Index MN = problem.rows() * problem.cols();
  const auto nv = static_cast<Index>(V.size());
  Matrix J = Matrix::Zero(K + MN, K + MN);
  J.topLeftCorner(K, K) = theta(problem, point, V);
  if (nv > 0) {
    const Matrix A = problem.constraint_jacobian(point.x, V.pairs);
    J.block(0, K, K, nv) = A;
    J.block(K, 0, nv, K) = A.transpose();
    J.block(K, K, nv, nv).diagonal().setConstant(-mu);
  }
  J.bottomRightCorner(MN - nv, MN - nv).setIdentity();
  return J;
}

StationarityReport check_tau_stationary(const Problem& problem, const PrimalDualPoint& point,
                                        double tau, Index s, double tol) {
  check_point(problem, point);
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be positive");

  StationarityReport rep;
  rep.kind = StationarityKind::kTauStationary;
  rep.tolerance = tol;
  rep.witness_W = point.W;

  const Matrix Z = snap_to_zero(problem.constraints(point.x), tol);
  const ColumnPartition part = partition(Z);
  const ActiveSet v_star = zero_entries(Z, part.gamma_zero);
  rep.active_set = v_star;
  rep.equation_residual = residual_F(problem, point, v_star).norm();

  if (static_cast<Index>(part.gamma_plus.size()) > s) {
    rep.residual = kInf;
    rep.detail = "infeasible: more than s violated columns";
    return rep;
  }

  const Matrix Lambda = Z + tau * snap_to_zero(point.W, tol);
  const CandidateSetFamily fam = candidate_sets(Lambda, s);
  const bool gamma0_candidate =
      std::find(fam.sets.begin(), fam.sets.end(), part.gamma_zero) != fam.sets.end();
  const bool active_match = active_set_of(Lambda, part.gamma_zero) == v_star;

  if (!gamma0_candidate) {
    rep.residual = kInf;
    rep.detail = "Gamma_0 is not a member of T(Lambda; s)";
  } else if (!active_match) {
    rep.residual = kInf;
    rep.detail = "U_{Gamma_0} differs from V_*";
  } else {
    rep.residual = rep.equation_residual;
  }
  rep.satisfied = rep.residual <= tol;
  return rep;
}

StationarityReport check_kkt(const Problem& problem, const Vector& x, Index s, double tol) {
  if (x.size() != problem.num_vars()) throw Error(ErrorCode::kShapeMismatch, "x has wrong length");
  const Matrix Z = snap_to_zero(problem.constraints(x), tol);
  const ColumnPartition part = partition(Z);
  const auto norm = static_cast<Index>(part.gamma_plus.size());

  if (norm > s) {
    StationarityReport rep;
    rep.kind = StationarityKind::kKkt;
    rep.tolerance = tol;
    rep.residual = rep.equation_residual = kInf;
    rep.detail = "infeasible: more than s violated columns";
    return rep;
  }
  if (norm < s) {
    // The normal cone is {0}, so W = 0.
    StationarityReport rep = nnls_report(problem, x, ActiveSet{}, StationarityKind::kKkt, tol);
    rep.active_set = zero_entries(Z, part.gamma_zero);
    if (rep.satisfied) rep.tau_star = kInf;
    return rep;
  }
  StationarityReport rep =
      nnls_report(problem, x, zero_entries(Z, part.gamma_zero), StationarityKind::kKkt, tol);
  if (rep.satisfied) {
    try {
      rep.tau_star = tau_star(problem, x, s, tol);
    } catch (const Error&) {
      rep.detail = "tau* unavailable: multiplier gradients are rank deficient";
    }
  }
  return rep;
}

StationarityReport check_bkkt(const Problem& problem, const Vector& x, std::span<const int> y,
                              Index s, double tol) {
  if (x.size() != problem.num_vars()) throw Error(ErrorCode::kShapeMismatch, "x has wrong length");
  const Index N = problem.cols();
  if (static_cast<Index>(y.size()) != N) throw Error(ErrorCode::kShapeMismatch, "y must have length N");
  Index ones = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(ErrorCode::kInvalidArgument, "y must be binary");
    ones += v;
  }
  if (ones < N - s) throw Error(ErrorCode::kInvalidArgument, "sum(y) must be at least N - s");

  const Matrix Z = snap_to_zero(problem.constraints(x), tol);
  ActiveSet vb;
  for (Index n = 0; n < N; ++n) {
    if (y[static_cast<std::size_t>(n)] == 0) continue;
    if (Z.col(n).maxCoeff() > 0.0) {
      throw Error(ErrorCode::kInfeasible,
                  "x violates column " + std::to_string(n + 1) + " selected by y");
    }
    for (Index m = 0; m < Z.rows(); ++m) {
      if (Z(m, n) == 0.0) vb.pairs.push_back({m, n});
    }
  }
  return nnls_report(problem, x, vb, StationarityKind::kBkkt, tol);
}

double tau_star(const Problem& problem, const Vector& x, Index s, double zero_tol) {
  if (x.size() != problem.num_vars()) throw Error(ErrorCode::kShapeMismatch, "x has wrong length");
  const Matrix Z = snap_to_zero(problem.constraints(x), zero_tol);
  const ColumnPartition part = partition(Z);
  const auto norm = static_cast<Index>(part.gamma_plus.size());
  if (norm > s) throw Error(ErrorCode::kInfeasible, "x is infeasible");
  if (norm < s) return kInf;

  const ActiveSet v_star = zero_entries(Z, part.gamma_zero);
  if (v_star.empty()) return kInf;
  const Matrix A = problem.constraint_jacobian(x, v_star.pairs);
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  qr.setThreshold(kRankTol);
  if (qr.rank() < A.cols()) {
    throw Error(ErrorCode::kRankDeficient, "gradients on V_* are not linearly independent");
  }
  const Vector wv = qr.solve(-problem.objective_gradient(x));

  Matrix W = Matrix::Zero(problem.rows(), problem.cols());
  for (std::size_t i = 0; i < v_star.size(); ++i) {
    W(v_star.pairs[i].row, v_star.pairs[i].col) = wv[static_cast<Index>(i)];
  }
  double r_star = 0.0;
  for (Index n : part.gamma_zero) r_star = std::max(r_star, W.col(n).norm());
  if (r_star == 0.0) return kInf;
  return kth_largest_pos_norm(Z, s) / r_star;
}

bool theta_positive_definite(const Problem& problem, const PrimalDualPoint& point,
                             const ActiveSet& V) {
  Eigen::LLT<Matrix> llt(theta(problem, point, V));
  return llt.info() == Eigen::Success;
}

}  // namespace stepcon
