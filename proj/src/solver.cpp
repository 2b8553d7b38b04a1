#include "stepcon/solver.hpp"

#include "number_format.hpp"
#include "stepcon/step_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stepcon {

double gamma_for_alpha(double alpha, Index s) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be in (0,1)");
  if (s < 1) throw Error(ErrorCode::kInvalidArgument, "s must be >= 1");
  const double slack = 1e-12;
  double a = 4.0;
  if (alpha <= 0.01 + slack) {
    a = 2.0;
  } else if (alpha <= 0.05 + slack) {
    a = 3.0;
  }
  return a / static_cast<double>(s);
}

Index sparsity_for_alpha(double alpha, Index N) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be in (0,1)");
  if (N < 1) throw Error(ErrorCode::kInvalidArgument, "N must be >= 1");
  const double prod = alpha * static_cast<double>(N);
  return static_cast<Index>(std::ceil(prod - 1e-9 * std::max(1.0, prod)));
}

SolverConfig SolverConfig::for_alpha(double alpha, Index N) {
  SolverConfig c;
  c.s = std::max<Index>(1, sparsity_for_alpha(alpha, N));
  c.gamma = gamma_for_alpha(alpha, c.s);
  return c;
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); };
  if (max_it < 1) fail("max_it must be a positive integer");
  if (!(tol_scale > 0.0)) fail("tol_scale must be positive");
  if (!(rho > 0.0)) fail("rho must be positive");
  if (!(mu_bar > 0.0)) fail("mu_bar must be positive");
  if (!(nu > 0.0 && nu < 1.0)) fail("nu must be in (0,1)");
  if (!(pi > 0.0 && pi < 1.0)) fail("pi must be in (0,1)");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) fail("gamma must be positive");
  if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau must be positive");
  if (s < 1) fail("s must be >= 1");
  if (t_max < 1) fail("t_max must be a positive integer");
  if (!(pivot_tol > 0.0)) fail("pivot_tol must be positive");
  if (!(zero_band >= 0.0) || !std::isfinite(zero_band)) fail("zero_band must be nonnegative");
}

double SolverConfig::tolerance(const Problem& problem) const {
  return tol_scale * static_cast<double>(problem.num_vars()) * static_cast<double>(problem.rows()) *
         static_cast<double>(problem.cols());
}

const char* to_string(DirectionKind kind) {
  switch (kind) {
    case DirectionKind::kNewton:
      return "newton";
    case DirectionKind::kFallback:
      return "fallback";
    case DirectionKind::kNone:
      break;
  }
  return "none";
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "Converged";
    case SolveStatus::kMaxIterations:
      return "MaxIterations";
    case SolveStatus::kLineSearchStalled:
      break;
  }
  return "LineSearchStalled";
}

ColumnSet select_T(const Matrix& Lambda, Index s) { return representative_set(Lambda, s); }

NewtonDirection newton_direction(const Problem& problem, const PrimalDualPoint& point,
                                 const ActiveSet& V, double mu, double pivot_tol) {
  if (mu < 0.0) throw Error(ErrorCode::kInvalidArgument, "mu must be nonnegative");
  const Index K = problem.num_vars();
  const auto nv = static_cast<Index>(V.size());
  const Vector F = residual_F(problem, point, V);

  Matrix H(K + nv, K + nv);
  H.topLeftCorner(K, K) = theta(problem, point, V);
  if (nv > 0) {
    const Matrix A = problem.constraint_jacobian(point.x, V.pairs);
    H.topRightCorner(K, nv) = A;
    H.bottomLeftCorner(nv, K) = A.transpose();
    H.bottomRightCorner(nv, nv) = -mu * Matrix::Identity(nv, nv);
  }

  NewtonDirection out;
  out.direction.x = Vector::Zero(K);
  out.direction.W = -point.W;  // W_Vbar block: d = -W_Vbar
  for (const IndexPair& p : V.pairs) out.direction.W(p.row, p.col) = 0.0;

  const double scale = H.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !std::isfinite(scale)) return out;
  Eigen::PartialPivLU<Matrix> lu(H);
  const Vector pivots = lu.matrixLU().diagonal();
  if ((pivots.cwiseAbs().array() < pivot_tol * scale).any()) return out;

  const Vector d = lu.solve(-F.head(K + nv));
  if (!d.allFinite()) return out;
  out.direction.x = d.head(K);
  for (Index i = 0; i < nv; ++i) {
    const IndexPair& p = V.pairs[static_cast<std::size_t>(i)];
    out.direction.W(p.row, p.col) = d[K + i];
  }
  out.solvable = true;
  return out;
}

PrimalDualPoint fallback_direction(const Problem& problem, const PrimalDualPoint& point,
                                   const ActiveSet& V) {
  const Vector F = residual_F(problem, point, V);
  return unstack(-F, V, problem.num_vars(), problem.rows(), problem.cols());
}

LineSearchResult line_search(const Problem& problem, const Vector& x, const Vector& d_x, Index s,
                             double gamma, double pi, int t_max, double zero_tol) {
  if (gamma < 0.0) throw Error(ErrorCode::kInvalidArgument, "gamma must be nonnegative");
  if (!(pi > 0.0 && pi < 1.0)) throw Error(ErrorCode::kInvalidArgument, "pi must be in (0,1)");
  const double bound = (gamma + 1.0) * static_cast<double>(s);
  LineSearchResult res;
  double alpha = 1.0;
  for (int t = 0; t <= t_max; ++t) {
    const Matrix G = problem.constraints(x + alpha * d_x);
    if (G.allFinite() && static_cast<double>(step_norm(snap_to_zero(G, zero_tol))) <= bound) {
      res.t = t;
      res.alpha = alpha;
      return res;
    }
    if (t < t_max) alpha *= pi;
  }
  res.t = t_max;
  res.alpha = alpha;
  res.stalled = true;
  return res;
}

namespace {

struct IterateState {
  ActiveSet V;
  Index violations = 0;
  double residual = 0.0;
};

IterateState evaluate(const Problem& problem, const PrimalDualPoint& w, const SolverConfig& cfg,
                      double zero_tol, double w_tol) {
  const Matrix G = problem.constraints(w.x);
  if (!G.allFinite()) throw Error(ErrorCode::kNonFinite, "constraint values are not finite");
  const Matrix Lambda = snap_to_zero(G, zero_tol) + cfg.tau * snap_to_zero(w.W, w_tol);
  IterateState st;
  st.violations = step_norm(snap_to_zero(G, w_tol));
  st.V = active_set_of(Lambda, select_T(Lambda, cfg.s));
  st.residual = residual_F(problem, w, st.V).norm();
  if (!std::isfinite(st.residual)) throw Error(ErrorCode::kNonFinite, "residual is not finite");
  return st;
}

}  // namespace

SolveResult solve(const Problem& problem, const SolverConfig& config,
                  const std::optional<PrimalDualPoint>& w0) {
  config.validate();
  SolveResult result;
  result.tolerance = config.tolerance(problem);
  PrimalDualPoint w = w0 ? *w0 : PrimalDualPoint::zeros(problem);
  if (w.x.size() != problem.num_vars() || w.W.rows() != problem.rows() ||
      w.W.cols() != problem.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "starting point does not match the problem");
  }
  if (!w.x.allFinite() || !w.W.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "starting point is not finite");
  }

  const double band = std::max(config.zero_band, result.tolerance);
  IterateState st = evaluate(problem, w, config, band, result.tolerance);
  double mu = std::min(config.mu_bar, config.rho * st.residual);
  int consecutive_stalls = 0;

  for (int iter = 0;; ++iter) {
    IterationRecord rec;
    rec.iter = iter;
    rec.residual = st.residual;
    rec.objective = problem.objective(w.x);
    rec.violations = st.violations;
    rec.mu = mu;

    if (st.residual < result.tolerance) {
      result.status = SolveStatus::kConverged;
    } else if (consecutive_stalls >= 2) {
      result.status = SolveStatus::kLineSearchStalled;
    } else if (iter >= config.max_it) {
      result.status = SolveStatus::kMaxIterations;
    } else {
      NewtonDirection nd = newton_direction(problem, w, st.V, mu, config.pivot_tol);
      PrimalDualPoint d;
      if (nd.solvable) {
        d = std::move(nd.direction);
        rec.direction = DirectionKind::kNewton;
      } else {
        d = fallback_direction(problem, w, st.V);
        rec.direction = DirectionKind::kFallback;
      }
      const LineSearchResult ls =
          line_search(problem, w.x, d.x, config.s, config.gamma, config.pi,
                                                config.t_max, band);
      consecutive_stalls = ls.stalled ? consecutive_stalls + 1 : 0;
      rec.step = ls.alpha;
      w.x += ls.alpha * d.x;
      w.W += ls.alpha * d.W;
      if (!w.x.allFinite() || !w.W.allFinite()) {
        throw Error(ErrorCode::kNonFinite,
                    "iterate became non-finite at iteration " + std::to_string(iter + 1));
      }
      result.trace.push_back(rec);
      st = evaluate(problem, w, config, band, result.tolerance);
      mu = std::min(config.nu * mu, config.rho * st.residual);
      continue;
    }
    result.trace.push_back(rec);
    result.iterations = iter;
    break;
  }

  result.final_report =
      check_tau_stationary(problem, w, config.tau, config.s, 10.0 * result.tolerance);
  result.point = std::move(w);
  return result;
}

std::vector<RateSample> rate_diagnostic(const std::vector<IterationRecord>& trace) {
  std::vector<RateSample> out;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double prev = trace[i - 1].residual;
    const double cur = trace[i].residual;
    if (prev > 0.0 && cur > 0.0) out.push_back({trace[i].iter, cur / (prev * prev)});
  }
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace) {
  out << "iter,residual,objective,violations,step,mu,direction\n";
  for (const IterationRecord& r : trace) {
    out << r.iter << ',' << detail::format_double(r.residual) << ','
        << detail::format_double(r.objective) << ',' << r.violations << ','
        << detail::format_double(r.step) << ',' << detail::format_double(r.mu) << ','
        << to_string(r.direction) << '\n';
  }
}

}  // namespace stepcon
