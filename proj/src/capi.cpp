#include "stepcon/stepcon.h"

#include "stepcon/baselines.hpp"
#include "stepcon/problem.hpp"
#include "stepcon/solver.hpp"
#include "stepcon/stationarity.hpp"
#include "stepcon/statistics.hpp"
#include "stepcon/step_geometry.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <string>

struct stepcon_problem {
  std::unique_ptr<stepcon::Problem> impl;
};

struct stepcon_result {
  stepcon::SolveResult impl;
};

namespace {

using stepcon::ErrorCode;
using stepcon::Index;
using stepcon::Matrix;
using stepcon::Vector;

thread_local std::string g_last_error;

struct CallbackFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

stepcon_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return STEPCON_ERR_INVALID_ARGUMENT;
    case ErrorCode::kShapeMismatch:
      return STEPCON_ERR_SHAPE_MISMATCH;
    case ErrorCode::kNotInSet:
      return STEPCON_ERR_NOT_IN_SET;
    case ErrorCode::kEnumerationLimit:
      return STEPCON_ERR_ENUMERATION_LIMIT;
    case ErrorCode::kParse:
      return STEPCON_ERR_PARSE;
    case ErrorCode::kIo:
      return STEPCON_ERR_IO;
    case ErrorCode::kInfeasible:
      return STEPCON_ERR_INFEASIBLE;
    case ErrorCode::kRankDeficient:
      return STEPCON_ERR_RANK_DEFICIENT;
    case ErrorCode::kNoConvergence:
      return STEPCON_ERR_NO_CONVERGENCE;
    case ErrorCode::kNonFinite:
      return STEPCON_ERR_NON_FINITE;
    case ErrorCode::kEmptyFeasibleGrid:
      return STEPCON_ERR_EMPTY_FEASIBLE_GRID;
    case ErrorCode::kNoQualifyingTrials:
      return STEPCON_ERR_NO_QUALIFYING_TRIALS;
    case ErrorCode::kUnsupported:
      return STEPCON_ERR_UNSUPPORTED;
  }
  return STEPCON_ERR_INTERNAL;
}

template <typename Fn>
stepcon_status guarded(Fn&& fn) {
  try {
    fn();
    return STEPCON_OK;
  } catch (const stepcon::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const CallbackFailure& e) {
    g_last_error = e.what();
    return STEPCON_ERR_CALLBACK;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return STEPCON_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return STEPCON_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return STEPCON_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw stepcon::Error(ErrorCode::kInvalidArgument, what);
}

const stepcon::Problem& deref(const stepcon_problem* p) {
  require(p != nullptr && p->impl != nullptr, "problem handle is null");
  return *p->impl;
}

const stepcon::SolveResult& deref(const stepcon_result* r) {
  require(r != nullptr, "result handle is null");
  return r->impl;
}

Vector read_x(const stepcon::Problem& p, const double* x) {
  require(x != nullptr, "x is null");
  return Eigen::Map<const Vector>(x, p.num_vars());
}

Matrix read_W(const stepcon::Problem& p, const double* W) {
  require(W != nullptr, "W is null");
  return Eigen::Map<const Matrix>(W, p.rows(), p.cols());
}

void copy_out(const Matrix& A, double* out) {
  Eigen::Map<Matrix>(out, A.rows(), A.cols()) = A;
}

stepcon::SolverConfig from_c(const stepcon_solver_config& c) {
  stepcon::SolverConfig cfg;
  cfg.max_it = c.max_it;
  cfg.tol_scale = c.tol_scale;
  cfg.rho = c.rho;
  cfg.mu_bar = c.mu_bar;
  cfg.nu = c.nu;
  cfg.pi = c.pi;
  cfg.gamma = c.gamma;
  cfg.tau = c.tau;
  cfg.s = c.s;
  cfg.t_max = c.t_max;
  cfg.pivot_tol = c.pivot_tol;
  cfg.zero_band = c.zero_band;
  return cfg;
}

void to_c(const stepcon::SolverConfig& cfg, stepcon_solver_config* c) {
  c->max_it = cfg.max_it;
  c->tol_scale = cfg.tol_scale;
  c->rho = cfg.rho;
  c->mu_bar = cfg.mu_bar;
  c->nu = cfg.nu;
  c->pi = cfg.pi;
  c->gamma = cfg.gamma;
  c->tau = cfg.tau;
  c->s = cfg.s;
  c->t_max = cfg.t_max;
  c->pivot_tol = cfg.pivot_tol;
  c->zero_band = cfg.zero_band;
}

void to_c(const stepcon::StationarityReport& rep, stepcon_report* out) {
  out->satisfied = rep.satisfied ? 1 : 0;
  out->residual = rep.residual;
  out->equation_residual = rep.equation_residual;
  out->has_tau_star = rep.tau_star.has_value() ? 1 : 0;
  out->tau_star = rep.tau_star.value_or(std::numeric_limits<double>::quiet_NaN());
  out->active_count = static_cast<int64_t>(rep.active_set.size());
  std::memset(out->detail, 0, sizeof(out->detail));
  std::strncpy(out->detail, rep.detail.c_str(), sizeof(out->detail) - 1);
}

stepcon_direction to_c(stepcon::DirectionKind k) {
  switch (k) {
    case stepcon::DirectionKind::kNewton:
      return STEPCON_DIRECTION_NEWTON;
    case stepcon::DirectionKind::kFallback:
      return STEPCON_DIRECTION_FALLBACK;
    case stepcon::DirectionKind::kNone:
      break;
  }
  return STEPCON_DIRECTION_NONE;
}

stepcon_solve_status to_c(stepcon::SolveStatus s) {
  switch (s) {
    case stepcon::SolveStatus::kConverged:
      return STEPCON_CONVERGED;
    case stepcon::SolveStatus::kMaxIterations:
      return STEPCON_MAX_ITERATIONS;
    case stepcon::SolveStatus::kLineSearchStalled:
      break;
  }
  return STEPCON_LINE_SEARCH_STALLED;
}

void check_callback(int rc, const char* name) {
  if (rc != 0) throw CallbackFailure(std::string("callback ") + name + " returned " + std::to_string(rc));
}

stepcon::CallbackProblem::Callbacks wrap(const stepcon_callbacks& cb, Index K, Index M, Index N) {
  stepcon::CallbackProblem::Callbacks out;
  out.f = [cb](const Vector& x) {
    double v = 0.0;
    check_callback(cb.f(x.data(), &v, cb.user), "f");
    return v;
  };
  out.grad_f = [cb, K](const Vector& x) {
    Vector g(K);
    check_callback(cb.grad_f(x.data(), g.data(), cb.user), "grad_f");
    return g;
  };
  if (cb.hess_f != nullptr) {
    out.hess_f = [cb, K](const Vector& x) {
      Matrix H(K, K);
      check_callback(cb.hess_f(x.data(), H.data(), cb.user), "hess_f");
      return H;
    };
  }
  out.G = [cb, M, N](const Vector& x) {
    Matrix Z(M, N);
    check_callback(cb.G(x.data(), Z.data(), cb.user), "G");
    return Z;
  };
  out.grad_G = [cb, K](const Vector& x, Index m, Index n) {
    Vector g(K);
    check_callback(cb.grad_G(x.data(), m, n, g.data(), cb.user), "grad_G");
    return g;
  };
  if (cb.hess_G != nullptr) {
    out.hess_G = [cb, K](const Vector& x, Index m, Index n) {
      Matrix H(K, K);
      check_callback(cb.hess_G(x.data(), m, n, H.data(), cb.user), "hess_G");
      return H;
    };
  }
  return out;
}

}  // namespace

extern "C" {

const char* stepcon_last_error(void) { return g_last_error.c_str(); }

const char* stepcon_status_string(stepcon_status status) {
  switch (status) {
    case STEPCON_OK:
      return "ok";
    case STEPCON_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case STEPCON_ERR_SHAPE_MISMATCH:
      return "shape mismatch";
    case STEPCON_ERR_NOT_IN_SET:
      return "point not in set";
    case STEPCON_ERR_ENUMERATION_LIMIT:
      return "enumeration limit exceeded";
    case STEPCON_ERR_PARSE:
      return "parse error";
    case STEPCON_ERR_IO:
      return "i/o error";
    case STEPCON_ERR_INFEASIBLE:
      return "infeasible";
    case STEPCON_ERR_RANK_DEFICIENT:
      return "rank deficient";
    case STEPCON_ERR_NO_CONVERGENCE:
      return "no convergence";
    case STEPCON_ERR_NON_FINITE:
      return "non-finite value";
    case STEPCON_ERR_EMPTY_FEASIBLE_GRID:
      return "no feasible grid point";
    case STEPCON_ERR_NO_QUALIFYING_TRIALS:
      return "no qualifying trials";
    case STEPCON_ERR_UNSUPPORTED:
      return "unsupported";
    case STEPCON_ERR_CALLBACK:
      return "callback failed";
    case STEPCON_ERR_INTERNAL:
      break;
  }
  return "internal error";
}

const char* stepcon_version(void) { return "0.1.0"; }

void stepcon_norm_opt_params_default(stepcon_norm_opt_params* params) {
  if (params == nullptr) return;
  const stepcon::NormOptParams d;
  params->K = d.K;
  params->M = d.M;
  params->N = d.N;
  params->b = d.b;
  params->lambda1 = d.lambda1;
  params->lambda2 = d.lambda2;
  params->seed = d.seed;
}

stepcon_status stepcon_problem_norm_opt(const stepcon_norm_opt_params* params,
                                        stepcon_problem** out) {
  return guarded([&] {
    require(params != nullptr && out != nullptr, "null argument");
    stepcon::NormOptParams p;
    p.K = params->K;
    p.M = params->M;
    p.N = params->N;
    p.b = params->b;
    p.lambda1 = params->lambda1;
    p.lambda2 = params->lambda2;
    p.seed = params->seed;
    *out = new stepcon_problem{std::make_unique<stepcon::NormOptProblem>(stepcon::make_norm_opt(p))};
  });
}

stepcon_status stepcon_problem_load_samples(const char* path, double b, double lambda1,
                                            double lambda2, stepcon_problem** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new stepcon_problem{std::make_unique<stepcon::NormOptProblem>(
        stepcon::load_samples(path, stepcon::SampleLayout{b, lambda1, lambda2}))};
  });
}

stepcon_status stepcon_problem_counterexample(stepcon_problem** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new stepcon_problem{std::make_unique<stepcon::CounterexampleProblem>()};
  });
}

stepcon_status stepcon_problem_callbacks(int64_t K, int64_t M, int64_t N,
                                         const stepcon_callbacks* callbacks,
                                         stepcon_problem** out) {
  return guarded([&] {
    require(callbacks != nullptr && out != nullptr, "null argument");
    require(callbacks->f && callbacks->grad_f && callbacks->G && callbacks->grad_G,
            "f, grad_f, G and grad_G are required");
    *out = new stepcon_problem{
        std::make_unique<stepcon::CallbackProblem>(K, M, N, wrap(*callbacks, K, M, N))};
  });
}

void stepcon_problem_free(stepcon_problem* problem) { delete problem; }

stepcon_status stepcon_problem_dims(const stepcon_problem* problem, int64_t* K, int64_t* M,
                                    int64_t* N) {
  return guarded([&] {
    const auto& p = deref(problem);
    if (K) *K = p.num_vars();
    if (M) *M = p.rows();
    if (N) *N = p.cols();
  });
}

stepcon_status stepcon_problem_objective(const stepcon_problem* problem, const double* x,
                                         double* value) {
  return guarded([&] {
    const auto& p = deref(problem);
    require(value != nullptr, "value is null");
    *value = p.objective(read_x(p, x));
  });
}

stepcon_status stepcon_problem_constraints(const stepcon_problem* problem, const double* x,
                                           double* values) {
  return guarded([&] {
    const auto& p = deref(problem);
    require(values != nullptr, "values is null");
    copy_out(p.constraints(read_x(p, x)), values);
  });
}

stepcon_status stepcon_problem_write_samples(const stepcon_problem* problem, const char* path) {
  return guarded([&] {
    const auto* p = dynamic_cast<const stepcon::NormOptProblem*>(&deref(problem));
    if (p == nullptr) throw stepcon::Error(ErrorCode::kUnsupported, "problem has no samples");
    require(path != nullptr, "path is null");
    stepcon::write_samples(*p, std::filesystem::path(path));
  });
}

void stepcon_solver_config_default(stepcon_solver_config* config) {
  if (config != nullptr) to_c(stepcon::SolverConfig{}, config);
}

stepcon_status stepcon_solver_config_for_alpha(double alpha, int64_t N,
                                               stepcon_solver_config* config) {
  return guarded([&] {
    require(config != nullptr, "config is null");
    to_c(stepcon::SolverConfig::for_alpha(alpha, N), config);
  });
}

stepcon_status stepcon_sparsity_for_alpha(double alpha, int64_t N, int64_t* s) {
  return guarded([&] {
    require(s != nullptr, "s is null");
    *s = stepcon::sparsity_for_alpha(alpha, N);
  });
}

stepcon_status stepcon_gamma_for_alpha(double alpha, int64_t s, double* gamma) {
  return guarded([&] {
    require(gamma != nullptr, "gamma is null");
    *gamma = stepcon::gamma_for_alpha(alpha, s);
  });
}

stepcon_status stepcon_solve(const stepcon_problem* problem, const stepcon_solver_config* config,
                             const double* x0, const double* W0, stepcon_result** out) {
  return guarded([&] {
    const auto& p = deref(problem);
    require(config != nullptr && out != nullptr, "null argument");
    std::optional<stepcon::PrimalDualPoint> w0;
    if (x0 != nullptr || W0 != nullptr) {
      w0 = stepcon::PrimalDualPoint::zeros(p);
      if (x0 != nullptr) w0->x = read_x(p, x0);
      if (W0 != nullptr) w0->W = read_W(p, W0);
    }
    auto res = std::make_unique<stepcon_result>();
    res->impl = stepcon::solve(p, from_c(*config), w0);
    *out = res.release();
  });
}

void stepcon_result_free(stepcon_result* result) { delete result; }

stepcon_status stepcon_result_summary(const stepcon_result* result,
                                      stepcon_solve_summary* summary) {
  return guarded([&] {
    const auto& r = deref(result);
    require(summary != nullptr, "summary is null");
    require(!r.trace.empty(), "result has an empty trace");
    const stepcon::IterationRecord& last = r.trace.back();
    summary->status = to_c(r.status);
    summary->iterations = r.iterations;
    summary->residual = last.residual;
    summary->objective = last.objective;
    summary->violations = last.violations;
    summary->tolerance = r.tolerance;
    summary->stationary = r.final_report.satisfied ? 1 : 0;
    summary->stationarity_residual = r.final_report.residual;
  });
}

stepcon_status stepcon_result_x(const stepcon_result* result, double* x) {
  return guarded([&] {
    const auto& r = deref(result);
    require(x != nullptr, "x is null");
    Eigen::Map<Vector>(x, r.point.x.size()) = r.point.x;
  });
}

stepcon_status stepcon_result_W(const stepcon_result* result, double* W) {
  return guarded([&] {
    const auto& r = deref(result);
    require(W != nullptr, "W is null");
    copy_out(r.point.W, W);
  });
}

size_t stepcon_result_trace_length(const stepcon_result* result) {
  return result == nullptr ? 0 : result->impl.trace.size();
}

stepcon_status stepcon_result_trace_record(const stepcon_result* result, size_t index,
                                           stepcon_iteration* record) {
  return guarded([&] {
    const auto& r = deref(result);
    require(record != nullptr, "record is null");
    require(index < r.trace.size(), "trace index out of range");
    const stepcon::IterationRecord& it = r.trace[index];
    record->iter = it.iter;
    record->residual = it.residual;
    record->objective = it.objective;
    record->violations = it.violations;
    record->step = it.step;
    record->mu = it.mu;
    record->direction = to_c(it.direction);
  });
}

stepcon_status stepcon_result_write_trace_csv(const stepcon_result* result, const char* path) {
  return guarded([&] {
    const auto& r = deref(result);
    require(path != nullptr, "path is null");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw stepcon::Error(ErrorCode::kIo, std::string("cannot write ") + path);
    stepcon::write_trace_csv(out, r.trace);
    out.flush();
    if (!out) throw stepcon::Error(ErrorCode::kIo, std::string("error while writing ") + path);
  });
}

stepcon_status stepcon_result_rate_ratios(const stepcon_result* result, double* ratios,
                                          size_t capacity, size_t* count) {
  return guarded([&] {
    const auto& r = deref(result);
    require(count != nullptr, "count is null");
    const auto samples = stepcon::rate_diagnostic(r.trace);
    *count = samples.size();
    for (size_t i = 0; i < samples.size() && i < capacity; ++i) {
      require(ratios != nullptr, "ratios is null");
      ratios[i] = samples[i].ratio;
    }
  });
}

stepcon_status stepcon_check_kkt(const stepcon_problem* problem, const double* x, int64_t s,
                                 double tol, stepcon_report* report, double* W_out) {
  return guarded([&] {
    const auto& p = deref(problem);
    require(report != nullptr, "report is null");
    const auto rep = stepcon::check_kkt(p, read_x(p, x), s, tol);
    to_c(rep, report);
    if (W_out != nullptr) {
      copy_out(rep.witness_W.value_or(Matrix::Zero(p.rows(), p.cols())), W_out);
    }
  });
}

stepcon_status stepcon_check_bkkt(const stepcon_problem* problem, const double* x,
                                  const int32_t* y, int64_t s, double tol, stepcon_report* report,
                                  double* W_out) {
  return guarded([&] {
    const auto& p = deref(problem);
    require(report != nullptr && y != nullptr, "null argument");
    std::vector<int> yv(y, y + p.cols());
    const auto rep = stepcon::check_bkkt(p, read_x(p, x), yv, s, tol);
    to_c(rep, report);
    if (W_out != nullptr) {
      copy_out(rep.witness_W.value_or(Matrix::Zero(p.rows(), p.cols())), W_out);
    }
  });
}

stepcon_status stepcon_check_tau_stationary(const stepcon_problem* problem, const double* x,
                                            const double* W, double tau, int64_t s, double tol,
                                            stepcon_report* report) {
  return guarded([&] {
    const auto& p = deref(problem);
    require(report != nullptr, "report is null");
    const stepcon::PrimalDualPoint w{read_x(p, x), read_W(p, W)};
    to_c(stepcon::check_tau_stationary(p, w, tau, s, tol), report);
  });
}

stepcon_status stepcon_tau_star(const stepcon_problem* problem, const double* x, int64_t s,
                                double* tau_star) {
  return guarded([&] {
    const auto& p = deref(problem);
    require(tau_star != nullptr, "tau_star is null");
    *tau_star = stepcon::tau_star(p, read_x(p, x), s);
  });
}

stepcon_status stepcon_step_norm(const double* Z, int64_t M, int64_t N, int64_t* count) {
  return guarded([&] {
    require(Z != nullptr && count != nullptr, "null argument");
    require(M >= 1 && N >= 1, "M and N must be positive");
    const Matrix A = Eigen::Map<const Matrix>(Z, M, N);
    stepcon::validate_sample_matrix(A);
    *count = stepcon::step_norm(A);
  });
}

stepcon_status stepcon_dkw_sample_size(double epsilon, double beta, int64_t* N) {
  return guarded([&] {
    require(N != nullptr, "N is null");
    *N = stepcon::dkw_sample_size(epsilon, beta);
  });
}

stepcon_status stepcon_feasibility_sample_size(double alpha, int64_t s, double beta, int32_t exact,
                                               int64_t* N) {
  return guarded([&] {
    require(N != nullptr, "N is null");
    *N = stepcon::feasibility_sample_size(alpha, s, beta, exact != 0);
  });
}

stepcon_status stepcon_feasibility_confidence(double alpha, int64_t s, int64_t N,
                                              double* confidence) {
  return guarded([&] {
    require(confidence != nullptr, "confidence is null");
    *confidence = stepcon::feasibility_confidence(alpha, s, N);
  });
}

stepcon_status stepcon_s_lower_bound(double nu, double alpha_star, int64_t N, double* bound,
                                     double* confidence) {
  return guarded([&] {
    require(bound != nullptr && confidence != nullptr, "null argument");
    const auto r = stepcon::s_lower_bound(nu, alpha_star, N);
    *bound = r.bound;
    *confidence = r.confidence;
  });
}

stepcon_status stepcon_monte_carlo_norm_opt(int64_t K, int64_t M, double b, const double* x,
                                            double alpha, int64_t s, int64_t N, int32_t trials,
                                            uint64_t seed, int64_t holdout,
                                            stepcon_monte_carlo* result) {
  return guarded([&] {
    require(x != nullptr && result != nullptr, "null argument");
    require(K >= 1, "K must be positive");
    const Vector xv = Eigen::Map<const Vector>(x, K);
    const auto r = stepcon::monte_carlo_feasibility(stepcon::norm_opt_sampler(K, M, b), xv, alpha,
                                                    s, N, trials, seed, holdout);
    result->rate = r.rate;
    result->trials = r.trials;
    result->qualifying = r.qualifying;
    result->mean_violation = r.mean_violation;
    result->max_violation = r.max_violation;
  });
}

stepcon_status stepcon_export_bip(const stepcon_problem* problem, int64_t s, double big_M,
                                  const char* path) {
  return guarded([&] {
    const auto& p = deref(problem);
    require(path != nullptr, "path is null");
    stepcon::export_bip(p, s, big_M, path);
  });
}

stepcon_status stepcon_grid_search(const stepcon_problem* problem, int64_t s, const double* lower,
                                   const double* upper, int64_t points_per_dim, double* best_x,
                                   double* best_f) {
  return guarded([&] {
    const auto& p = deref(problem);
    require(best_x != nullptr && best_f != nullptr, "null argument");
    stepcon::GridSpec grid{read_x(p, lower), read_x(p, upper), points_per_dim};
    const auto r = stepcon::grid_search(p, s, grid);
    Eigen::Map<Vector>(best_x, r.best_x.size()) = r.best_x;
    *best_f = r.best_f;
  });
}

}  // extern "C"
