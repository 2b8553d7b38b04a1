/* C interface to the stepcon library.
 *
 * All functions return a stepcon_status. On failure the message of the most
 * recent error on the calling thread is available from stepcon_last_error().
 * Matrices are passed as column-major arrays; an M x N matrix Z stores Z(m, n)
 * at index m + n * M. Column and row indices are 0-based.
 */
#ifndef STEPCON_STEPCON_H
#define STEPCON_STEPCON_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(STEPCON_BUILDING_LIBRARY)
#define STEPCON_API __declspec(dllexport)
#else
#define STEPCON_API __declspec(dllimport)
#endif
#else
#define STEPCON_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stepcon_status {
  STEPCON_OK = 0,
  STEPCON_ERR_INVALID_ARGUMENT = 1,
  STEPCON_ERR_SHAPE_MISMATCH = 2,
  STEPCON_ERR_NOT_IN_SET = 3,
  STEPCON_ERR_ENUMERATION_LIMIT = 4,
  STEPCON_ERR_PARSE = 5,
  STEPCON_ERR_IO = 6,
  STEPCON_ERR_INFEASIBLE = 7,
  STEPCON_ERR_RANK_DEFICIENT = 8,
  STEPCON_ERR_NO_CONVERGENCE = 9,
  STEPCON_ERR_NON_FINITE = 10,
  STEPCON_ERR_EMPTY_FEASIBLE_GRID = 11,
  STEPCON_ERR_NO_QUALIFYING_TRIALS = 12,
  STEPCON_ERR_UNSUPPORTED = 13,
  STEPCON_ERR_CALLBACK = 14,
  STEPCON_ERR_INTERNAL = 15
} stepcon_status;

typedef struct stepcon_problem stepcon_problem;
typedef struct stepcon_result stepcon_result;

STEPCON_API const char* stepcon_last_error(void);
STEPCON_API const char* stepcon_status_string(stepcon_status status);
STEPCON_API const char* stepcon_version(void);

/* ---- Problems ---------------------------------------------------------- */

typedef struct stepcon_norm_opt_params {
  int64_t K;
  int64_t M;
  int64_t N;
  double b;
  double lambda1;
  double lambda2;
  uint64_t seed;
} stepcon_norm_opt_params;

/* K=10, M=1, N=100, b=100, lambda1=lambda2=0.5, seed=0. */
STEPCON_API void stepcon_norm_opt_params_default(stepcon_norm_opt_params* params);

/* Norm-optimization instance with xi ~ N(0, 1) drawn from params->seed. */
STEPCON_API stepcon_status stepcon_problem_norm_opt(const stepcon_norm_opt_params* params,
                                                    stepcon_problem** out);

/* Norm-optimization instance from a sample file: one M x K block of
 * comma-separated values per sample, blocks separated by blank lines. */
STEPCON_API stepcon_status stepcon_problem_load_samples(const char* path, double b, double lambda1,
                                                        double lambda2, stepcon_problem** out);

/* K=2, M=1, N=2, f = (x1 - 2)^2, G = [x1^2 - x2, x2 - 1]. */
STEPCON_API stepcon_status stepcon_problem_counterexample(stepcon_problem** out);

/* User-supplied smooth problem. Callbacks return 0 on success; any other
 * value aborts the calling operation with STEPCON_ERR_CALLBACK. The Hessian
 * callbacks may be NULL, in which case they are taken as zero. */
typedef struct stepcon_callbacks {
  void* user;
  int (*f)(const double* x, double* value, void* user);
  int (*grad_f)(const double* x, double* grad /* K */, void* user);
  int (*hess_f)(const double* x, double* hess /* K x K */, void* user);
  int (*G)(const double* x, double* values /* M x N */, void* user);
  int (*grad_G)(const double* x, int64_t m, int64_t n, double* grad /* K */, void* user);
  int (*hess_G)(const double* x, int64_t m, int64_t n, double* hess /* K x K */, void* user);
} stepcon_callbacks;

STEPCON_API stepcon_status stepcon_problem_callbacks(int64_t K, int64_t M, int64_t N,
                                                     const stepcon_callbacks* callbacks,
                                                     stepcon_problem** out);

STEPCON_API void stepcon_problem_free(stepcon_problem* problem);

STEPCON_API stepcon_status stepcon_problem_dims(const stepcon_problem* problem, int64_t* K,
                                                int64_t* M, int64_t* N);
STEPCON_API stepcon_status stepcon_problem_objective(const stepcon_problem* problem,
                                                     const double* x, double* value);
STEPCON_API stepcon_status stepcon_problem_constraints(const stepcon_problem* problem,
                                                       const double* x, double* values);
/* Writes the samples of a norm-optimization instance. */
STEPCON_API stepcon_status stepcon_problem_write_samples(const stepcon_problem* problem,
                                                         const char* path);

/* ---- Solver ------------------------------------------------------------ */

typedef struct stepcon_solver_config {
  int32_t max_it;
  double tol_scale; /* tolerance = tol_scale * K * M * N */
  double rho;
  double mu_bar;
  double nu;
  double pi;
  double gamma;
  double tau;
  int64_t s;
  int32_t t_max;
  double pivot_tol;
  double zero_band; /* constraint values this close to zero count as zero */
} stepcon_solver_config;

typedef enum stepcon_solve_status {
  STEPCON_CONVERGED = 0,
  STEPCON_MAX_ITERATIONS = 1,
  STEPCON_LINE_SEARCH_STALLED = 2
} stepcon_solve_status;

typedef enum stepcon_direction {
  STEPCON_DIRECTION_NEWTON = 0,
  STEPCON_DIRECTION_FALLBACK = 1,
  STEPCON_DIRECTION_NONE = 2
} stepcon_direction;

typedef struct stepcon_iteration {
  int32_t iter;
  double residual;
  double objective;
  int64_t violations;
  double step;
  double mu;
  stepcon_direction direction;
} stepcon_iteration;

typedef struct stepcon_solve_summary {
  stepcon_solve_status status;
  int32_t iterations;
  double residual;
  double objective;
  int64_t violations;
  double tolerance;
  int32_t stationary;          /* final tau-stationarity check passed */
  double stationarity_residual;
} stepcon_solve_summary;

STEPCON_API void stepcon_solver_config_default(stepcon_solver_config* config);
/* Defaults with s = ceil(alpha N) and gamma = a / s (a = 2, 3, 4 for
 * alpha <= 0.01, <= 0.05, larger). */
STEPCON_API stepcon_status stepcon_solver_config_for_alpha(double alpha, int64_t N,
                                                           stepcon_solver_config* config);
STEPCON_API stepcon_status stepcon_sparsity_for_alpha(double alpha, int64_t N, int64_t* s);
STEPCON_API stepcon_status stepcon_gamma_for_alpha(double alpha, int64_t s, double* gamma);

/* x0 (length K) and W0 (M x N) may each be NULL for zero. */
STEPCON_API stepcon_status stepcon_solve(const stepcon_problem* problem,
                                         const stepcon_solver_config* config, const double* x0,
                                         const double* W0, stepcon_result** out);
STEPCON_API void stepcon_result_free(stepcon_result* result);

STEPCON_API stepcon_status stepcon_result_summary(const stepcon_result* result,
                                                  stepcon_solve_summary* summary);
STEPCON_API stepcon_status stepcon_result_x(const stepcon_result* result, double* x);
STEPCON_API stepcon_status stepcon_result_W(const stepcon_result* result, double* W);
STEPCON_API size_t stepcon_result_trace_length(const stepcon_result* result);
STEPCON_API stepcon_status stepcon_result_trace_record(const stepcon_result* result, size_t index,
                                                       stepcon_iteration* record);
/* Columns: iter,residual,objective,violations,step,mu,direction */
STEPCON_API stepcon_status stepcon_result_write_trace_csv(const stepcon_result* result,
                                                          const char* path);
/* ||F_{l+1}|| / ||F_l||^2 for consecutive trace records; writes up to
 * capacity values and stores the total count in *count. */
STEPCON_API stepcon_status stepcon_result_rate_ratios(const stepcon_result* result, double* ratios,
                                                      size_t capacity, size_t* count);

/* ---- Stationarity checks ----------------------------------------------- */

typedef struct stepcon_report {
  int32_t satisfied;
  double residual; /* +inf when a combinatorial condition fails */
  double equation_residual;
  int32_t has_tau_star;
  double tau_star;
  int64_t active_count;
  char detail[128];
} stepcon_report;

/* W_out (M x N, may be NULL) receives the multiplier witness. */
STEPCON_API stepcon_status stepcon_check_kkt(const stepcon_problem* problem, const double* x,
                                             int64_t s, double tol, stepcon_report* report,
                                             double* W_out);
STEPCON_API stepcon_status stepcon_check_bkkt(const stepcon_problem* problem, const double* x,
                                              const int32_t* y, int64_t s, double tol,
                                              stepcon_report* report, double* W_out);
STEPCON_API stepcon_status stepcon_check_tau_stationary(const stepcon_problem* problem,
                                                        const double* x, const double* W,
                                                        double tau, int64_t s, double tol,
                                                        stepcon_report* report);
STEPCON_API stepcon_status stepcon_tau_star(const stepcon_problem* problem, const double* x,
                                            int64_t s, double* tau_star);

/* ---- Step geometry ----------------------------------------------------- */

STEPCON_API stepcon_status stepcon_step_norm(const double* Z, int64_t M, int64_t N,
                                             int64_t* count);

/* ---- Sample-size bounds ------------------------------------------------ */

STEPCON_API stepcon_status stepcon_dkw_sample_size(double epsilon, double beta, int64_t* N);
STEPCON_API stepcon_status stepcon_feasibility_sample_size(double alpha, int64_t s, double beta,
                                                           int32_t exact, int64_t* N);
STEPCON_API stepcon_status stepcon_feasibility_confidence(double alpha, int64_t s, int64_t N,
                                                          double* confidence);
STEPCON_API stepcon_status stepcon_s_lower_bound(double nu, double alpha_star, int64_t N,
                                                 double* bound, double* confidence);

typedef struct stepcon_monte_carlo {
  double rate;
  int32_t trials;
  int32_t qualifying;
  double mean_violation;
  double max_violation;
} stepcon_monte_carlo;

/* Feasibility harness on norm-optimization scenarios (xi ~ N(0, 1)). */
STEPCON_API stepcon_status stepcon_monte_carlo_norm_opt(int64_t K, int64_t M, double b,
                                                        const double* x, double alpha, int64_t s,
                                                        int64_t N, int32_t trials, uint64_t seed,
                                                        int64_t holdout,
                                                        stepcon_monte_carlo* result);

/* ---- Baselines --------------------------------------------------------- */

/* Writes a big-M mixed-integer model in CPLEX LP format. */
STEPCON_API stepcon_status stepcon_export_bip(const stepcon_problem* problem, int64_t s,
                                              double big_M, const char* path);

/* Exhaustive search on a uniform grid over [lower, upper]. */
STEPCON_API stepcon_status stepcon_grid_search(const stepcon_problem* problem, int64_t s,
                                               const double* lower, const double* upper,
                                               int64_t points_per_dim, double* best_x,
                                               double* best_f);

#ifdef __cplusplus
}
#endif

#endif /* STEPCON_STEPCON_H */
