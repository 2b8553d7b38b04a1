#pragma once

// Smoothing Newton method for step-constrained problems.

#include "stepcon/problem.hpp"
#include "stepcon/stationarity.hpp"
#include "stepcon/types.hpp"

#include <optional>
#include <ostream>
#include <vector>

namespace stepcon {

/// gamma = a / s with a = 2 for alpha <= 0.01, 3 for alpha <= 0.05, 4 otherwise.
double gamma_for_alpha(double alpha, Index s);

/// s = ceil(alpha * N), computed so that exact products like 0.05 * 100 are
/// not pushed up by rounding.
Index sparsity_for_alpha(double alpha, Index N);

struct SolverConfig {
  int max_it = 2000;
  double tol_scale = 1e-9;  // tolerance = tol_scale * K * M * N
  double rho = 1e-2;
  double mu_bar = 1e-2;
  double nu = 0.999;
  double pi = 0.85;
  double gamma = 0.6;
  double tau = 0.75;
  Index s = 1;
  int t_max = 100;
  double pivot_tol = 1e-12;
  /// Constraint values within max(zero_band, tolerance) of zero count as
  /// zero when selecting T and V and in the line-search violation count.
  double zero_band = 1e-3;

  /// Defaults with s = ceil(alpha N) and the matching gamma.
  static SolverConfig for_alpha(double alpha, Index N);

  /// Throws kInvalidArgument naming the first offending field.
  void validate() const;
  double tolerance(const Problem& problem) const;
};

enum class DirectionKind { kNewton, kFallback, kNone };
enum class SolveStatus { kConverged, kMaxIterations, kLineSearchStalled };

const char* to_string(DirectionKind kind);
const char* to_string(SolveStatus status);

struct IterationRecord {
  int iter = 0;
  double residual = 0.0;
  double objective = 0.0;
  Index violations = 0;
  /// pi^t for the accepted step; 0 on the terminal record.
  double step = 0.0;
  double mu = 0.0;
  DirectionKind direction = DirectionKind::kNone;
};

struct SolveResult {
  PrimalDualPoint point;
  SolveStatus status = SolveStatus::kMaxIterations;
  /// One record per step taken plus a terminal record (direction kNone).
  std::vector<IterationRecord> trace;
  StationarityReport final_report;
  double tolerance = 0.0;
  int iterations = 0;  // steps taken
};

/// Deterministic member of T(Lambda; s): keep the r largest positive columns
/// (ties to the lower index) and return the rest of Gamma_+ plus Gamma_0.
ColumnSet select_T(const Matrix& Lambda, Index s);

struct NewtonDirection {
  PrimalDualPoint direction;
  bool solvable = false;
};

/// Solves grad F_mu(w; V) d = -F(w; V) through the reduced (K + |V|) system.
NewtonDirection newton_direction(const Problem& problem, const PrimalDualPoint& point,
                                 const ActiveSet& V, double mu, double pivot_tol = 1e-12);

/// d = -F(w; V), unstacked.
PrimalDualPoint fallback_direction(const Problem& problem, const PrimalDualPoint& point,
                                   const ActiveSet& V);

struct LineSearchResult {
  int t = 0;
  double alpha = 1.0;
  bool stalled = false;  // no t <= t_max worked; alpha = pi^t_max
};

/// Smallest t in {0, ..., t_max} with ||G(x + pi^t d_x)||_0^+ <= (gamma + 1) s,
/// counting entries with |G_mn| <= zero_tol as zero.
LineSearchResult line_search(const Problem& problem, const Vector& x, const Vector& d_x, Index s,
                             double gamma, double pi, int t_max, double zero_tol = 0.0);

/// Runs the method from w0 (zero when absent). Throws kNonFinite when an
/// iterate stops being finite; evaluator exceptions propagate.
SolveResult solve(const Problem& problem, const SolverConfig& config,
                  const std::optional<PrimalDualPoint>& w0 = std::nullopt);

struct RateSample {
  int iter = 0;  // iteration of the later residual
  double ratio = 0.0;
};

/// ||F_{l+1}|| / ||F_l||^2 over consecutive records with both residuals > 0.
std::vector<RateSample> rate_diagnostic(const std::vector<IterationRecord>& trace);

/// Header: iter,residual,objective,violations,step,mu,direction
void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace);

}  // namespace stepcon
