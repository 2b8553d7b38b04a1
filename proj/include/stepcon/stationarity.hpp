#pragma once

// Stationarity machinery for min f(x) s.t. ||G(x)||_0^+ <= s.
//
// Stacked vectors use the ordering (x; W_V; W_Vbar): the K decision
// variables, then the multipliers on V in column-major order, then the
// remaining multipliers in column-major order. residual_F, newton_matrix and
// the solver directions all share this ordering.

#include "stepcon/problem.hpp"
#include "stepcon/types.hpp"

#include <optional>
#include <span>
#include <string>

namespace stepcon {

struct PrimalDualPoint {
  Vector x;  // length K
  Matrix W;  // M x N multipliers

  static PrimalDualPoint zeros(const Problem& problem);
};

enum class StationarityKind { kKkt, kTauStationary, kBkkt };

struct StationarityReport {
  StationarityKind kind = StationarityKind::kKkt;
  bool satisfied = false;
  /// Residual compared against `tolerance`; +inf when a combinatorial
  /// condition fails or the point is infeasible.
  double residual = 0.0;
  /// Norm of the stationarity equations alone, whatever the combinatorial
  /// conditions say.
  double equation_residual = 0.0;
  double tolerance = 0.0;
  std::optional<Matrix> witness_W;
  std::optional<double> tau_star;
  ActiveSet active_set;
  std::string detail;
};

/// U_T = {(m, n) : Lambda_mn >= 0, n in T} with Lambda = G(x) + tau W.
ActiveSet active_set(const Problem& problem, const PrimalDualPoint& point, double tau,
                     const ColumnSet& T);
ActiveSet active_set_of(const Matrix& Lambda, const ColumnSet& T);

Vector stack(const PrimalDualPoint& point, const ActiveSet& V);
PrimalDualPoint unstack(const Vector& w, const ActiveSet& V, Index K, Index M, Index N);

/// F(w; V) = [grad f(x) + sum_V W_mn grad G_mn(x); vec(Z_V); vec(W_Vbar)].
Vector residual_F(const Problem& problem, const PrimalDualPoint& point, const ActiveSet& V);

/// Theta(w; V) = hess f(x) + sum_V W_mn hess G_mn(x).
Matrix theta(const Problem& problem, const PrimalDualPoint& point, const ActiveSet& V);

/// Smoothed Jacobian of F in the stacked ordering:
///   [ Theta        grad_V G   0 ]
///   [ grad_V G^T   -mu I      0 ]
///   [ 0            0          I ]
/// At mu = 0 this is the Jacobian of residual_F for fixed V.
Matrix newton_matrix(const Problem& problem, const PrimalDualPoint& point, const ActiveSet& V,
                     double mu);

/// Verifies, with G(x) and W snapped to zero within tol:
///   Gamma_0(Z) in T(Lambda; s),  U_{Gamma_0} = V_*,  ||F(w; V_*)|| <= tol.
StationarityReport check_tau_stationary(const Problem& problem, const PrimalDualPoint& point,
                                        double tau, Index s, double tol);

/// KKT test via nonnegative least squares over the normal cone of S.
StationarityReport check_kkt(const Problem& problem, const Vector& x, Index s, double tol);

/// BKKT test for the binary reformulation at (x, y). Throws kInvalidArgument
/// for a non-binary y or sum(y) < N - s, and kInfeasible when x is not in
/// D^1(y).
StationarityReport check_bkkt(const Problem& problem, const Vector& x, std::span<const int> y,
                              Index s, double tol);

/// Largest tau for which a KKT point is tau-stationary. +inf when
/// ||G(x)||_0^+ < s or when the multipliers vanish. Throws kInfeasible when
/// ||G(x)||_0^+ > s and kRankDeficient when grad_{V_*} G(x) is rank deficient.
double tau_star(const Problem& problem, const Vector& x, Index s, double zero_tol = 0.0);

/// Diagnostic: Theta(w; V) positive definite (Cholesky succeeds).
bool theta_positive_definite(const Problem& problem, const PrimalDualPoint& point,
                             const ActiveSet& V);

}  // namespace stepcon
