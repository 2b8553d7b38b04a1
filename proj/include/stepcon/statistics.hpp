#pragma once

// Sample-size and sparsity bounds for scenario-based chance constraints, and
// a Monte-Carlo harness for the feasibility guarantee.

#include "stepcon/types.hpp"

#include <cstdint>
#include <functional>
#include <random>

namespace stepcon {

/// ceil(ln(2/beta) / (2 eps^2)): samples needed for the empirical violation
/// probability to be eps-accurate with confidence 1 - beta.
std::int64_t dkw_sample_size(double epsilon, double beta);

/// Samples that make every SAA-feasible point (at most s violated scenarios)
/// chance-feasible at level alpha with confidence 1 - beta. `exact` selects
/// the root of the quadratic bound; otherwise the simpler sufficient bound
/// (2 alpha s + ln(8/beta^2)) / alpha^2 is used.
std::int64_t feasibility_sample_size(double alpha, std::int64_t s, double beta, bool exact);

/// 1 - 2 sqrt(2) exp(-2 (alpha - s/N)^2 N). May be negative (vacuous).
/// Requires s < alpha N.
double feasibility_confidence(double alpha, std::int64_t s, std::int64_t N);

struct SparsityBound {
  double bound = 0.0;       // nu * alpha_star * N
  double confidence = 0.0;  // 1 - 2 sqrt(2) exp(-2 (1 - nu)^2 alpha_star^2 N)
};

/// Lower bound on s needed for the SAA problem to admit the chance-feasible
/// points of risk alpha_star.
SparsityBound s_lower_bound(double nu, double alpha_star, std::int64_t N);

/// Constraint values g(x, xi) (length M) for one fresh draw of xi.
using ScenarioSampler = std::function<Vector(const Vector& x, std::mt19937_64& rng)>;

/// g_m(x, xi) = sum_k xi_mk^2 x_k^2 - b with xi_mk ~ N(0, 1).
ScenarioSampler norm_opt_sampler(Index K, Index M, double b);

struct MonteCarloResult {
  double rate = 0.0;  // fraction of qualifying trials with violation <= alpha
  int trials = 0;
  int qualifying = 0;       // trials where x was SAA-feasible
  double mean_violation = 0.0;  // over qualifying trials
  double max_violation = 0.0;
};

inline constexpr std::int64_t kDefaultHoldout = 100000;

/// For each trial draws N scenarios; when x violates at most s of them, the
/// violation probability of x is estimated from `holdout` fresh draws.
/// Trial t uses generators seeded from (seed, t), so results do not depend
/// on evaluation order. Throws kNoQualifyingTrials when x is never feasible.
MonteCarloResult monte_carlo_feasibility(const ScenarioSampler& sampler, const Vector& x,
                                         double alpha, std::int64_t s, std::int64_t N, int trials,
                                         std::uint64_t seed,
                                         std::int64_t holdout = kDefaultHoldout);

}  // namespace stepcon
