#include "stepcon/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stepcon {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, msg);
}

bool open_unit(double v) { return v > 0.0 && v < 1.0; }

std::int64_t checked_ceil(double v) {
  if (!std::isfinite(v) || v > 9.0e18) throw Error(ErrorCode::kInvalidArgument, "bound overflows");
  return static_cast<std::int64_t>(std::ceil(v));
}

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(trial),
                    static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

bool violated(const Vector& g) { return g.size() > 0 && g.maxCoeff() > 0.0; }

}  // namespace

std::int64_t dkw_sample_size(double epsilon, double beta) {
  require(epsilon > 0.0 && std::isfinite(epsilon), "epsilon must be positive");
  require(open_unit(beta), "beta must be in (0,1)");
  return checked_ceil(std::log(2.0 / beta) / (2.0 * epsilon * epsilon));
}

std::int64_t feasibility_sample_size(double alpha, std::int64_t s, double beta, bool exact) {
  require(open_unit(alpha), "alpha must be in (0,1)");
  require(open_unit(beta), "beta must be in (0,1)");
  require(s >= 0, "s must be nonnegative");
  const double as = alpha * static_cast<double>(s);
  const double c = 2.0 * as + std::log(8.0 / (beta * beta));
  if (!exact) return checked_ceil(c / (alpha * alpha));
  // c^2 - 4 a^2 s^2 = (c - 2as)(c + 2as); the factored form avoids cancellation.
  const double disc = (c - 2.0 * as) * (c + 2.0 * as);
  return checked_ceil((c + std::sqrt(disc)) / (2.0 * alpha * alpha));
}

double feasibility_confidence(double alpha, std::int64_t s, std::int64_t N) {
  require(open_unit(alpha), "alpha must be in (0,1)");
  require(s >= 0, "s must be nonnegative");
  require(N >= 1, "N must be positive");
  const double n = static_cast<double>(N);
  if (static_cast<double>(s) >= alpha * n) {
    throw Error(ErrorCode::kInvalidArgument, "requires s < alpha * N");
  }
  const double gap = alpha - static_cast<double>(s) / n;
  return 1.0 - 2.0 * std::sqrt(2.0) * std::exp(-2.0 * gap * gap * n);
}

SparsityBound s_lower_bound(double nu, double alpha_star, std::int64_t N) {
  require(open_unit(nu), "nu must be in (0,1)");
  require(open_unit(alpha_star), "alpha_star must be in (0,1)");
  require(N >= 1, "N must be positive");
  const double n = static_cast<double>(N);
  const double slack = (1.0 - nu) * alpha_star;
  return {nu * alpha_star * n, 1.0 - 2.0 * std::sqrt(2.0) * std::exp(-2.0 * slack * slack * n)};
}

ScenarioSampler norm_opt_sampler(Index K, Index M, double b) {
  require(K >= 1 && M >= 1, "K and M must be positive");
  return [K, M, b](const Vector& x, std::mt19937_64& rng) {
    if (x.size() != K) throw Error(ErrorCode::kShapeMismatch, "x has wrong length");
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector g(M);
    for (Index m = 0; m < M; ++m) {
      double acc = 0.0;
      for (Index k = 0; k < K; ++k) {
        const double xi = normal(rng);
        acc += xi * xi * x[k] * x[k];
      }
      g[m] = acc - b;
    }
    return g;
  };
}

MonteCarloResult monte_carlo_feasibility(const ScenarioSampler& sampler, const Vector& x,
                                         double alpha, std::int64_t s, std::int64_t N, int trials,
                                         std::uint64_t seed, std::int64_t holdout) {
  require(static_cast<bool>(sampler), "sampler is empty");
  require(alpha >= 0.0 && alpha < 1.0, "alpha must be in [0,1)");
  require(s >= 0, "s must be nonnegative");
  require(N >= 1, "N must be positive");
  require(trials >= 1, "trials must be positive");
  require(holdout >= 1, "holdout must be positive");

  MonteCarloResult res;
  res.trials = trials;
  int passed = 0;
  double sum_violation = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng = derived_rng(seed, 0, static_cast<std::uint64_t>(t));
    std::int64_t count = 0;
    for (std::int64_t n = 0; n < N && count <= s; ++n) count += violated(sampler(x, rng)) ? 1 : 0;
    if (count > s) continue;

    std::mt19937_64 hold = derived_rng(seed, 1, static_cast<std::uint64_t>(t));
    std::int64_t bad = 0;
    for (std::int64_t i = 0; i < holdout; ++i) bad += violated(sampler(x, hold)) ? 1 : 0;
    const double v = static_cast<double>(bad) / static_cast<double>(holdout);
    ++res.qualifying;
    sum_violation += v;
    res.max_violation = std::max(res.max_violation, v);
    if (v <= alpha) ++passed;
  }
  if (res.qualifying == 0) {
    throw Error(ErrorCode::kNoQualifyingTrials,
                "x was infeasible in all " + std::to_string(trials) + " trials");
  }
  res.rate = static_cast<double>(passed) / res.qualifying;
  res.mean_violation = sum_violation / res.qualifying;
  return res;
}

}  // namespace stepcon
