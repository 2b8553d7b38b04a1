#pragma once

// Reference solutions: exhaustive grid search on tiny instances and a big-M
// mixed-integer model for external solvers.

#include "stepcon/problem.hpp"
#include "stepcon/types.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace stepcon {

inline constexpr double kMaxGridPoints = 1e7;

struct GridSpec {
  Vector lower;
  Vector upper;
  Index points_per_dim = 2;
};

struct GridResult {
  Vector best_x;
  double best_f = 0.0;
  std::int64_t evaluated = 0;
  std::int64_t feasible = 0;
};

/// Minimizes f over the feasible points of a uniform grid (endpoints
/// included). Throws kInvalidArgument for a bad box or a grid above
/// kMaxGridPoints, and kEmptyFeasibleGrid when no grid point is feasible.
GridResult grid_search(const Problem& problem, Index s, const GridSpec& grid);

/// One big-M row: sum_k coeffs[k] x_k^2 + big_M y <= big_M + b.
struct BipRow {
  Index row = 0;  // m
  Index col = 0;  // n, also the index of the binary
  std::vector<double> coeffs;
  double b = 0.0;
  double big_M = 0.0;
};

/// min -sum_k x_k  s.t.  G_mn(x) <= (1 - y_n) big_M_n,  sum_n y_n >= N - s,
/// x >= 0, y binary.
struct BipModel {
  Index num_vars = 0;
  Index num_scenarios = 0;
  Index s = 0;
  std::vector<double> big_M;  // length N
  std::vector<BipRow> rows;   // M * N rows, column-major
  std::string comment;

  Index constraint_count() const { return static_cast<Index>(rows.size()) + 1; }
};

BipModel build_bip(const NormOptProblem& problem, Index s, double big_M = 10000.0);

/// CPLEX LP text. Deterministic for a fixed model.
void write_lp(const BipModel& model, std::ostream& out);

/// Throws kUnsupported unless `problem` is a NormOptProblem, kIo when the
/// file cannot be written.
void export_bip(const Problem& problem, Index s, double big_M, const std::filesystem::path& path);

}  // namespace stepcon
