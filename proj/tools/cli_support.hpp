#pragma once

// Helpers shared by the stepcon command-line subcommands. Everything here
// talks to the library through the C interface only.

#include "stepcon/stepcon.h"

#include <CLI11.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stepcon_cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitAbort = 2;

/// Error carrying the process exit code.
class CliError : public std::runtime_error {
 public:
  CliError(int exit_code, const std::string& what) : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

/// Throws CliError(exit_code) with the library's last error message.
void check(stepcon_status status, int exit_code, const std::string& context);

struct ProblemDeleter {
  void operator()(stepcon_problem* p) const { stepcon_problem_free(p); }
};
struct ResultDeleter {
  void operator()(stepcon_result* r) const { stepcon_result_free(r); }
};
using ProblemPtr = std::unique_ptr<stepcon_problem, ProblemDeleter>;
using ResultPtr = std::unique_ptr<stepcon_result, ResultDeleter>;

/// Shortest round-trip decimal; integral values keep a trailing ".0".
std::string format_number(double v);

struct Dims {
  int64_t K = 0;
  int64_t M = 0;
  int64_t N = 0;
};

struct InstanceOptions {
  std::string preset = "norm-opt";
  int64_t K = 10;
  int64_t M = 1;
  int64_t N = 100;
  double b = 100.0;
  double lambda1 = 0.5;
  double lambda2 = 0.5;
  uint64_t seed = 0;
  std::string samples;
  double alpha = 0.05;
  int64_t s = -1;  // negative: derive
};

void add_instance_options(CLI::App& app, InstanceOptions& opts);
ProblemPtr build_problem(const InstanceOptions& opts);
Dims dims_of(const stepcon_problem* problem);
/// --s when given, 1 for the two-column preset, ceil(alpha N) otherwise.
int64_t resolve_s(const InstanceOptions& opts, int64_t N);

struct SolverOptions {
  int32_t max_it = 2000;
  double tol_scale = 1e-9;
  double rho = 1e-2;
  double mu_bar = 1e-2;
  double nu = 0.999;
  double pi = 0.85;
  double gamma = 0.0;  // zero: derive from alpha and s
  double tau = 0.75;
  int32_t t_max = 100;
  double pivot_tol = 1e-12;
  double zero_band = 1e-3;
};

void add_solver_options(CLI::App& app, SolverOptions& opts);
/// gamma defaults to a / s with a picked from alpha.
stepcon_solver_config make_config(const SolverOptions& opts, const InstanceOptions& inst,
                                  int64_t s);

struct PointData {
  std::vector<double> x;
  std::optional<std::vector<double>> W;  // column-major M x N
};

/// First data line holds x; an optional block of M further lines holds W.
/// Blank lines and '#' comments are skipped.
PointData read_point(const std::string& path, const Dims& dims);
void write_point(const std::string& path, const std::vector<double>& x,
                 const std::vector<double>& W, const Dims& dims);

std::vector<double> parse_number_list(const std::string& text);

double median(std::vector<double> values);

}  // namespace stepcon_cli
