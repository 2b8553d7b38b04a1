// stepcon command-line tool: solve, check, bounds, bench, export-bip.

#include "cli_support.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

using namespace stepcon_cli;

namespace {

const char* status_name(stepcon_solve_status s) {
  switch (s) {
    case STEPCON_CONVERGED:
      return "Converged";
    case STEPCON_MAX_ITERATIONS:
      return "MaxIterations";
    case STEPCON_LINE_SEARCH_STALLED:
      break;
  }
  return "LineSearchStalled";
}

std::string verdict(const stepcon_report& rep) {
  std::string out = rep.satisfied ? "satisfied" : "violated";
  out += " (residual " + format_number(rep.residual);
  if (rep.detail[0] != '\0') out += std::string("; ") + rep.detail;
  return out + ")";
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  InstanceOptions inst;
  SolverOptions solver;
  std::string trace_path;
  std::string point_path;
  std::string samples_out;
};

int run_solve(const SolveArgs& args) {
  ProblemPtr problem = build_problem(args.inst);
  const Dims d = dims_of(problem.get());
  const int64_t s = resolve_s(args.inst, d.N);
  const stepcon_solver_config cfg = make_config(args.solver, args.inst, s);

  if (!args.samples_out.empty()) {
    check(stepcon_problem_write_samples(problem.get(), args.samples_out.c_str()), kExitConfig,
          "samples-out");
  }

  const auto t0 = std::chrono::steady_clock::now();
  stepcon_result* raw = nullptr;
  check(stepcon_solve(problem.get(), &cfg, nullptr, nullptr, &raw), kExitAbort, "solve");
  ResultPtr result(raw);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  stepcon_solve_summary sum;
  check(stepcon_result_summary(result.get(), &sum), kExitAbort, "summary");
  if (!args.trace_path.empty()) {
    check(stepcon_result_write_trace_csv(result.get(), args.trace_path.c_str()), kExitConfig, "trace");
  }
  if (!args.point_path.empty()) {
    std::vector<double> x(static_cast<std::size_t>(d.K));
    std::vector<double> W(static_cast<std::size_t>(d.M * d.N));
    check(stepcon_result_x(result.get(), x.data()), kExitAbort, "result");
    check(stepcon_result_W(result.get(), W.data()), kExitAbort, "result");
    write_point(args.point_path, x, W, d);
  }

  std::cout << "status=" << status_name(sum.status) << " iterations=" << sum.iterations
            << " objective=" << format_number(sum.objective) << " violations=" << sum.violations
            << " s=" << s << " residual=" << format_number(sum.residual)
            << " tol=" << format_number(sum.tolerance)
            << " stationary=" << (sum.stationary ? "yes" : "no") << " time_s=" << seconds << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- check

struct CheckArgs {
  InstanceOptions inst;
  std::string point_path;
  double tau = 0.75;
  double tol = 1e-9;
  std::string y;
};

int run_check(const CheckArgs& args) {
  ProblemPtr problem = build_problem(args.inst);
  const Dims d = dims_of(problem.get());
  const int64_t s = resolve_s(args.inst, d.N);
  const PointData pt = read_point(args.point_path, d);

  stepcon_report kkt;
  std::vector<double> witness(static_cast<std::size_t>(d.M * d.N), 0.0);
  check(stepcon_check_kkt(problem.get(), pt.x.data(), s, args.tol, &kkt, witness.data()), kExitAbort,
        "KKT check");
  std::cout << "KKT: " << verdict(kkt) << '\n';
  if (kkt.has_tau_star) std::cout << "tau*: " << format_number(kkt.tau_star) << '\n';

  const std::vector<double>& W = pt.W ? *pt.W : witness;
  stepcon_report tau_rep;
  check(stepcon_check_tau_stationary(problem.get(), pt.x.data(), W.data(), args.tau, s, args.tol,
                                     &tau_rep),
        kExitAbort, "tau-stationarity check");
  std::cout << "tau-stationary (tau=" << format_number(args.tau) << ", W from "
            << (pt.W ? "point file" : "KKT witness") << "): " << verdict(tau_rep) << '\n';

  std::vector<int32_t> y(static_cast<std::size_t>(d.N), 0);
  if (!args.y.empty()) {
    const std::vector<double> yv = parse_number_list(args.y);
    if (static_cast<int64_t>(yv.size()) != d.N) throw CliError(kExitConfig, "--y needs N values");
    for (std::size_t i = 0; i < yv.size(); ++i) y[i] = static_cast<int32_t>(yv[i]);
  } else {
    // Select every scenario that x satisfies.
    std::vector<double> G(static_cast<std::size_t>(d.M * d.N));
    check(stepcon_problem_constraints(problem.get(), pt.x.data(), G.data()), kExitAbort, "G(x)");
    for (int64_t n = 0; n < d.N; ++n) {
      double mx = -INFINITY;
      for (int64_t m = 0; m < d.M; ++m) mx = std::max(mx, G[static_cast<std::size_t>(m + n * d.M)]);
      y[static_cast<std::size_t>(n)] = mx <= args.tol ? 1 : 0;
    }
  }
  const int64_t chosen = std::accumulate(y.begin(), y.end(), int64_t{0});
  if (args.y.empty() && chosen < d.N - s) {
    std::cout << "BKKT: not applicable (x violates more than s scenarios)\n";
    return kExitOk;
  }
  stepcon_report bkkt;
  const stepcon_status st =
      stepcon_check_bkkt(problem.get(), pt.x.data(), y.data(), s, args.tol, &bkkt, nullptr);
  if (st == STEPCON_ERR_INFEASIBLE) {
    std::cout << "BKKT: not applicable (" << stepcon_last_error() << ")\n";
  } else {
    check(st, kExitConfig, "BKKT check");
    std::cout << "BKKT: " << verdict(bkkt) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- bounds

struct BoundsArgs {
  double alpha = 0.05;
  int64_t s = 0;
  double beta = 0.05;
  double epsilon = 0.05;
  double nu = 0.5;
  double alpha_star = 0.05;
  int64_t N = 100;
  CLI::Option* o_alpha = nullptr;
  CLI::Option* o_s = nullptr;
  CLI::Option* o_beta = nullptr;
  CLI::Option* o_epsilon = nullptr;
  CLI::Option* o_nu = nullptr;
  CLI::Option* o_alpha_star = nullptr;
  CLI::Option* o_N = nullptr;
};

std::string confidence_text(double c) {
  return format_number(c) + (c < 0.0 ? " vacuous (<0)" : "");
}

int run_bounds(const BoundsArgs& a, const CLI::App& sub) {
  const bool has_alpha = a.o_alpha->count() > 0;
  const bool has_s = a.o_s->count() > 0;
  const bool has_beta = a.o_beta->count() > 0;
  const bool has_eps = a.o_epsilon->count() > 0;
  const bool has_nu = a.o_nu->count() > 0;
  const bool has_as = a.o_alpha_star->count() > 0;
  const bool has_N = a.o_N->count() > 0;
  bool printed = false;

  if (has_eps && has_beta) {
    int64_t n = 0;
    check(stepcon_dkw_sample_size(a.epsilon, a.beta, &n), kExitConfig, "dkw");
    std::cout << "dkw_sample_size(epsilon=" << format_number(a.epsilon)
              << ", beta=" << format_number(a.beta) << "): " << n << '\n';
    printed = true;
  }
  if (has_alpha && has_beta) {
    int64_t simple = 0;
    int64_t exact = 0;
    check(stepcon_feasibility_sample_size(a.alpha, a.s, a.beta, 0, &simple), kExitConfig, "feasibility");
    check(stepcon_feasibility_sample_size(a.alpha, a.s, a.beta, 1, &exact), kExitConfig, "feasibility");
    std::cout << "feasibility_sample_size(alpha=" << format_number(a.alpha) << ", s=" << a.s
              << ", beta=" << format_number(a.beta) << "): simplified " << simple << ", exact "
              << exact << '\n';
    printed = true;
  }
  if (has_alpha && has_N) {
    double c = 0.0;
    const stepcon_status st = stepcon_feasibility_confidence(a.alpha, a.s, a.N, &c);
    std::cout << "feasibility_confidence(alpha=" << format_number(a.alpha) << ", s=" << a.s
              << ", N=" << a.N << "): ";
    if (st == STEPCON_OK) {
      std::cout << confidence_text(c) << '\n';
    } else {
      std::cout << "undefined (" << stepcon_last_error() << ")\n";
    }
    printed = true;
  }
  if (has_nu && has_as && has_N) {
    double bound = 0.0;
    double c = 0.0;
    check(stepcon_s_lower_bound(a.nu, a.alpha_star, a.N, &bound, &c), kExitConfig, "s bound");
    std::cout << "s_lower_bound(nu=" << format_number(a.nu)
              << ", alpha_star=" << format_number(a.alpha_star) << ", N=" << a.N
              << "): s > " << format_number(bound) << " with confidence " << confidence_text(c)
              << '\n';
    printed = true;
  }
  if (!printed) {
    if (has_alpha || has_s || has_beta || has_eps || has_nu || has_as || has_N) {
      throw CliError(kExitConfig, "not enough parameters for any bound; see --help");
    }
    std::cout << sub.help();
  }
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  InstanceOptions inst;
  SolverOptions solver;
  std::string sweep;
  std::string values;
  int trials = 5;
  std::string out_path;
};

int run_bench(const BenchArgs& args) {
  const std::vector<double> values = parse_number_list(args.values);
  const bool integral = args.sweep == "K" || args.sweep == "M" || args.sweep == "N";

  std::ofstream file;
  if (!args.out_path.empty()) {
    file.open(args.out_path, std::ios::binary);
    if (!file) throw CliError(kExitConfig, "cannot write " + args.out_path);
  }
  std::ostream& out = args.out_path.empty() ? std::cout : file;
  out << "sweep_var,value,median_objective,median_time_s,median_iters,converged_frac\n";

  for (double v : values) {
    InstanceOptions inst = args.inst;
    SolverOptions solver = args.solver;
    if (integral && (v < 1 || v != std::floor(v))) {
      throw CliError(kExitConfig, args.sweep + " values must be positive integers");
    }
    if (args.sweep == "K") inst.K = static_cast<int64_t>(v);
    if (args.sweep == "M") inst.M = static_cast<int64_t>(v);
    if (args.sweep == "N") inst.N = static_cast<int64_t>(v);
    if (args.sweep == "alpha") inst.alpha = v;
    if (args.sweep == "tau") solver.tau = v;

    std::vector<double> objectives;
    std::vector<double> times;
    std::vector<double> iters;
    int converged = 0;
    for (int t = 0; t < args.trials; ++t) {
      inst.seed = args.inst.seed + static_cast<uint64_t>(t);
      try {
        ProblemPtr problem = build_problem(inst);
        const Dims d = dims_of(problem.get());
        const stepcon_solver_config cfg = make_config(solver, inst, resolve_s(inst, d.N));
        const auto t0 = std::chrono::steady_clock::now();
        stepcon_result* raw = nullptr;
        check(stepcon_solve(problem.get(), &cfg, nullptr, nullptr, &raw), kExitAbort, "solve");
        ResultPtr result(raw);
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        stepcon_solve_summary sum;
        check(stepcon_result_summary(result.get(), &sum), kExitAbort, "summary");
        objectives.push_back(sum.objective);
        iters.push_back(sum.iterations);
        if (sum.status == STEPCON_CONVERGED) ++converged;
      } catch (const CliError& e) {
        if (e.exit_code() == kExitConfig) throw;
        std::cerr << "trial " << t << " at " << args.sweep << "=" << format_number(v)
                  << " aborted: " << e.what() << '\n';
      }
    }
    out << args.sweep << ','
        << (integral ? std::to_string(static_cast<int64_t>(v)) : format_number(v)) << ','
        << format_number(median(objectives)) << ',' << format_number(median(times)) << ','
        << format_number(median(iters)) << ','
        << format_number(static_cast<double>(converged) / args.trials) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- export-bip

struct ExportArgs {
  InstanceOptions inst;
  double big_M = 10000.0;
  std::string out_path;
};

int run_export(const ExportArgs& args) {
  ProblemPtr problem = build_problem(args.inst);
  const Dims d = dims_of(problem.get());
  const int64_t s = resolve_s(args.inst, d.N);
  check(stepcon_export_bip(problem.get(), s, args.big_M, args.out_path.c_str()), kExitConfig,
        "export-bip");
  std::cout << "wrote " << args.out_path << " (" << d.M * d.N + 1 << " constraints, s=" << s << ")\n";
  return kExitOk;
}

// Options from a key=value file for a subcommand. CLI11 only reads config
// files for the top-level app, so the file is fed through its parser here.
void apply_config_file(CLI::App& sub) {
  CLI::Option* cfg = sub.get_option_no_throw("--config");
  if (cfg == nullptr || cfg->count() == 0) return;
  const std::string path = cfg->as<std::string>();
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_config(in)) {
    if (!item.parents.empty()) throw CLI::ConfigError::Extras(item.fullname());
    CLI::Option* opt = sub.get_option_no_throw("--" + item.name);
    if (opt == nullptr || opt == cfg) throw CLI::ConfigError::Extras(item.name);
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Step-constrained optimization: solver, checks, bounds and benchmarks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(stepcon_version()));
  std::function<int()> action;

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run the smoothing Newton solver on one instance");
  solve_cmd->add_option("--config", "Read options from a key=value file (command-line flags win)");
  add_instance_options(*solve_cmd, solve.inst);
  add_solver_options(*solve_cmd, solve.solver);
  solve_cmd->add_option("--trace", solve.trace_path, "Write the iteration trace as CSV");
  solve_cmd->add_option("--point-out", solve.point_path, "Write the final x and W");
  solve_cmd->add_option("--samples-out", solve.samples_out, "Write the scenario samples");
  solve_cmd->callback([&] { action = [&] { return run_solve(solve); }; });

  CheckArgs chk;
  auto* check_cmd = app.add_subcommand("check", "Test KKT, tau-stationarity and BKKT at a point");
  check_cmd->add_option("--config", "Read options from a key=value file (command-line flags win)");
  add_instance_options(*check_cmd, chk.inst);
  check_cmd->add_option("--point", chk.point_path, "Point file: x on the first line, optional W rows")
      ->required();
  check_cmd->add_option("--tau", chk.tau, "Stationarity parameter")->capture_default_str();
  check_cmd->add_option("--tol", chk.tol, "Zero tolerance")->capture_default_str();
  check_cmd->add_option("--y", chk.y, "Scenario selection for BKKT, e.g. 1,0,1 (default: satisfied scenarios)");
  check_cmd->callback([&] { action = [&] { return run_check(chk); }; });

  BoundsArgs bnd;
  auto* bounds_cmd = app.add_subcommand("bounds", "Sample-size and sparsity bounds");
  bnd.o_alpha = bounds_cmd->add_option("--alpha", bnd.alpha, "Risk level");
  bnd.o_s = bounds_cmd->add_option("--s", bnd.s, "Allowed violated scenarios");
  bnd.o_beta = bounds_cmd->add_option("--beta", bnd.beta, "One minus confidence");
  bnd.o_epsilon = bounds_cmd->add_option("--epsilon", bnd.epsilon, "Accuracy of the empirical CDF");
  bnd.o_nu = bounds_cmd->add_option("--nu", bnd.nu, "Fraction in (0,1)");
  bnd.o_alpha_star = bounds_cmd->add_option("--alpha-star", bnd.alpha_star, "Risk level of the reference point");
  bnd.o_N = bounds_cmd->add_option("--N", bnd.N, "Number of scenarios");
  bounds_cmd->callback([&] { action = [&] { return run_bounds(bnd, *bounds_cmd); }; });

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Sweep one parameter and report median results");
  bench_cmd->add_option("--config", "Read options from a key=value file (command-line flags win)");
  add_instance_options(*bench_cmd, bench.inst);
  add_solver_options(*bench_cmd, bench.solver);
  bench_cmd->add_option("--sweep", bench.sweep, "Parameter to vary")
      ->check(CLI::IsMember({"K", "M", "N", "alpha", "tau"}))
      ->required();
  bench_cmd->add_option("--values", bench.values, "Comma-separated values")->required();
  bench_cmd->add_option("--trials", bench.trials, "Seeded trials per value")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--out", bench.out_path, "CSV output (default stdout)");
  bench_cmd->callback([&] { action = [&] { return run_bench(bench); }; });

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export-bip", "Write the big-M mixed-integer model (LP format)");
  export_cmd->add_option("--config", "Read options from a key=value file (command-line flags win)");
  add_instance_options(*export_cmd, exp.inst);
  export_cmd->add_option("--big-M", exp.big_M, "Big-M constant")->capture_default_str();
  export_cmd->add_option("--out", exp.out_path, "Output .lp file")->required();
  export_cmd->callback([&] { action = [&] { return run_export(exp); }; });

  try {
    app.parse(argc, argv);
    for (CLI::App* sub : app.get_subcommands()) apply_config_file(*sub);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    return action ? action() : kExitConfig;
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitAbort;
  }
}
