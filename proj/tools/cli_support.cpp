#include "cli_support.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stepcon_cli {

void check(stepcon_status status, int exit_code, const std::string& context) {
  if (status == STEPCON_OK) return;
  // Rejected input is a usage error wherever it is detected.
  const bool bad_input = status == STEPCON_ERR_INVALID_ARGUMENT || status == STEPCON_ERR_SHAPE_MISMATCH ||
                         status == STEPCON_ERR_PARSE;
  throw CliError(bad_input ? kExitConfig : exit_code, context + ": " + stepcon_last_error());
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string out(buf, ec == std::errc{} ? ptr : buf);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

void add_instance_options(CLI::App& app, InstanceOptions& opts) {
  app.add_option("--preset", opts.preset, "Instance family: norm-opt or sec4-3")
      ->check(CLI::IsMember({"norm-opt", "sec4-3"}))
      ->capture_default_str();
  app.add_option("--K", opts.K, "Decision variables")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--M", opts.M, "Constraints per scenario")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--N", opts.N, "Scenarios")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--b", opts.b, "Constraint level")->capture_default_str();
  app.add_option("--lambda1", opts.lambda1, "Penalty on negative x")->capture_default_str();
  app.add_option("--lambda2", opts.lambda2, "Weight of ||x||^2")->capture_default_str();
  app.add_option("--seed", opts.seed, "Random seed for the scenarios")->capture_default_str();
  app.add_option("--samples", opts.samples, "Read scenarios from a sample file instead of drawing them");
  app.add_option("--alpha", opts.alpha, "Risk level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app.add_option("--s", opts.s, "Allowed violated scenarios (default ceil(alpha N))");
}

ProblemPtr build_problem(const InstanceOptions& opts) {
  stepcon_problem* raw = nullptr;
  if (opts.preset == "sec4-3") {
    check(stepcon_problem_counterexample(&raw), kExitConfig, "preset");
  } else if (!opts.samples.empty()) {
    check(stepcon_problem_load_samples(opts.samples.c_str(), opts.b, opts.lambda1, opts.lambda2, &raw),
          kExitConfig, "samples");
  } else {
    stepcon_norm_opt_params p;
    stepcon_norm_opt_params_default(&p);
    p.K = opts.K;
    p.M = opts.M;
    p.N = opts.N;
    p.b = opts.b;
    p.lambda1 = opts.lambda1;
    p.lambda2 = opts.lambda2;
    p.seed = opts.seed;
    check(stepcon_problem_norm_opt(&p, &raw), kExitConfig, "instance");
  }
  return ProblemPtr(raw);
}

Dims dims_of(const stepcon_problem* problem) {
  Dims d;
  check(stepcon_problem_dims(problem, &d.K, &d.M, &d.N), kExitAbort, "dims");
  return d;
}

int64_t resolve_s(const InstanceOptions& opts, int64_t N) {
  if (opts.s >= 0) return opts.s;
  if (opts.preset == "sec4-3") return 1;
  int64_t s = 0;
  check(stepcon_sparsity_for_alpha(opts.alpha, N, &s), kExitConfig, "alpha");
  return std::max<int64_t>(s, 1);
}

void add_solver_options(CLI::App& app, SolverOptions& opts) {
  app.add_option("--max-it", opts.max_it, "Iteration limit")->capture_default_str();
  app.add_option("--tol-scale", opts.tol_scale, "Tolerance is tol-scale * K * M * N")->capture_default_str();
  app.add_option("--rho", opts.rho, "Smoothing is capped at rho times the residual")->capture_default_str();
  app.add_option("--mu-bar", opts.mu_bar, "Initial smoothing cap")->capture_default_str();
  app.add_option("--nu", opts.nu, "Smoothing decay")->capture_default_str();
  app.add_option("--pi", opts.pi, "Backtracking factor")->capture_default_str();
  app.add_option("--gamma", opts.gamma, "Line search allows (gamma + 1) s violated scenarios");
  app.add_option("--tau", opts.tau, "Stationarity parameter")->capture_default_str();
  app.add_option("--t-max", opts.t_max, "Backtracking limit")->capture_default_str();
  app.add_option("--pivot-tol", opts.pivot_tol, "Relative pivot threshold")->capture_default_str();
  app.add_option("--zero-band", opts.zero_band, "Constraint values this close to zero count as zero")
      ->capture_default_str();
}

stepcon_solver_config make_config(const SolverOptions& opts, const InstanceOptions& inst,
                                  int64_t s) {
  stepcon_solver_config c;
  stepcon_solver_config_default(&c);
  c.max_it = opts.max_it;
  c.tol_scale = opts.tol_scale;
  c.rho = opts.rho;
  c.mu_bar = opts.mu_bar;
  c.nu = opts.nu;
  c.pi = opts.pi;
  c.tau = opts.tau;
  c.s = s;
  c.t_max = opts.t_max;
  c.pivot_tol = opts.pivot_tol;
  c.zero_band = opts.zero_band;
  if (opts.gamma > 0.0) {
    c.gamma = opts.gamma;
  } else {
    check(stepcon_gamma_for_alpha(inst.alpha, s, &c.gamma), kExitConfig, "gamma");
  }
  return c;
}

namespace {

std::vector<double> parse_row(const std::string& line, const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    if (b == std::string::npos) throw CliError(kExitConfig, where + ": empty value");
    const std::string tok = cell.substr(b, e - b + 1);
    double v = 0.0;
    const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
      throw CliError(kExitConfig, where + ": cannot parse '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

PointData read_point(const std::string& path, const Dims& dims) {
  std::ifstream in(path);
  if (!in) throw CliError(kExitConfig, "cannot open point file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    rows.push_back(parse_row(line, path + ":" + std::to_string(lineno)));
  }
  if (rows.empty()) throw CliError(kExitConfig, path + ": no point data");
  PointData pt;
  pt.x = rows.front();
  if (static_cast<int64_t>(pt.x.size()) != dims.K) {
    throw CliError(kExitConfig, path + ": x has " + std::to_string(pt.x.size()) + " values, expected " +
                                    std::to_string(dims.K));
  }
  if (rows.size() == 1) return pt;
  if (static_cast<int64_t>(rows.size()) - 1 != dims.M) {
    throw CliError(kExitConfig, path + ": W must have " + std::to_string(dims.M) + " rows");
  }
  std::vector<double> W(static_cast<std::size_t>(dims.M * dims.N));
  for (int64_t m = 0; m < dims.M; ++m) {
    const auto& r = rows[static_cast<std::size_t>(m + 1)];
    if (static_cast<int64_t>(r.size()) != dims.N) {
      throw CliError(kExitConfig, path + ": W row " + std::to_string(m + 1) + " must have " +
                                      std::to_string(dims.N) + " values");
    }
    for (int64_t n = 0; n < dims.N; ++n) W[static_cast<std::size_t>(m + n * dims.M)] = r[static_cast<std::size_t>(n)];
  }
  pt.W = std::move(W);
  return pt;
}

void write_point(const std::string& path, const std::vector<double>& x,
                 const std::vector<double>& W, const Dims& dims) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError(kExitConfig, "cannot write " + path);
  out << "# x\n";
  for (std::size_t k = 0; k < x.size(); ++k) out << (k ? "," : "") << format_number(x[k]);
  out << "\n# W\n";
  for (int64_t m = 0; m < dims.M; ++m) {
    for (int64_t n = 0; n < dims.N; ++n) {
      out << (n ? "," : "") << format_number(W[static_cast<std::size_t>(m + n * dims.M)]);
    }
    out << '\n';
  }
  if (!out) throw CliError(kExitConfig, "error while writing " + path);
}

std::vector<double> parse_number_list(const std::string& text) {
  if (text.empty()) throw CliError(kExitConfig, "empty value list");
  return parse_row(text, "value list");
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace stepcon_cli
