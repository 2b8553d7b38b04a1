#include "stepcon/baselines.hpp"

#include "number_format.hpp"
#include "stepcon/step_geometry.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace stepcon {

GridResult grid_search(const Problem& problem, Index s, const GridSpec& grid) {
  const Index K = problem.num_vars();
  if (grid.lower.size() != K || grid.upper.size() != K) {
    throw Error(ErrorCode::kShapeMismatch, "grid bounds must have length K");
  }
  if (!((grid.upper - grid.lower).array() > 0.0).all()) {
    throw Error(ErrorCode::kInvalidArgument, "grid requires lower < upper in every coordinate");
  }
  if (grid.points_per_dim < 2) throw Error(ErrorCode::kInvalidArgument, "points_per_dim must be >= 2");
  if (s < 0) throw Error(ErrorCode::kInvalidArgument, "s must be nonnegative");
  const double total = std::pow(static_cast<double>(grid.points_per_dim), static_cast<double>(K));
  if (total > kMaxGridPoints) throw Error(ErrorCode::kInvalidArgument, "grid exceeds 1e7 points");

  const Index p = grid.points_per_dim;
  std::vector<Index> idx(static_cast<std::size_t>(K), 0);
  Vector x(K);
  GridResult res;
  res.best_f = std::numeric_limits<double>::infinity();
  while (true) {
    for (Index k = 0; k < K; ++k) {
      const auto i = idx[static_cast<std::size_t>(k)];
      // Exact endpoints at i = 0 and i = p - 1.
      x[k] = i == p - 1 ? grid.upper[k]
                        : grid.lower[k] + (grid.upper[k] - grid.lower[k]) * static_cast<double>(i) /
                                              static_cast<double>(p - 1);
    }
    ++res.evaluated;
    if (step_norm(problem.constraints(x)) <= s) {
      ++res.feasible;
      const double f = problem.objective(x);
      if (f < res.best_f) {
        res.best_f = f;
        res.best_x = x;
      }
    }
    Index k = 0;
    while (k < K && ++idx[static_cast<std::size_t>(k)] == p) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == K) break;
  }
  if (res.feasible == 0) throw Error(ErrorCode::kEmptyFeasibleGrid, "no feasible grid point");
  return res;
}

BipModel build_bip(const NormOptProblem& problem, Index s, double big_M) {
  if (!(big_M > 0.0) || !std::isfinite(big_M)) {
    throw Error(ErrorCode::kInvalidArgument, "big_M must be positive");
  }
  if (s < 0 || s > problem.cols()) throw Error(ErrorCode::kInvalidArgument, "s must be in [0, N]");
  BipModel model;
  model.num_vars = problem.num_vars();
  model.num_scenarios = problem.cols();
  model.s = s;
  model.big_M.assign(static_cast<std::size_t>(problem.cols()), big_M);
  const Matrix& sq = problem.squared_samples();
  for (Index n = 0; n < problem.cols(); ++n) {
    for (Index m = 0; m < problem.rows(); ++m) {
      BipRow row;
      row.row = m;
      row.col = n;
      const auto r = sq.row(m + n * problem.rows());
      row.coeffs.reserve(static_cast<std::size_t>(r.size()));
      for (Index k = 0; k < r.size(); ++k) row.coeffs.push_back(r[k]);
      row.b = problem.b();
      row.big_M = big_M;
      model.rows.push_back(std::move(row));
    }
  }
  model.comment = "K=" + std::to_string(problem.num_vars()) + " M=" + std::to_string(problem.rows()) +
                  " N=" + std::to_string(problem.cols()) + " s=" + std::to_string(s) +
                  " b=" + detail::format_double(problem.b()) +
                  " seed=" + std::to_string(problem.seed()) +
                  " big_M=" + detail::format_double(big_M);
  return model;
}

namespace {

// Keeps LP lines well under the 510-character limit of common readers.
class TermWriter {
 public:
  explicit TermWriter(std::ostream& out) : out_(out) {}
  void term(const std::string& t) {
    if (count_ > 0 && count_ % 6 == 0) out_ << "\n   ";
    out_ << ' ' << t;
    ++count_;
  }

 private:
  std::ostream& out_;
  int count_ = 0;
};

std::string signed_term(double coef, const std::string& var, bool first) {
  std::string sign = coef < 0.0 ? "- " : (first ? "" : "+ ");
  return sign + detail::format_double(std::abs(coef)) + ' ' + var;
}

}  // namespace

void write_lp(const BipModel& model, std::ostream& out) {
  const auto x = [](Index k) { return "x" + std::to_string(k + 1); };
  const auto y = [](Index n) { return "y" + std::to_string(n + 1); };

  out << "\\ Big-M scenario model\n";
  out << "\\ " << model.comment << '\n';
  out << "Minimize\n obj:";
  {
    TermWriter w(out);
    for (Index k = 0; k < model.num_vars; ++k) w.term("- " + x(k));
  }
  out << "\nSubject To\n";
  for (const BipRow& r : model.rows) {
    out << ' ' << 'g' << r.row + 1 << '_' << r.col + 1 << ": [";
    TermWriter w(out);
    bool first = true;
    for (std::size_t k = 0; k < r.coeffs.size(); ++k) {
      if (r.coeffs[k] == 0.0) continue;
      w.term(signed_term(r.coeffs[k], x(static_cast<Index>(k)) + " ^2", first));
      first = false;
    }
    if (first) w.term("0 " + x(0) + " ^2");
    out << " ] + " << detail::format_double(r.big_M) << ' ' << y(r.col)
        << " <= " << detail::format_double(r.big_M + r.b) << '\n';
  }
  out << " card:";
  {
    TermWriter w(out);
    for (Index n = 0; n < model.num_scenarios; ++n) w.term((n == 0 ? "" : "+ ") + y(n));
  }
  out << " >= " << model.num_scenarios - model.s << '\n';
  out << "Bounds\n";
  for (Index k = 0; k < model.num_vars; ++k) out << ' ' << x(k) << " >= 0\n";
  out << "Binaries\n";
  for (Index n = 0; n < model.num_scenarios; ++n) out << ' ' << y(n) << '\n';
  out << "End\n";
}

void export_bip(const Problem& problem, Index s, double big_M, const std::filesystem::path& path) {
  const auto* norm_opt = dynamic_cast<const NormOptProblem*>(&problem);
  if (norm_opt == nullptr) {
    throw Error(ErrorCode::kUnsupported, "only norm-optimization instances can be exported");
  }
  const BipModel model = build_bip(*norm_opt, s, big_M);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_lp(model, out);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "error while writing " + path.string());
}

}  // namespace stepcon
