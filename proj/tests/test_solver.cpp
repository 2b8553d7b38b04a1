#include "oracles.hpp"
#include "stepcon/solver.hpp"
#include "stepcon/step_geometry.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace stepcon;

namespace {

// f = 0.5 ||x - target||^2 with G = -1 everywhere.
CallbackProblem free_quadratic(const Vector& target, Index M, Index N) {
  const Index K = target.size();
  CallbackProblem::Callbacks cb;
  cb.f = [target](const Vector& x) { return 0.5 * (x - target).squaredNorm(); };
  cb.grad_f = [target](const Vector& x) { return Vector(x - target); };
  cb.hess_f = [K](const Vector&) { return Matrix(Matrix::Identity(K, K)); };
  cb.G = [M, N](const Vector&) { return Matrix(Matrix::Constant(M, N, -1.0)); };
  cb.grad_G = [K](const Vector&, Index, Index) { return Vector(Vector::Zero(K)); };
  return CallbackProblem(K, M, N, cb);
}

// G_n(x) = x - (n + 1) for a scalar x; f = -x (no curvature).
CallbackProblem staircase(Index N) {
  CallbackProblem::Callbacks cb;
  cb.f = [](const Vector& x) { return -x(0); };
  cb.grad_f = [](const Vector&) { return Vector(Vector::Constant(1, -1.0)); };
  cb.G = [N](const Vector& x) {
    Matrix Z(1, N);
    for (Index n = 0; n < N; ++n) Z(0, n) = x(0) - static_cast<double>(n + 1);
    return Z;
  };
  cb.grad_G = [](const Vector&, Index, Index) { return Vector(Vector::Ones(1)); };
  return CallbackProblem(1, 1, N, cb);
}

SolverConfig config_for(double alpha, Index N) { return SolverConfig::for_alpha(alpha, N); }

}  // namespace

TEST(Parameters, SparsityAndGamma) {
  EXPECT_EQ(sparsity_for_alpha(0.05, 100), 5);
  EXPECT_EQ(sparsity_for_alpha(0.01, 100), 1);
  EXPECT_EQ(sparsity_for_alpha(0.1, 100), 10);
  EXPECT_EQ(sparsity_for_alpha(0.05, 101), 6);
  EXPECT_DOUBLE_EQ(gamma_for_alpha(0.01, 1), 2.0);
  EXPECT_DOUBLE_EQ(gamma_for_alpha(0.05, 5), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(gamma_for_alpha(0.1, 10), 4.0 / 10.0);
  const SolverConfig c = SolverConfig::for_alpha(0.05, 100);
  EXPECT_EQ(c.s, 5);
  EXPECT_DOUBLE_EQ(c.gamma, 0.6);
  EXPECT_EQ(c.max_it, 2000);
  EXPECT_DOUBLE_EQ(c.tau, 0.75);
}

TEST(Parameters, ValidateRejectsBadValues) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  for (auto mutate : std::vector<std::function<void(SolverConfig&)>>{
           [](SolverConfig& x) { x.nu = 1.0; }, [](SolverConfig& x) { x.pi = 0.0; },
           [](SolverConfig& x) { x.tau = -1.0; }, [](SolverConfig& x) { x.s = 0; },
           [](SolverConfig& x) { x.max_it = 0; }, [](SolverConfig& x) { x.gamma = -0.1; },
           [](SolverConfig& x) { x.zero_band = std::nan(""); }}) {
    SolverConfig bad;
    mutate(bad);
    EXPECT_THROW(bad.validate(), Error);
  }
}

TEST(SelectT, ExampleTieBreak) {
  Matrix L(2, 4);
  L << 2, 2, 0, -1, 0, -1, -2, -3;
  EXPECT_EQ(select_T(L, 1), (ColumnSet{1, 2}));
  EXPECT_EQ(select_T(L, 2), (ColumnSet{2}));
}

TEST(SelectT, IsAlwaysACandidate) {
  std::mt19937_64 rng(51);
  for (int i = 0; i < 300; ++i) {
    const Matrix L = oracle::integer_matrix(rng, 2, 6, -2, 2);
    const Index s = 1 + i % 3;
    const ColumnSet T = select_T(L, s);
    const auto fam = candidate_sets(L, s);
    EXPECT_NE(std::find(fam.sets.begin(), fam.sets.end(), T), fam.sets.end());
    if (step_norm(L) <= s) EXPECT_EQ(T, partition(L).gamma_zero);
  }
}

TEST(NewtonDirection, PureNewtonOnSmoothObjective) {
  const Vector c = (Vector(3) << 1.0, -2.0, 0.5).finished();
  const CallbackProblem p = free_quadratic(c, 2, 3);
  PrimalDualPoint w{Vector::Ones(3), Matrix::Constant(2, 3, 0.25)};
  const NewtonDirection d = newton_direction(p, w, ActiveSet{}, 0.01);
  ASSERT_TRUE(d.solvable);
  EXPECT_LE((d.direction.x - (c - w.x)).norm(), 1e-14);
  EXPECT_EQ(d.direction.W, -w.W);
}

TEST(NewtonDirection, SolvesTheFullSystem) {
  std::mt19937_64 rng(52);
  const NormOptProblem p = make_norm_opt({.K = 5, .M = 2, .N = 8, .b = 2.0, .seed = 7});
  for (int i = 0; i < 20; ++i) {
    const PrimalDualPoint w{oracle::uniform_matrix(rng, 5, 1, 0.2, 2), oracle::uniform_matrix(rng, 2, 8, -1, 1)};
    ActiveSet V;
    for (Index n = 0; n < 8 && V.size() < 4; ++n)
      if (rng() % 3 == 0) V.pairs.push_back({static_cast<Index>(rng() % 2), n});
    const double mu = (i % 2) ? 0.0 : 1e-2;
    const NewtonDirection d = newton_direction(p, w, V, mu);
    ASSERT_TRUE(d.solvable);
    const Matrix A = newton_matrix(p, w, V, mu);
    const Vector F = residual_F(p, w, V);
    const Vector dv = stack(d.direction, V);
    EXPECT_LE((A * dv + F).norm(), 1e-8 * std::max(1.0, F.norm()));
  }
}

TEST(NewtonDirection, SingularSystemIsFlagged) {
  CallbackProblem::Callbacks cb;
  cb.f = [](const Vector& x) { return x.sum(); };
  cb.grad_f = [](const Vector& x) { return Vector(Vector::Ones(x.size())); };
  cb.G = [](const Vector&) { return Matrix(Matrix::Constant(1, 2, -1.0)); };
  cb.grad_G = [](const Vector& x, Index, Index) { return Vector(Vector::Zero(x.size())); };
  CallbackProblem p(2, 1, 2, cb);
  const NewtonDirection d = newton_direction(p, PrimalDualPoint::zeros(p), ActiveSet{}, 0.0);
  EXPECT_FALSE(d.solvable);
}

TEST(FallbackDirection, NegatedResidual) {
  std::mt19937_64 rng(53);
  const NormOptProblem p = make_norm_opt({.K = 4, .M = 1, .N = 6, .seed = 8});
  const PrimalDualPoint w{oracle::uniform_matrix(rng, 4, 1, 0.2, 2), oracle::uniform_matrix(rng, 1, 6, -1, 1)};
  ActiveSet V;
  V.pairs = {{0, 1}, {0, 4}};
  const Vector F = residual_F(p, w, V);
  const Vector d = stack(fallback_direction(p, w, V), V);
  EXPECT_DOUBLE_EQ(d.norm(), F.norm());
  EXPECT_NEAR(d.dot(F), -F.squaredNorm(), 1e-12 * F.squaredNorm());

  const CallbackProblem q = free_quadratic(Vector::Ones(2), 1, 2);
  const PrimalDualPoint at_min{Vector::Ones(2), Matrix::Zero(1, 2)};
  EXPECT_EQ(stack(fallback_direction(q, at_min, ActiveSet{}), ActiveSet{}), Vector::Zero(4));
}

TEST(LineSearch, ZeroDirectionTakesFullStep) {
  const CallbackProblem p = staircase(4);
  const LineSearchResult r = line_search(p, Vector::Zero(1), Vector::Zero(1), 1, 0.0, 0.85, 50);
  EXPECT_EQ(r.t, 0);
  EXPECT_EQ(r.alpha, 1.0);
  EXPECT_FALSE(r.stalled);
}

TEST(LineSearch, BacktracksOnce) {
  const CallbackProblem p = staircase(4);
  // Full step to x = 2.5 violates two scenarios; half step to 1.25 violates one.
  const LineSearchResult r = line_search(p, Vector::Zero(1), Vector::Constant(1, 2.5), 1, 0.0, 0.5, 50);
  EXPECT_EQ(r.t, 1);
  EXPECT_EQ(r.alpha, 0.5);
  EXPECT_EQ(step_norm(p.constraints(Vector::Constant(1, 2.5))), 2);
  EXPECT_EQ(step_norm(p.constraints(Vector::Constant(1, 1.25))), 1);
}

TEST(LineSearch, VacuousBoundNeverBacktracks) {
  const CallbackProblem p = staircase(4);
  const LineSearchResult r = line_search(p, Vector::Zero(1), Vector::Constant(1, 100.0), 1, 3.0, 0.5, 50);
  EXPECT_EQ(r.t, 0);
}

TEST(LineSearch, StallsWhenNothingWorks) {
  const CallbackProblem p = staircase(4);
  const LineSearchResult r = line_search(p, Vector::Constant(1, 5.0), Vector::Zero(1), 1, 0.0, 0.5, 5);
  EXPECT_TRUE(r.stalled);
  EXPECT_EQ(r.t, 5);
  EXPECT_DOUBLE_EQ(r.alpha, 0.03125);
}

TEST(Solve, SmoothUnconstrainedConvergesFast) {
  const Vector c = (Vector(3) << 1.0, -2.0, 0.5).finished();
  const CallbackProblem p = free_quadratic(c, 1, 4);
  SolverConfig cfg;
  cfg.s = 1;
  const SolveResult r = solve(p, cfg);
  EXPECT_EQ(r.status, SolveStatus::kConverged);
  EXPECT_LE(r.iterations, 2);
  EXPECT_LE((r.point.x - c).norm(), 1e-12);
  EXPECT_EQ(r.point.W, Matrix::Zero(1, 4));
  EXPECT_TRUE(r.final_report.satisfied);
}

TEST(Solve, CounterexampleReachesBetterPoint) {
  const CounterexampleProblem p = make_counterexample();
  SolverConfig cfg;
  cfg.s = 1;
  cfg.gamma = 1.0;
  const SolveResult r = solve(p, cfg);
  EXPECT_EQ(r.status, SolveStatus::kConverged);
  EXPECT_LT(r.trace.back().residual, r.tolerance);
  EXPECT_LE(p.objective(r.point.x), 1.0);
  EXPECT_TRUE(check_tau_stationary(p, r.point, cfg.tau, 1, 10 * r.tolerance).satisfied);
}

TEST(Solve, NormOptDefaultInstance) {
  const NormOptProblem p = make_norm_opt({.K = 10, .M = 1, .N = 100, .seed = 1});
  const SolverConfig cfg = config_for(0.05, 100);
  const SolveResult r = solve(p, cfg);
  EXPECT_EQ(r.status, SolveStatus::kConverged);
  EXPECT_LE(r.trace.size(), 2001u);
  EXPECT_TRUE(r.final_report.satisfied);
  EXPECT_LE(step_norm(snap_to_zero(p.constraints(r.point.x), r.tolerance)), cfg.s);
}

TEST(Solve, BindingInstancesHaveQuadraticTail) {
  for (double alpha : {0.01, 0.05, 0.1}) {
    for (std::uint64_t seed : {1u, 7u}) {
      const NormOptProblem p = make_norm_opt({.K = 10, .M = 1, .N = 100, .b = 10.0, .seed = seed});
      const SolverConfig cfg = config_for(alpha, 100);
      const SolveResult r = solve(p, cfg);
      ASSERT_EQ(r.status, SolveStatus::kConverged) << "alpha " << alpha << " seed " << seed;
      EXPECT_TRUE(r.final_report.satisfied);
      EXPECT_LE(step_norm(snap_to_zero(p.constraints(r.point.x), r.tolerance)), cfg.s);
      const auto rates = rate_diagnostic(r.trace);
      ASSERT_GE(rates.size(), 3u);
      for (std::size_t i = rates.size() - 3; i < rates.size(); ++i) EXPECT_LE(rates[i].ratio, 1e3);
    }
  }
}

TEST(Solve, TraceInvariants) {
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    const NormOptProblem p = make_norm_opt({.K = 10, .M = 1, .N = 100, .b = 10.0, .seed = seed});
    const SolverConfig cfg = config_for(0.05, 100);
    const SolveResult r = solve(p, cfg);
    ASSERT_FALSE(r.trace.empty());
    EXPECT_LE(static_cast<int>(r.trace.size()), cfg.max_it + 1);
    EXPECT_EQ(r.trace.back().direction, DirectionKind::kNone);
    EXPECT_EQ(static_cast<int>(r.trace.size()), r.iterations + 1);
    for (std::size_t l = 0; l < r.trace.size(); ++l) {
      const IterationRecord& rec = r.trace[l];
      EXPECT_EQ(rec.iter, static_cast<int>(l));
      EXPECT_GE(rec.residual, 0.0);
      EXPECT_GE(rec.mu, 0.0);
      if (l > 0) {
        EXPECT_LE(rec.mu, r.trace[l - 1].mu);
        EXPECT_LE(rec.mu, cfg.rho * rec.residual * (1 + 1e-12));
      }
      if (rec.direction != DirectionKind::kNone) {
        EXPECT_GT(rec.step, 0.0);
        EXPECT_LE(rec.step, 1.0);
        const double t = std::log(rec.step) / std::log(cfg.pi);
        EXPECT_NEAR(t, std::round(t), 1e-9);
      }
    }
  }
}

TEST(Solve, DeterministicTraces) {
  const NormOptProblem a = make_norm_opt({.K = 10, .M = 1, .N = 100, .b = 10.0, .seed = 5});
  const NormOptProblem b = make_norm_opt({.K = 10, .M = 1, .N = 100, .b = 10.0, .seed = 5});
  const SolverConfig cfg = config_for(0.05, 100);
  std::ostringstream ta, tb;
  write_trace_csv(ta, solve(a, cfg).trace);
  write_trace_csv(tb, solve(b, cfg).trace);
  EXPECT_EQ(ta.str(), tb.str());
  EXPECT_EQ(ta.str().substr(0, ta.str().find('\n')), "iter,residual,objective,violations,step,mu,direction");
}

TEST(Solve, FallbackKeepsIterating) {
  // Zero curvature and no active constraints make every Newton system
  // singular, so each step uses d = -F.
  CallbackProblem::Callbacks cb;
  cb.f = [](const Vector& x) { return 0.25 * x.squaredNorm() * x.squaredNorm(); };
  cb.grad_f = [](const Vector& x) { return Vector(x.squaredNorm() * x); };
  cb.hess_f = [](const Vector& x) { return Matrix(Matrix::Zero(x.size(), x.size())); };
  cb.G = [](const Vector&) { return Matrix(Matrix::Constant(1, 2, -1.0)); };
  cb.grad_G = [](const Vector& x, Index, Index) { return Vector(Vector::Zero(x.size())); };
  CallbackProblem p(2, 1, 2, cb);
  SolverConfig cfg;
  cfg.max_it = 5;
  const PrimalDualPoint w0{Vector::Constant(2, 0.5), Matrix::Zero(1, 2)};
  const SolveResult r = solve(p, cfg, w0);
  ASSERT_GE(r.trace.size(), 2u);
  EXPECT_EQ(r.trace.front().direction, DirectionKind::kFallback);
  EXPECT_TRUE(r.point.x.allFinite());
  EXPECT_LT(r.point.x.norm(), w0.x.norm());
}

TEST(Solve, NonFiniteIterateAborts) {
  CallbackProblem::Callbacks cb;
  cb.f = [](const Vector& x) { return x.sum(); };
  cb.grad_f = [](const Vector& x) { return Vector(Vector::Constant(x.size(), std::nan(""))); };
  cb.hess_f = [](const Vector& x) { return Matrix(Matrix::Identity(x.size(), x.size())); };
  cb.G = [](const Vector&) { return Matrix(Matrix::Constant(1, 2, -1.0)); };
  cb.grad_G = [](const Vector& x, Index, Index) { return Vector(Vector::Zero(x.size())); };
  CallbackProblem p(2, 1, 2, cb);
  try {
    solve(p, SolverConfig{});
    FAIL() << "expected an abort";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
}

TEST(RateDiagnostic, QuadraticAndLinearSequences) {
  std::vector<IterationRecord> quad, lin;
  for (int l = 0; l < 5; ++l) {
    quad.push_back({.iter = l, .residual = std::pow(2.0, -std::pow(2.0, l))});
    lin.push_back({.iter = l, .residual = std::pow(2.0, -l)});
  }
  const auto q = rate_diagnostic(quad);
  ASSERT_EQ(q.size(), 4u);
  for (const RateSample& r : q) EXPECT_DOUBLE_EQ(r.ratio, 1.0);
  const auto li = rate_diagnostic(lin);
  ASSERT_EQ(li.size(), 4u);
  for (const RateSample& r : li) EXPECT_DOUBLE_EQ(r.ratio, std::pow(2.0, r.iter - 2));
  lin.push_back({.iter = 5, .residual = 0.0});
  EXPECT_EQ(rate_diagnostic(lin).size(), 4u);
}

TEST(Names, StatusAndDirectionStrings) {
  EXPECT_STREQ(to_string(SolveStatus::kConverged), "Converged");
  EXPECT_STREQ(to_string(SolveStatus::kMaxIterations), "MaxIterations");
  EXPECT_STREQ(to_string(SolveStatus::kLineSearchStalled), "LineSearchStalled");
  EXPECT_STREQ(to_string(DirectionKind::kNewton), "newton");
  EXPECT_STREQ(to_string(DirectionKind::kFallback), "fallback");
  EXPECT_STREQ(to_string(DirectionKind::kNone), "none");
}
