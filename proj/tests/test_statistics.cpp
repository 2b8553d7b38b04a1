#include "stepcon/statistics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

using namespace stepcon;

namespace {

struct ReferenceRow {
  double alpha, beta, epsilon, nu, alpha_star;
  std::int64_t s, N, dkw, simplified, exact;
  double confidence, s_bound, s_confidence;
};

std::vector<ReferenceRow> load_reference() {
  std::ifstream in(std::string(STEPCON_TEST_DATA_DIR) + "/bounds_table.csv");
  std::vector<ReferenceRow> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    ReferenceRow r{};
    std::string conf;
    ss >> r.alpha >> r.s >> r.beta >> r.epsilon >> r.N >> r.nu >> r.alpha_star >> r.dkw >> r.simplified >>
        r.exact >> conf >> r.s_bound >> r.s_confidence;
    r.confidence = conf == "nan" ? std::nan("") : std::stod(conf);
    rows.push_back(r);
  }
  return rows;
}

// Distance in units of the spacing of doubles near `ref`.
double ulps(double value, double ref) {
  const double spacing = std::nextafter(std::abs(ref), INFINITY) - std::abs(ref);
  return std::abs(value - ref) / std::max(spacing, 1e-300);
}

// Confidences are 1 minus a term of order one, so they are only accurate to
// a few ulp of 1 when they land near zero.
constexpr double kConfidenceAbsTol = 8 * std::numeric_limits<double>::epsilon();

}  // namespace

TEST(Dkw, KnownValue) {
  EXPECT_EQ(dkw_sample_size(0.05, 0.05), 738);
  EXPECT_THROW(dkw_sample_size(0.05, 2.0), Error);
  EXPECT_THROW(dkw_sample_size(0.0, 0.05), Error);
}

TEST(Dkw, DoublingEpsilonQuartersTheBound) {
  for (double eps : {0.01, 0.02, 0.05}) {
    const double full = std::log(2.0 / 0.05) / (2.0 * eps * eps);
    EXPECT_EQ(dkw_sample_size(eps, 0.05), static_cast<std::int64_t>(std::ceil(full)));
    EXPECT_EQ(dkw_sample_size(2 * eps, 0.05), static_cast<std::int64_t>(std::ceil(full / 4.0)));
  }
}

TEST(FeasibilitySampleSize, KnownValues) {
  EXPECT_EQ(feasibility_sample_size(0.05, 5, 0.05, false), 3429);
  EXPECT_EQ(feasibility_sample_size(0.05, 5, 0.05, true), 3426);
  EXPECT_EQ(feasibility_sample_size(0.05, 0, 0.05, false), 3229);
  EXPECT_EQ(feasibility_sample_size(0.05, 0, 0.05, true), 3229);
  EXPECT_THROW(feasibility_sample_size(0.0, 5, 0.05, true), Error);
  EXPECT_THROW(feasibility_sample_size(0.05, -1, 0.05, true), Error);
}

TEST(FeasibilitySampleSize, ExactNeverExceedsSimplified) {
  int points = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      for (int k = 0; k < 10; ++k) {
        const double alpha = 0.005 + 0.0495 * i;
        const std::int64_t s = 12 * j;
        const double beta = std::pow(10.0, -0.5 - 0.6 * k);
        EXPECT_LE(feasibility_sample_size(alpha, s, beta, true), feasibility_sample_size(alpha, s, beta, false));
        ++points;
      }
    }
  }
  EXPECT_EQ(points, 1000);
}

TEST(FeasibilityConfidence, KnownValueAndGuards) {
  EXPECT_NEAR(feasibility_confidence(0.1, 5, 689), 0.9999798609163286, 1e-15);
  EXPECT_THROW(feasibility_confidence(0.1, 10, 100), Error);
  EXPECT_THROW(feasibility_confidence(0.1, 11, 100), Error);
  EXPECT_LT(feasibility_confidence(0.1, 5, 60), 0.0);  // vacuous, returned as is
}

TEST(FeasibilityConfidence, IncreasesWithN) {
  double prev = -INFINITY;
  for (std::int64_t N = 60; N < 1500; N += 37) {
    const double c = feasibility_confidence(0.1, 5, N);
    EXPECT_GT(c, prev);
    EXPECT_LT(c, 1.0);
    prev = c;
  }
}

TEST(SparsityBound, KnownValueAndLimits) {
  const SparsityBound b = s_lower_bound(0.5, 0.05, 2000);
  EXPECT_DOUBLE_EQ(b.bound, 50.0);
  EXPECT_NEAR(b.confidence, 0.767828563357411, 1e-15);
  const SparsityBound near_one = s_lower_bound(0.999999, 0.05, 100);
  EXPECT_NEAR(near_one.confidence, 1.0 - 2.0 * std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(near_one.bound, 5.0, 1e-4);
  EXPECT_LT(s_lower_bound(0.5, 0.05, 1000).confidence, s_lower_bound(0.5, 0.05, 2000).confidence);
  EXPECT_THROW(s_lower_bound(1.0, 0.05, 10), Error);
}

TEST(Reference, AgreesWithExtendedPrecisionTable) {
  const std::vector<ReferenceRow> rows = load_reference();
  ASSERT_EQ(rows.size(), 300u);
  double worst = 0.0;
  for (const ReferenceRow& r : rows) {
    EXPECT_EQ(dkw_sample_size(r.epsilon, r.beta), r.dkw);
    EXPECT_EQ(feasibility_sample_size(r.alpha, r.s, r.beta, false), r.simplified);
    EXPECT_EQ(feasibility_sample_size(r.alpha, r.s, r.beta, true), r.exact);
    if (std::isnan(r.confidence)) {
      EXPECT_THROW(feasibility_confidence(r.alpha, r.s, r.N), Error);
    } else {
      const double c = feasibility_confidence(r.alpha, r.s, r.N);
      worst = std::max(worst, std::abs(c - r.confidence));
      EXPECT_LE(std::abs(c - r.confidence), kConfidenceAbsTol) << c << " vs " << r.confidence;
    }
    const SparsityBound sb = s_lower_bound(r.nu, r.alpha_star, r.N);
    EXPECT_LE(ulps(sb.bound, r.s_bound), 1.0);
    EXPECT_LE(std::abs(sb.confidence - r.s_confidence), kConfidenceAbsTol);
  }
  RecordProperty("worst_confidence_abs_error", std::to_string(worst));
}

TEST(MonteCarlo, AlwaysFeasibleScenario) {
  const ScenarioSampler never = [](const Vector&, std::mt19937_64&) { return Vector(Vector::Constant(2, -1.0)); };
  const MonteCarloResult r = monte_carlo_feasibility(never, Vector::Zero(1), 0.05, 0, 50, 20, 1, 1000);
  EXPECT_EQ(r.rate, 1.0);
  EXPECT_EQ(r.qualifying, 20);
  EXPECT_EQ(r.max_violation, 0.0);
}

TEST(MonteCarlo, ZeroRiskOnlyAdmitsViolationFreePoints) {
  const ScenarioSampler sampler = norm_opt_sampler(2, 1, 1.0);
  // x = 0 never violates; a large x violates most draws and never qualifies.
  const MonteCarloResult ok = monte_carlo_feasibility(sampler, Vector::Zero(2), 0.0, 0, 100, 10, 2, 1000);
  EXPECT_EQ(ok.rate, 1.0);
  try {
    monte_carlo_feasibility(sampler, Vector::Constant(2, 5.0), 0.0, 0, 100, 10, 2, 1000);
    FAIL() << "expected no qualifying trials";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoQualifyingTrials);
  }
}

TEST(MonteCarlo, GuaranteeHoldsAtTheoreticalSampleSize) {
  // x = 2 * ones gives P(sum 4 xi_k^2 > 100) = P(chi2_10 > 25), about 0.005.
  const ScenarioSampler sampler = norm_opt_sampler(10, 1, 100.0);
  const double alpha = 0.1;
  const std::int64_t s = 5, N = 689;
  const double beta = 1.0 - feasibility_confidence(alpha, s, N);
  const MonteCarloResult r =
      monte_carlo_feasibility(sampler, Vector::Constant(10, 2.0), alpha, s, N, 200, 42, 20000);
  EXPECT_GE(r.rate, 1.0 - beta - 0.05);
  EXPECT_GT(r.qualifying, 100);
  EXPECT_NEAR(r.mean_violation, 0.0053, 0.002);
}

TEST(MonteCarlo, DeterministicForSeed) {
  const ScenarioSampler sampler = norm_opt_sampler(3, 2, 5.0);
  const Vector x = Vector::Constant(3, 0.8);
  const MonteCarloResult a = monte_carlo_feasibility(sampler, x, 0.2, 6, 40, 15, 9, 2000);
  const MonteCarloResult b = monte_carlo_feasibility(sampler, x, 0.2, 6, 40, 15, 9, 2000);
  EXPECT_EQ(a.rate, b.rate);
  EXPECT_EQ(a.qualifying, b.qualifying);
  EXPECT_EQ(a.mean_violation, b.mean_violation);
}
