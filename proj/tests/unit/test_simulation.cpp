#include <gtest/gtest.h>

#include <algorithm>

#include "gmvshrink/error.hpp"
#include "gmvshrink/random.hpp"
#include "gmvshrink/simulation.hpp"
#include "oracles.hpp"

namespace gmvshrink::simulation {
namespace {

std::vector<double> sorted_spectrum(Scenario s, Index p) {
  Vector v = scenario_spectrum(s, p);
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Scenario, BoundedNine) {
  EXPECT_EQ(sorted_spectrum(Scenario::kBoundedSpectrum, 9),
            (std::vector<double>{2, 5, 5, 5, 5, 10, 10, 10, 10}));
}

TEST(Scenario, UnboundedNine) {
  EXPECT_EQ(sorted_spectrum(Scenario::kUnboundedSpectrum, 9),
            (std::vector<double>{2, 5, 5, 5, 5, 9, 10, 10, 10}));
}

TEST(Scenario, UnboundedTopEigenvalueIsP) {
  const Vector v = scenario_spectrum(Scenario::kUnboundedSpectrum, 207);
  EXPECT_EQ(v.maxCoeff(), 207.0);
  EXPECT_EQ((v.array() == 10.0).count(), 4 * 23 - 1);
}

TEST(Scenario, Fig1TwoHundred) {
  const Vector v = scenario_spectrum(Scenario::kFig1Spectrum, 200);
  EXPECT_EQ((v.array() == 3.0).count(), 40);
  EXPECT_EQ((v.array() == 1.0).count(), 80);
  EXPECT_EQ((v.array() == 0.5).count(), 80);
}

TEST(Scenario, DivisibilityErrorNamesModulus) {
  try {
    (void)scenario_spectrum(Scenario::kBoundedSpectrum, 10);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("divisible by 9"), std::string::npos) << e.what();
  }
  try {
    (void)scenario_spectrum(Scenario::kFig1Spectrum, 12);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("divisible by 5"), std::string::npos) << e.what();
  }
}

TEST(Scenario, CustomBlocks) {
  const Vector v = scenario_spectrum(Scenario::kCustom, 10, {{3.0, 0.2}, {1.0, 0.8}});
  EXPECT_EQ((v.array() == 3.0).count(), 2);
  EXPECT_EQ((v.array() == 1.0).count(), 8);
  EXPECT_THROW(scenario_spectrum(Scenario::kCustom, 10, {{3.0, 0.25}, {1.0, 0.75}}), ConfigError);
  EXPECT_THROW(scenario_spectrum(Scenario::kCustom, 10, {{3.0, 0.5}}), ConfigError);
  EXPECT_THROW(scenario_spectrum(Scenario::kCustom, 10, {}), ConfigError);
}

TEST(Scenario, ParseNames) {
  EXPECT_EQ(parse_scenario("bounded_spectrum"), Scenario::kBoundedSpectrum);
  EXPECT_EQ(parse_scenario("unbounded"), Scenario::kUnboundedSpectrum);
  EXPECT_EQ(parse_scenario("fig1_spectrum"), Scenario::kFig1Spectrum);
  EXPECT_THROW(parse_scenario("banana"), ConfigError);
}

TEST(Distribution, Parse) {
  EXPECT_EQ(parse_distribution("gaussian").kind, Distribution::Kind::kGaussian);
  const Distribution t = parse_distribution("student_t(5)");
  EXPECT_EQ(t.kind, Distribution::Kind::kStudentT);
  EXPECT_EQ(t.df, 5);
  EXPECT_EQ(parse_distribution("t7").df, 7);
  EXPECT_TRUE(parse_distribution("t3").experimental());
  EXPECT_FALSE(t.experimental());
  EXPECT_THROW(parse_distribution("student_t(2)"), ConfigError);
  EXPECT_THROW(parse_distribution("cauchy"), ConfigError);
}

TEST(GenerateReturns, GaussianCovarianceConverges) {
  const CovarianceModel id(Vector::Ones(2), Matrix::Identity(2, 2));
  Rng rng = make_stream(1, 1);
  const ReturnsMatrix y =
      generate_returns(id, Vector::Zero(2), 100000, Distribution::gaussian(), rng);
  const SymmetricMatrix s = sample_covariance(y);
  EXPECT_LE((s.data() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.02);
}

TEST(GenerateReturns, StudentTHasUnitVariance) {
  const CovarianceModel one(Vector::Ones(1), Matrix::Identity(1, 1));
  Rng rng = make_stream(2, 1);
  const ReturnsMatrix y =
      generate_returns(one, Vector::Zero(1), 100000, Distribution::student_t(5), rng);
  EXPECT_NEAR(sample_covariance(y).data()(0, 0), 1.0, 0.05);
}

TEST(GenerateReturns, MeanShiftPassesThrough) {
  const CovarianceModel id(Vector::Ones(2), Matrix::Identity(2, 2));
  Rng rng = make_stream(3, 1);
  const ReturnsMatrix y =
      generate_returns(id, Eigen::Vector2d(1.0, 2.0), 50000, Distribution::gaussian(), rng);
  const Vector means = y.data().rowwise().mean();
  EXPECT_NEAR(means(0), 1.0, 0.02);
  EXPECT_NEAR(means(1), 2.0, 0.02);
}

TEST(GenerateReturns, ReturnsAreSigmaSqrtTimesInnovations) {
  Rng sigma_rng = make_stream(4, 0);
  const CovarianceModel sigma = build_scenario(Scenario::kBoundedSpectrum, 9, sigma_rng);
  Rng rng = make_stream(4, 1);
  const GeneratedSample g = generate_sample(sigma, Vector::Zero(9), 20, Distribution::gaussian(), rng);
  EXPECT_LE((g.returns.data() - sigma.sqrt() * g.innovations).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DefaultSchedule, GeometricInP) {
  const auto s = default_schedule(0.5);
  ASSERT_EQ(s.size(), 6u);
  EXPECT_EQ(s.front(), (CellSize{9, 18}));
  EXPECT_EQ(s.back(), (CellSize{288, 576}));
  for (const CellSize& cell : default_schedule(1.8)) {
    EXPECT_NEAR(cell.c_ratio(), 1.8, 0.018);
  }
}

SimulationConfig small_config() {
  SimulationConfig c;
  c.c_target = 0.5;
  c.schedule = {{18, 36}};
  c.repetitions = 20;
  c.seed = 42;
  return c;
}

TEST(Validated, Rejections) {
  SimulationConfig c = small_config();
  c.schedule = {{18, 30}};
  EXPECT_THROW(validated(c), ConfigError);
  c = small_config();
  c.schedule = {{10, 20}};
  EXPECT_THROW(validated(c), ConfigError);
  c = small_config();
  c.c_target = 1.8;
  c.schedule = {{18, 10}};
  c.estimators = {EstimatorKind::kFrahmMemmel};
  EXPECT_THROW(validated(c), ConfigError);
  c = small_config();
  c.repetitions = 0;
  EXPECT_THROW(validated(c), ConfigError);
  c = small_config();
  c.estimators.clear();
  EXPECT_THROW(validated(c), ConfigError);
  c = small_config();
  c.target = {TargetSpec::Kind::kExplicit, Vector::Constant(9, 1.0 / 9.0)};
  EXPECT_THROW(validated(c), ConfigError);
  c = small_config();
  c.schedule.clear();
  c.c_target.reset();
  EXPECT_THROW(validated(c), ConfigError);
}

TEST(Validated, FillsDefaultScheduleAndDedupes) {
  SimulationConfig c;
  c.c_target = 0.9;
  c.estimators = {EstimatorKind::kBonaFide, EstimatorKind::kBonaFide};
  const SimulationConfig v = validated(c);
  EXPECT_EQ(v.schedule.size(), 6u);
  EXPECT_EQ(v.estimators.size(), 1u);
}

TEST(RunMonteCarlo, ShapeAndNonNegativeLosses) {
  SimulationConfig c = small_config();
  c.estimators = {EstimatorKind::kTraditional, EstimatorKind::kBonaFide,
                  EstimatorKind::kFrahmMemmel, EstimatorKind::kOracleShrinkage,
                  EstimatorKind::kOracleTraditional};
  const MonteCarloReport r = run_monte_carlo(c);
  ASSERT_EQ(r.cells.size(), 1u);
  const CellReport& cell = r.cell({18, 36});
  EXPECT_EQ(cell.estimators.size(), 5u);
  for (const EstimatorSamples& s : cell.estimators) {
    EXPECT_EQ(s.loss.size(), 20u);
    for (double l : s.loss) EXPECT_GE(l, -1e-10);
    EXPECT_NEAR(s.mean_loss(), testing::two_pass(s.loss).first, 1e-12);
  }
  EXPECT_EQ(cell.at(EstimatorKind::kBonaFide).alpha.size(), 20u);
  EXPECT_EQ(cell.at(EstimatorKind::kBonaFide).r_hat.size(), 20u);
  EXPECT_EQ(cell.at(EstimatorKind::kOracleShrinkage).alpha.size(), 20u);
  // At p < n the oracle generalized inverse is the inverse itself.
  const auto& trad = cell.at(EstimatorKind::kTraditional).loss;
  const auto& oracle_trad = cell.at(EstimatorKind::kOracleTraditional).loss;
  for (std::size_t i = 0; i < trad.size(); ++i) EXPECT_NEAR(trad[i], oracle_trad[i], 1e-9);
}

TEST(RunMonteCarlo, OracleNeverWorseThanTraditionalPerDraw) {
  for (double c : {0.5, 1.8}) {
    SimulationConfig cfg;
    cfg.c_target = c;
    cfg.schedule = {{36, static_cast<Index>(std::llround(36 / c))}};
    cfg.repetitions = 100;
    cfg.seed = 5;
    cfg.estimators = {EstimatorKind::kOracleTraditional, EstimatorKind::kOracleShrinkage};
    const CellReport cell = run_monte_carlo(cfg).cells.front();
    const auto& trad = cell.at(EstimatorKind::kOracleTraditional).loss;
    const auto& shr = cell.at(EstimatorKind::kOracleShrinkage).loss;
    for (std::size_t i = 0; i < trad.size(); ++i) {
      EXPECT_LE(shr[i], trad[i] + 1e-10 * std::max(1.0, trad[i])) << "rep " << i;
    }
  }
}

bool identical(const MonteCarloReport& a, const MonteCarloReport& b) {
  if (a.cells.size() != b.cells.size()) return false;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const CellReport& x = a.cells[i];
    const CellReport& y = b.cells[i];
    if (!(x.size == y.size) || x.target_loss != y.target_loss) return false;
    if (x.estimators.size() != y.estimators.size()) return false;
    for (std::size_t e = 0; e < x.estimators.size(); ++e) {
      if (x.estimators[e].loss != y.estimators[e].loss) return false;
      if (x.estimators[e].alpha != y.estimators[e].alpha) return false;
      if (x.estimators[e].r_hat != y.estimators[e].r_hat) return false;
    }
  }
  return true;
}

TEST(RunMonteCarlo, SingleRepetitionIsReproducible) {
  SimulationConfig c = small_config();
  c.repetitions = 1;
  EXPECT_TRUE(identical(run_monte_carlo(c), run_monte_carlo(c)));
}

TEST(RunMonteCarlo, IndependentOfThreadCount) {
  SimulationConfig c = small_config();
  c.schedule = {{9, 18}, {18, 36}};
  c.estimators = {EstimatorKind::kTraditional, EstimatorKind::kBonaFide,
                  EstimatorKind::kOracleShrinkage};
  c.threads = 1;
  const MonteCarloReport serial = run_monte_carlo(c);
  for (unsigned t : {2u, 5u, 0u}) {
    c.threads = t;
    EXPECT_TRUE(identical(serial, run_monte_carlo(c))) << "threads=" << t;
  }
  c.redraw_sigma = true;
  c.threads = 1;
  const MonteCarloReport redraw_serial = run_monte_carlo(c);
  c.threads = 3;
  EXPECT_TRUE(identical(redraw_serial, run_monte_carlo(c)));
}

TEST(RunMonteCarlo, SeedChangesResults) {
  SimulationConfig c = small_config();
  const MonteCarloReport a = run_monte_carlo(c);
  c.seed = 43;
  EXPECT_FALSE(identical(a, run_monte_carlo(c)));
}

TEST(RunMonteCarlo, FixedSigmaHasConstantTargetLoss) {
  SimulationConfig c = small_config();
  const CellReport fixed = run_monte_carlo(c).cells.front();
  EXPECT_TRUE(std::all_of(fixed.target_loss.begin(), fixed.target_loss.end(),
                          [&](double v) { return v == fixed.target_loss.front(); }));
  c.redraw_sigma = true;
  const CellReport redrawn = run_monte_carlo(c).cells.front();
  EXPECT_NE(redrawn.target_loss.front(), redrawn.target_loss.back());
}

TEST(RunMonteCarlo, MeanReturnDoesNotChangeLosses) {
  SimulationConfig c = small_config();
  c.estimators = {EstimatorKind::kTraditional, EstimatorKind::kBonaFide};
  const MonteCarloReport zero = run_monte_carlo(c);
  c.mean_return = 0.37;
  const MonteCarloReport shifted = run_monte_carlo(c);
  for (std::size_t e = 0; e < 2; ++e) {
    const auto& a = zero.cells[0].estimators[e].loss;
    const auto& b = shifted.cells[0].estimators[e].loss;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(a[i], b[i], 1e-8 * std::max(1.0, a[i]));
    }
  }
}

TEST(RunMonteCarlo, TraditionalLossNearLimitAtHalf) {
  SimulationConfig c;
  c.c_target = 0.5;
  c.schedule = {{72, 144}};
  c.repetitions = 200;
  c.seed = 11;
  c.estimators = {EstimatorKind::kTraditional};
  c.threads = 0;
  EXPECT_NEAR(run_monte_carlo(c).cells[0].at(EstimatorKind::kTraditional).mean_loss(), 1.0, 0.15);
}

TEST(RunMonteCarlo, BonaFideTracksOracleAtNinetyPercent) {
  SimulationConfig c;
  c.c_target = 0.9;
  c.schedule = {{90, 100}};
  c.repetitions = 200;
  c.seed = 12;
  c.estimators = {EstimatorKind::kBonaFide, EstimatorKind::kOracleShrinkage,
                  EstimatorKind::kFrahmMemmel, EstimatorKind::kTraditional};
  c.threads = 0;
  const CellReport cell = run_monte_carlo(c).cells[0];
  const double bf = cell.at(EstimatorKind::kBonaFide).mean_loss();
  EXPECT_LE(std::abs(bf - cell.at(EstimatorKind::kOracleShrinkage).mean_loss()), 0.05);
  EXPECT_LE(bf, 0.5);
  EXPECT_LT(bf, cell.at(EstimatorKind::kFrahmMemmel).mean_loss());
  EXPECT_LT(cell.at(EstimatorKind::kFrahmMemmel).mean_loss(),
            cell.at(EstimatorKind::kTraditional).mean_loss());
}

TEST(RunMonteCarlo, BonaFideVarianceShrinksWithDimension) {
  SimulationConfig c;
  c.c_target = 0.5;
  c.schedule = {{18, 36}, {144, 288}};
  c.repetitions = 200;
  c.seed = 13;
  c.estimators = {EstimatorKind::kBonaFide};
  c.threads = 0;
  const MonteCarloReport r = run_monte_carlo(c);
  EXPECT_GT(sample_variance(r.cells[0].at(EstimatorKind::kBonaFide).loss),
            sample_variance(r.cells[1].at(EstimatorKind::kBonaFide).loss));
}

TEST(RunMonteCarlo, UnknownEstimatorLookupThrows) {
  const MonteCarloReport r = run_monte_carlo(small_config());
  EXPECT_THROW(r.cells[0].at(EstimatorKind::kFrahmMemmel), ConfigError);
  EXPECT_THROW(r.cell({9, 18}), ConfigError);
}

}  // namespace
}  // namespace gmvshrink::simulation
