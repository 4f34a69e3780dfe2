#include <gtest/gtest.h>

#include <cmath>

#include "mmfc/error.hpp"
#include "mmfc/eval/rd_curve.hpp"
#include "mmfc/eval/timing.hpp"
#include "mmfc/experiment.hpp"

namespace mmfc::eval {
namespace {

// rate = a * 2^(q / 10) over q in [lo, lo + 12].
RDCurve exponential_curve(const std::string& label, double a, double lo = 30.0) {
  RDCurve c{label, {}};
  for (int i = 0; i < 4; ++i) {
    RDPoint p;
    p.quality = lo + 4.0 * i;
    p.rate_bits = a * std::pow(2.0, p.quality / 10.0);
    c.points.push_back(p);
  }
  return c;
}

TEST(BdRate, IdenticalCurvesGiveZero) {
  const auto c = exponential_curve("x", 100.0);
  EXPECT_EQ(bd_rate(c, c), 0.0);
}

TEST(BdRate, HalvedRatesGiveMinusFifty) {
  const auto anchor = exponential_curve("anchor", 100.0);
  const auto test = exponential_curve("test", 50.0);
  EXPECT_NEAR(bd_rate(anchor, test), -50.0, 0.1);
}

TEST(BdRate, ConstantRatioGivesPlusTwenty) {
  const auto anchor = exponential_curve("anchor", 100.0);
  const auto test = exponential_curve("test", 120.0, 31.0);
  EXPECT_NEAR(bd_rate(anchor, test), 20.0, 0.5);
}

TEST(BdRate, AntiSymmetricInLogDomain) {
  const auto a = exponential_curve("a", 100.0);
  const auto b = exponential_curve("b", 137.0, 29.0);
  const double ab = bd_rate(a, b), ba = bd_rate(b, a);
  EXPECT_NEAR((1 + ab / 100) * (1 + ba / 100), 1.0, 0.005);
}

TEST(BdRate, PointOrderDoesNotMatter) {
  const auto a = exponential_curve("a", 100.0);
  auto b = exponential_curve("b", 80.0);
  std::swap(b.points[0], b.points[3]);
  EXPECT_NEAR(bd_rate(a, b), -20.0, 0.1);
}

TEST(BdRate, NonMonotoneQualityRejected) {
  const auto a = exponential_curve("a", 100.0);
  auto b = exponential_curve("b", 100.0);
  b.points[2].quality = b.points[1].quality - 1.0;
  EXPECT_THROW(bd_rate(a, b), ConfigError);
}

TEST(BdRate, DisjointQualityRejected) {
  const auto a = exponential_curve("a", 100.0, 10.0);
  const auto b = exponential_curve("b", 100.0, 50.0);
  EXPECT_THROW(bd_rate(a, b), ConfigError);
}

TEST(BdRate, TooFewPointsRejected) {
  auto a = exponential_curve("a", 100.0);
  a.points.resize(1);
  EXPECT_THROW(bd_rate(a, a), ConfigError);
}

TEST(CompareTopologies, AnchorRowIsZeroAndReferencesPresent) {
  std::vector<RDCurve> curves{exponential_curve("a2_case1", 100.0), exponential_curve("a1", 40.0)};
  const auto report = compare_topologies(curves);
  ASSERT_EQ(report.rows.size(), 4u);
  EXPECT_EQ(report.anchor, "a2_case1");
  EXPECT_EQ(report.rows[0].bd_rate, 0.0);
  EXPECT_NEAR(*report.rows[1].bd_rate, -60.0, 0.1);
  EXPECT_DOUBLE_EQ(*report.rows[1].full_scale_reference, -67.7);
  EXPECT_DOUBLE_EQ(*report.rows[2].full_scale_reference, -50.4);
  EXPECT_DOUBLE_EQ(*report.rows[3].full_scale_reference, -47.6);
  EXPECT_FALSE(report.rows[2].bd_rate.has_value());
  EXPECT_EQ(report.rows[2].note, "absent");
  const auto table = report.to_table();
  EXPECT_NE(table.find("-67.7"), std::string::npos);
  EXPECT_NE(table.find("a3_case1"), std::string::npos);
}

TEST(RdCurve, LabelsAndCsv) {
  using pipeline::Topology;
  EXPECT_EQ(curve_label(Topology::kA1, 1), "a1");
  EXPECT_EQ(curve_label(Topology::kA2, 2), "a2_case2");
  EXPECT_EQ(curve_label(Topology::kA3, 1), "a3_case1");
  auto c = exponential_curve("a1", 1.0);
  std::swap(c.points[0], c.points[2]);
  const auto sorted = c.sorted();
  for (std::size_t i = 1; i < sorted.size(); ++i) EXPECT_LT(sorted[i - 1].rate_bits, sorted[i].rate_bits);
  const auto csv = c.to_csv();
  EXPECT_EQ(csv.rfind("topology,case,lambda,rate_bits,rate_kbytes,map_percent,mse\n", 0), 0u);
}

TEST(Timing, ZeroSamplesGiveEmptyReport) {
  ExperimentConfig cfg;
  const auto gen = cfg.generator();
  const auto r = timing_bench(pipeline::Topology::kA1, UseCase::kOnBoard, {}, gen, cfg.scene, 0, 1);
  EXPECT_EQ(r.samples, 0u);
  EXPECT_EQ(r.mean_seconds, 0.0);
  EXPECT_FALSE(std::isnan(r.stddev_seconds));
}

TEST(Timing, MissingModelsRejected) {
  ExperimentConfig cfg;
  const auto gen = cfg.generator();
  EXPECT_THROW(timing_bench(pipeline::Topology::kA2, UseCase::kEdgeCloud, {}, gen, cfg.scene, 3, 1),
               DependencyError);
}

}  // namespace
}  // namespace mmfc::eval

namespace mmfc {
namespace {

TEST(ExperimentConfig, JsonRoundTrip) {
  ExperimentConfig cfg;
  cfg.seed = 99;
  cfg.features.rho = 0.9;
  cfg.lambda_grid = {0.01, 0.02, 0.04, 0.08};
  const auto back = ExperimentConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), cfg.to_json());
  EXPECT_EQ(back.seed, 99u);
  EXPECT_DOUBLE_EQ(back.features.rho, 0.9);
}

TEST(ExperimentConfig, UnknownKeysRejected) {
  EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json{{"sede", 1}}), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json{{"codec", {{"epoch", 3}}}}), ConfigError);
  try {
    ExperimentConfig::from_json(nlohmann::json{{"features", {{"rhoo", 0.1}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("features.rhoo"), std::string::npos);
  }
}

TEST(ExperimentConfig, PartialConfigKeepsDefaults) {
  const auto cfg = ExperimentConfig::from_json(nlohmann::json{{"train_size", 12}});
  EXPECT_EQ(cfg.train_size, 12u);
  EXPECT_EQ(cfg.test_size, ExperimentConfig{}.test_size);
}

TEST(ExperimentConfig, SplitsAreDisjointAndStable) {
  ExperimentConfig cfg;
  cfg.train_size = 20;
  cfg.test_size = 20;
  const auto train = make_split(cfg, Split::kTrain);
  const auto test = make_split(cfg, Split::kTest);
  ASSERT_EQ(train.size(), 20u);
  for (const auto& a : train) {
    for (const auto& b : test) EXPECT_NE(a.seed, b.seed);
  }
  EXPECT_EQ(make_split(cfg, Split::kTrain), train);
}

}  // namespace
}  // namespace mmfc
