#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmfc/error.hpp"
#include "mmfc/pipeline/features.hpp"
#include "mmfc/pipeline/fusion.hpp"
#include "mmfc/pipeline/information.hpp"
#include "mmfc/pipeline/metrics.hpp"
#include "mmfc/pipeline/scene.hpp"
#include "mmfc/rng.hpp"

namespace mmfc::pipeline {
namespace {

TEST(Scene, MeanObjectCountMatchesDensity) {
  SceneConfig cfg;
  double total = 0.0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) total += static_cast<double>(generate_scene(1000 + i, cfg).object_count());
  EXPECT_NEAR(total / n, 16.0, 0.5);
}

TEST(Scene, SameSeedSameScene) {
  SceneConfig cfg;
  EXPECT_EQ(generate_scene(5, cfg), generate_scene(5, cfg));
  EXPECT_NE(generate_scene(5, cfg).cells, generate_scene(6, cfg).cells);
}

TEST(Scene, ClassesInRange) {
  SceneConfig cfg;
  cfg.classes = 3;
  for (int i = 0; i < 50; ++i) {
    for (auto c : generate_scene(i, cfg).cells) EXPECT_LE(c, 3);
  }
}

TEST(Scene, DensityOutsideUnitIntervalRejected) {
  SceneConfig cfg;
  cfg.density = 1.0;
  EXPECT_THROW(generate_scene(1, cfg), ConfigError);
  cfg.density = -0.1;
  EXPECT_THROW(generate_scene(1, cfg), ConfigError);
}

double mean_cross_correlation(double rho) {
  // No scene content: the only link between the modalities is the shared nuisance.
  FeatureConfig f;
  f.camera_class_gain = f.camera_occupancy_gain = f.camera_clutter_gain = 0.0;
  f.lidar_class_gain = f.lidar_occupancy_gain = 0.0;
  f.camera_confusion = f.lidar_confusion = 0.0;
  f.camera_smoothing = 0;
  f.rho = rho;
  SceneConfig s;
  FeatureGenerator gen(f, s, 3);
  std::vector<float> cam, lid;
  for (int i = 0; i < 1000; ++i) {
    const auto scene = generate_scene(i, s);
    const auto c = gen.features(scene, Modality::kCamera);
    const auto l = gen.features(scene, Modality::kLidar);
    cam.insert(cam.end(), c.values.values().begin(), c.values.values().end());
    lid.insert(lid.end(), l.values.values().begin(), l.values.values().end());
  }
  return pearson(cam, lid);
}

TEST(Features, CrossCorrelationGrowsWithSharedWeight) {
  const double r0 = mean_cross_correlation(0.0);
  const double r5 = mean_cross_correlation(0.5);
  const double r9 = mean_cross_correlation(0.9);
  EXPECT_NEAR(r0, 0.0, 0.01);
  EXPECT_LT(r0, r5);
  EXPECT_LT(r5, r9);
}

TEST(Features, CameraIsSmootherThanLidar) {
  FeatureConfig f;
  SceneConfig s;
  FeatureGenerator gen(f, s, 11);
  double cam = 0.0, lid = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto scene = generate_scene(i, s);
    cam += total_variation(gen.features(scene, Modality::kCamera).values);
    lid += total_variation(gen.features(scene, Modality::kLidar).values);
  }
  EXPECT_LT(cam, lid);
}

TEST(Features, DeterministicAndBounded) {
  FeatureConfig f;
  SceneConfig s;
  FeatureGenerator a(f, s, 4), b(f, s, 4);
  const auto scene = generate_scene(9, s);
  const auto x = a.features(scene, Modality::kLidar);
  EXPECT_EQ(x.values, b.features(scene, Modality::kLidar).values);
  EXPECT_EQ(x.rows(), f.rows);
  EXPECT_EQ(x.dim(), f.dim);
  for (float v : x.values.values()) {
    EXPECT_GT(v, -1.f);
    EXPECT_LT(v, 1.f);
  }
}

TEST(Features, FusedModalityAndBadGeometryRejected) {
  FeatureConfig f;
  SceneConfig s;
  FeatureGenerator gen(f, s, 4);
  const auto scene = generate_scene(1, s);
  EXPECT_THROW((void)gen.features(scene, Modality::kFused), ConfigError);
  SceneConfig other;
  other.grid = 4;
  EXPECT_THROW((void)gen.features(generate_scene(1, other), Modality::kCamera), ShapeError);
  f.rows = 10;
  EXPECT_THROW(FeatureGenerator(f, s, 4), ConfigError);
}

TEST(Pearson, KnownValues) {
  const std::vector<float> a{1, 2, 3, 4};
  const std::vector<float> b{2, 4, 6, 8};
  const std::vector<float> c{4, 3, 2, 1};
  EXPECT_NEAR(pearson(a, b), 1.0, 1e-12);
  EXPECT_NEAR(pearson(a, c), -1.0, 1e-12);
}

FeatureMap ramp(std::size_t rows, std::size_t dim, float offset, Modality m) {
  ndgrad::Tensor<float> t({rows, dim});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = offset + 0.01f * static_cast<float>(i % 97) - 0.4f;
  return FeatureMap{std::move(t), m};
}

TEST(Fusion, ProjectionWeightsPassCameraThroughLeakyRelu) {
  HeadConfig cfg;
  auto head = FusionHead::create(cfg, 1);
  auto& w = *head.fusion().weight;
  w.value.fill(0.f);
  for (std::size_t j = 0; j < cfg.dim; ++j) w.value.at(j, j) = 1.f;
  head.fusion().bias->value.fill(0.f);
  const auto cam = ramp(cfg.rows, cfg.dim, 0.f, Modality::kCamera);
  const auto lid = ramp(cfg.rows, cfg.dim, 0.3f, Modality::kLidar);
  const auto z = head.fuse(cam, lid);
  EXPECT_EQ(z.modality, Modality::kFused);
  for (std::size_t i = 0; i < z.values.size(); ++i) {
    const float x = cam.values[i];
    EXPECT_NEAR(z.values[i], x > 0 ? x : 0.1f * x, 1e-6);
  }
}

TEST(Fusion, ZeroHeadGivesUniformScores) {
  HeadConfig cfg;
  auto head = FusionHead::create(cfg, 2);
  for (auto* p : head.params().all()) p->value.fill(0.f);
  const auto z = ramp(cfg.rows, cfg.dim, 0.f, Modality::kFused);
  const auto pred = head.predict(z);
  ASSERT_EQ(pred.scores.shape(), (ndgrad::Shape{cfg.grid * cfg.grid, cfg.classes + 1}));
  for (float v : pred.scores.values()) EXPECT_NEAR(v, 1.0 / (cfg.classes + 1), 1e-6);
}

TEST(Fusion, MismatchedModalitiesRejected) {
  HeadConfig cfg;
  auto head = FusionHead::create(cfg, 2);
  const auto cam = ramp(cfg.rows, cfg.dim, 0.f, Modality::kCamera);
  EXPECT_THROW((void)head.fuse(cam, cam), ConfigError);
  const auto small = ramp(cfg.rows, cfg.dim / 2, 0.f, Modality::kLidar);
  EXPECT_THROW((void)head.fuse(cam, small), ShapeError);
}

TEST(Fusion, PoolingAveragesRowsOfACell) {
  HeadConfig cfg;
  cfg.rows = 2 * cfg.grid * cfg.grid;
  auto head = FusionHead::create(cfg, 3);
  const auto pool = head.cell_pooling();
  for (std::size_t c = 0; c < cfg.grid * cfg.grid; ++c) {
    double sum = 0.0;
    for (std::size_t q = 0; q < cfg.rows; ++q) sum += pool.at(c, q);
    EXPECT_NEAR(sum, 1.0, 1e-6);
    EXPECT_FLOAT_EQ(pool.at(c, c), 0.5f);
    EXPECT_FLOAT_EQ(pool.at(c, c + cfg.grid * cfg.grid), 0.5f);
  }
}

TEST(AveragePrecision, HandComputedRanking) {
  // Ranked: + - + - ; precision at hits 1 and 2/3, AP = (1 + 2/3) / 2.
  const std::vector<double> s{0.9, 0.8, 0.7, 0.6};
  const std::vector<std::uint8_t> y{1, 0, 1, 0};
  EXPECT_NEAR(average_precision(s, y), (1.0 + 2.0 / 3.0) / 2.0, 1e-12);
}

TEST(AveragePrecision, PerfectAndNoPositives) {
  const std::vector<double> s{0.1, 0.9, 0.3};
  EXPECT_DOUBLE_EQ(average_precision(s, std::vector<std::uint8_t>{0, 1, 0}), 1.0);
  EXPECT_TRUE(std::isnan(average_precision(s, std::vector<std::uint8_t>{0, 0, 0})));
}

TEST(AveragePrecision, TiesDoNotDependOnOrder) {
  const std::vector<double> s{0.5, 0.5, 0.5, 0.2};
  const double a = average_precision(s, std::vector<std::uint8_t>{1, 0, 0, 1});
  const double b = average_precision(s, std::vector<std::uint8_t>{0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(a, b);
  // Points (recall 1/2, precision 1/3) and (1, 1/2); the envelope lifts the
  // first to 1/2.
  EXPECT_NEAR(a, 0.5, 1e-12);
}

TEST(AveragePrecision, AllTiedEqualsPrevalence) {
  const std::vector<double> s(10, 0.3);
  std::vector<std::uint8_t> y(10, 0);
  y[2] = y[7] = y[8] = 1;
  EXPECT_NEAR(average_precision(s, y), 0.3, 1e-12);
}

TEST(MeanAveragePrecision, OneHotTruthScoresHundred) {
  SceneConfig cfg;
  std::vector<SceneSample> scenes;
  std::vector<TaskPrediction> preds;
  for (int i = 0; i < 5; ++i) {
    scenes.push_back(generate_scene(i, cfg));
    TaskPrediction p{ndgrad::Tensor<float>({cfg.cells(), cfg.classes + 1})};
    for (std::size_t c = 0; c < cfg.cells(); ++c) p.scores.at(c, scenes.back().cells[c]) = 1.f;
    preds.push_back(std::move(p));
  }
  const auto m = mean_average_precision(preds, scenes);
  EXPECT_DOUBLE_EQ(m.map_percent, 100.0);
  ASSERT_EQ(m.class_ap.size(), cfg.classes);
}

TEST(MeanAveragePrecision, AbsentClassExcluded) {
  SceneSample s{2, 2, {1, 0, 1, 0}, 0};
  TaskPrediction p{ndgrad::Tensor<float>({4, 3})};
  for (std::size_t c = 0; c < 4; ++c) p.scores.at(c, s.cells[c]) = 1.f;
  const auto m = mean_average_precision(std::vector<TaskPrediction>{p}, std::vector<SceneSample>{s});
  EXPECT_FALSE(m.class_present[1]);
  EXPECT_TRUE(std::isnan(m.class_ap[1]));
  EXPECT_DOUBLE_EQ(m.map_percent, 100.0);
}

TEST(MeanAveragePrecision, CountMismatchRejected) {
  SceneConfig cfg;
  std::vector<SceneSample> scenes{generate_scene(1, cfg)};
  EXPECT_THROW(mean_average_precision(std::vector<TaskPrediction>{}, scenes), ShapeError);
}

TEST(Information, GaussianMutualInformation) {
  EXPECT_DOUBLE_EQ(gaussian_mi(0.0), 0.0);
  EXPECT_NEAR(gaussian_mi(0.5), 0.2075, 5e-5);
  EXPECT_DOUBLE_EQ(gaussian_mi(-0.5), gaussian_mi(0.5));
  EXPECT_THROW(gaussian_mi(1.0), ConfigError);
  EXPECT_THROW(gaussian_mi(-1.0), ConfigError);
}

TEST(Information, ChainLosesInformation) {
  const auto r = dpi_diagnostic({1, 0.9, 0.9, 1.0});
  EXPECT_NEAR(r.chain_rho, 0.81, 1e-12);
  EXPECT_NEAR(r.i_x_y1, -0.5 * std::log2(1 - 0.81), 1e-12);
  EXPECT_NEAR(r.i_x_y2, -0.5 * std::log2(1 - 0.81 * 0.81), 1e-12);
  EXPECT_TRUE(r.inequality_holds);
  EXPECT_FALSE(r.equality);
}

TEST(Information, LosslessSecondStageIsEquality) {
  const auto r = dpi_diagnostic({3, 0.7, 1.0, 0.5});
  EXPECT_DOUBLE_EQ(r.i_x_y1, r.i_x_y2);
  EXPECT_TRUE(r.equality);
  EXPECT_DOUBLE_EQ(r.beta, 0.5);
}

TEST(Information, InvalidChainRejected) {
  EXPECT_THROW(dpi_diagnostic({1, 1.0, 0.5, 1.0}), ConfigError);
  EXPECT_THROW(dpi_diagnostic({1, 0.5, 1.5, 1.0}), ConfigError);
  EXPECT_THROW(dpi_diagnostic({0, 0.5, 0.5, 1.0}), ConfigError);
}

}  // namespace
}  // namespace mmfc::pipeline
