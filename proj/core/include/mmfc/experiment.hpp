#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmfc/eval/rd_curve.hpp"
#include "mmfc/pipeline/features.hpp"
#include "mmfc/pipeline/fusion.hpp"
#include "mmfc/training/trainer.hpp"

namespace mmfc {

/// Everything a run depends on. Every field has a default; JSON configs may
/// set any subset, and unknown keys are rejected.
struct ExperimentConfig {
  std::uint64_t seed = 7;
  std::size_t train_size = 2000;
  std::size_t test_size = 500;
  pipeline::SceneConfig scene;
  pipeline::FeatureConfig features;

  std::size_t head_hidden = 32;
  std::size_t head_epochs = 30;
  double head_lr = 1e-3;

  std::size_t codec_epochs = 50;
  double codec_lr = 1e-3;
  std::size_t batch_size = 8;
  double distortion_scale = training::kDefaultDistortionScale;
  std::vector<double> lambda_grid{std::begin(training::kLambdaGrid), std::end(training::kLambdaGrid)};

  std::size_t timing_samples = 200;

  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
  /// Throws ConfigError naming the offending key.
  static ExperimentConfig from_json(const nlohmann::json& j);

  [[nodiscard]] pipeline::HeadConfig head_config() const;
  [[nodiscard]] training::TrainConfig head_train_config() const;
  [[nodiscard]] training::TrainConfig codec_train_config() const;
  [[nodiscard]] pipeline::FeatureGenerator generator() const;
};

enum class Split : std::uint8_t { kTrain = 0, kTest = 1 };

/// Seed of sample `index` of a split.
std::uint64_t sample_seed(std::uint64_t seed, Split split, std::size_t index);
std::vector<pipeline::SceneSample> make_split(const ExperimentConfig& cfg, Split split);

training::TrainingData make_training_data(const ExperimentConfig& cfg);
eval::TestSet make_test_set(const ExperimentConfig& cfg);

}  // namespace mmfc
