#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mmfc/codec/anf_codec.hpp"
#include "mmfc/codec/cond_codec.hpp"
#include "mmfc/pipeline/fusion.hpp"
#include "mmfc/pipeline/topology.hpp"

namespace mmfc::training {

/// Lambda grid used for every codec sweep.
inline constexpr double kLambdaGrid[] = {0.0078125, 0.015625, 0.03125, 0.0625};
inline constexpr std::size_t kGridSize = 4;
/// Default distortion weight. Training divides MSE by the mean power of the
/// training targets, so this multiplies a relative squared error.
inline constexpr double kDefaultDistortionScale = 300.0;
/// Learning-rate multiplier of the condition-independent prior parameters.
/// Adam moves each of them by about lr per step, and they have to travel
/// several units from their initial values.
inline constexpr double kPriorLrScale = 10.0;

enum class Stage { kTaskHead, kAnf, kCond };
std::string_view stage_name(Stage s);
Stage parse_stage(std::string_view name);

struct TrainConfig {
  Stage stage = Stage::kAnf;
  double lambda = 0.0625;
  std::size_t epochs = 50;
  double lr = 1e-3;
  std::size_t batch_size = 8;
  std::uint64_t seed = 1;
  /// 1: conditional codecs use the predictor trained at the smallest lambda;
  /// 2: the predictor trained at the same lambda.
  int lambda_case = 1;
  double distortion_scale = kDefaultDistortionScale;

  /// lr == 0 is allowed and means "no optimizer steps".
  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double rate_bits = 0.0;  // mean rate estimate per sample (noise surrogate)
  double mse = 0.0;        // mean MSE of the reconstruction, unscaled
  double loss = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;

  [[nodiscard]] std::string to_csv() const;
  void save_csv(const std::filesystem::path& path) const;
};

template <typename Model>
struct Trained {
  Model model;
  TrainLog log;
};

/// Training inputs: backbone features of the training scenes.
struct TrainingData {
  std::vector<pipeline::SceneSample> scenes;
  std::vector<pipeline::SceneFeatures> features;

  static TrainingData build(std::vector<pipeline::SceneSample> scenes, const pipeline::FeatureGenerator& gen);
  [[nodiscard]] std::size_t size() const { return scenes.size(); }
};

/// Fusion + task head trained jointly with softmax cross-entropy at zero
/// compression.
Trained<pipeline::FusionHead> train_task_head(const TrainConfig& cfg, const TrainingData& data,
                                              const pipeline::HeadConfig& head_cfg);

/// Unconditional codec for one map per sample (camera, lidar, or fused through
/// the frozen head). Fused maps need `head`; throws ConfigError otherwise.
Trained<codec::AnfCodec> train_anf(const TrainConfig& cfg, const TrainingData& data, Modality modality,
                                   const pipeline::FusionHead* head);

/// Conditional codec for `target` given the other modality decoded by
/// `predictor`. Throws ConfigError when the predictor is missing or codes the
/// wrong modality.
Trained<codec::CondCodec> train_cond(const TrainConfig& cfg, const TrainingData& data, Modality target,
                                     const codec::AnfCodec* predictor);

/// Lower-level entry points on explicit per-sample maps.
Trained<codec::AnfCodec> train_anf_on(const TrainConfig& cfg, const std::vector<ndgrad::Tensor<float>>& maps,
                                      const codec::CodecConfig& codec_cfg);
Trained<codec::CondCodec> train_cond_on(const TrainConfig& cfg, const std::vector<ndgrad::Tensor<float>>& maps,
                                        const std::vector<ndgrad::Tensor<float>>& conds,
                                        const codec::CodecConfig& codec_cfg);

/// Seed of the codec trained at a grid position, shared by all codecs at that
/// position so conditional and unconditional runs start identically.
std::uint64_t lambda_seed(std::uint64_t base, std::size_t lambda_index);

}  // namespace mmfc::training
