#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mmfc/training/trainer.hpp"

namespace mmfc::training {

/// All models of one topology/case across the lambda grid.
struct SweepResult {
  pipeline::Topology topology = pipeline::Topology::kA1;
  int lambda_case = 1;
  std::vector<double> lambdas;
  /// A1: one fused codec per lambda. A2/A3: predictor codecs; case 1 holds
  /// exactly one (smallest lambda) shared by every conditional codec.
  std::vector<codec::AnfCodec> predictors;
  std::vector<codec::CondCodec> conditionals;
  /// Empty for predictors taken from SweepOptions::predictor_cache.
  std::vector<TrainLog> predictor_logs;
  std::vector<TrainLog> conditional_logs;

  [[nodiscard]] const codec::AnfCodec& predictor_for(std::size_t lambda_index) const;
};

struct SweepOptions {
  std::vector<double> grid{std::begin(kLambdaGrid), std::end(kLambdaGrid)};
  std::size_t jobs = 1;
  /// Reuse already trained predictors (by lambda index) instead of training them.
  std::function<const codec::AnfCodec*(Modality, std::size_t)> predictor_cache;
};

/// Trains the codecs of a topology over the grid. `base` supplies epochs, lr,
/// batch, seed and distortion scale; the stage and lambda are set per model.
SweepResult sweep(const TrainConfig& base, const TrainingData& data, const pipeline::FusionHead& head,
                  pipeline::Topology topology, int lambda_case, const SweepOptions& options = {});

}  // namespace mmfc::training
