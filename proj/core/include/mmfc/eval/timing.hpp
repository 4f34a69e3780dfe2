#pragma once

#include <string>
#include <string_view>

#include "mmfc/pipeline/topology.hpp"

namespace mmfc::eval {

enum class UseCase { kOnBoard, kEdgeCloud };
std::string_view use_case_name(UseCase u);

/// Models needed to run one topology.
struct TopologyModels {
  const pipeline::FusionHead* head = nullptr;
  const codec::AnfCodec* first = nullptr;         // fused codec (A1) or predictor codec
  const codec::CondCodec* conditional = nullptr;  // A2/A3 only
};

struct TimingReport {
  pipeline::Topology topology = pipeline::Topology::kA1;
  UseCase use_case = UseCase::kOnBoard;
  std::size_t samples = 0;
  double mean_seconds = 0.0;
  double stddev_seconds = 0.0;
  std::string hardware;
};

/// Wall-clock per sample of the work done on the vehicle.
///   on-board:   feature generation + encode + decode + fusion + task head
///   edge-cloud: feature generation + encode only; fusion precedes the single
///               encoder in A1, and A2/A3 also decode the predictor on board
///               because the conditional encoder needs it.
/// n = 0 yields an empty report.
TimingReport timing_bench(pipeline::Topology topology, UseCase use_case, const TopologyModels& models,
                          const pipeline::FeatureGenerator& gen, const pipeline::SceneConfig& scene_cfg,
                          std::size_t n, std::uint64_t seed);

/// CPU model and thread count, best effort.
std::string hardware_descriptor();

}  // namespace mmfc::eval
