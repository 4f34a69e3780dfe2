#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mmfc/codec/anf_codec.hpp"
#include "mmfc/codec/cond_codec.hpp"
#include "mmfc/pipeline/features.hpp"
#include "mmfc/pipeline/fusion.hpp"

namespace mmfc::pipeline {

enum class Topology : std::uint8_t { kA1 = 1, kA2 = 2, kA3 = 3 };

std::string_view topology_name(Topology t);
Topology parse_topology(std::string_view name);

/// Backbone outputs of one scene.
struct SceneFeatures {
  FeatureMap camera;
  FeatureMap lidar;
};

SceneFeatures scene_features(const SceneSample& scene, const FeatureGenerator& gen);

struct TopologyResult {
  std::vector<entropy::Bitstream> streams;
  TaskPrediction prediction;
  /// Sum of full stream file sizes in bits.
  std::uint64_t rate_bits = 0;
  /// MSE of the coded map(s), averaged over the streams.
  double distortion = 0.0;
};

/// Fused map coded by one unconditional codec.
TopologyResult run_approach1(const SceneFeatures& y, const FusionHead& head, const codec::AnfCodec& fused_codec,
                             std::uint8_t lambda_index = 0);

/// Camera coded first, lidar conditionally on the decoded camera map.
TopologyResult run_approach2(const SceneFeatures& y, const FusionHead& head, const codec::AnfCodec& camera_codec,
                             const codec::CondCodec& lidar_codec, std::uint8_t lambda_index = 0);

/// Lidar coded first, camera conditionally on the decoded lidar map.
TopologyResult run_approach3(const SceneFeatures& y, const FusionHead& head, const codec::AnfCodec& lidar_codec,
                             const codec::CondCodec& camera_codec, std::uint8_t lambda_index = 0);

/// No compression: fuse and predict.
TaskPrediction run_uncompressed(const SceneFeatures& y, const FusionHead& head);

}  // namespace mmfc::pipeline
