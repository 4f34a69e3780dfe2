#include "mmfc/pipeline/topology.hpp"

#include <string>

namespace mmfc::pipeline {

std::string_view topology_name(Topology t) {
  switch (t) {
    case Topology::kA1: return "a1";
    case Topology::kA2: return "a2";
    case Topology::kA3: return "a3";
  }
  return "?";
}

Topology parse_topology(std::string_view name) {
  if (name == "a1") return Topology::kA1;
  if (name == "a2") return Topology::kA2;
  if (name == "a3") return Topology::kA3;
  throw ConfigError("unknown topology '" + std::string(name) + "' (expected a1, a2 or a3)");
}

SceneFeatures scene_features(const SceneSample& scene, const FeatureGenerator& gen) {
  return {gen.features(scene, Modality::kCamera), gen.features(scene, Modality::kLidar)};
}

TopologyResult run_approach1(const SceneFeatures& y, const FusionHead& head, const codec::AnfCodec& fused_codec,
                             std::uint8_t lambda_index) {
  TopologyResult res;
  const auto z = head.fuse(y.camera, y.lidar);
  res.streams.push_back(fused_codec.compress(z, {1, lambda_index}));
  const auto z_hat = fused_codec.decompress(res.streams.back());
  res.prediction = head.predict(z_hat);
  res.rate_bits = res.streams.back().size_bits();
  res.distortion = ndgrad::mean_squared_error(z.values, z_hat.values);
  return res;
}

namespace {

TopologyResult run_pair(std::uint8_t approach, const FeatureMap& first, const FeatureMap& second,
                        bool camera_first, const FusionHead& head, const codec::AnfCodec& predictor,
                        const codec::CondCodec& conditional, std::uint8_t lambda_index) {
  TopologyResult res;
  res.streams.push_back(predictor.compress(first, {approach, lambda_index}));
  const auto first_hat = predictor.decompress(res.streams.back());
  res.streams.push_back(conditional.compress(second, first_hat, {approach, lambda_index}));
  const auto second_hat = conditional.decompress(res.streams.back(), first_hat);
  const auto z_hat = camera_first ? head.fuse(first_hat, second_hat) : head.fuse(second_hat, first_hat);
  res.prediction = head.predict(z_hat);
  res.rate_bits = res.streams[0].size_bits() + res.streams[1].size_bits();
  res.distortion = 0.5 * (ndgrad::mean_squared_error(first.values, first_hat.values) +
                          ndgrad::mean_squared_error(second.values, second_hat.values));
  return res;
}

}  // namespace

TopologyResult run_approach2(const SceneFeatures& y, const FusionHead& head, const codec::AnfCodec& camera_codec,
                             const codec::CondCodec& lidar_codec, std::uint8_t lambda_index) {
  return run_pair(2, y.camera, y.lidar, true, head, camera_codec, lidar_codec, lambda_index);
}

TopologyResult run_approach3(const SceneFeatures& y, const FusionHead& head, const codec::AnfCodec& lidar_codec,
                             const codec::CondCodec& camera_codec, std::uint8_t lambda_index) {
  return run_pair(3, y.lidar, y.camera, false, head, lidar_codec, camera_codec, lambda_index);
}

TaskPrediction run_uncompressed(const SceneFeatures& y, const FusionHead& head) {
  return head.predict(head.fuse(y.camera, y.lidar));
}

}  // namespace mmfc::pipeline
