#pragma once

#include <filesystem>

#include "mmfc/feature_map.hpp"
#include "mmfc/ndgrad/checkpoint.hpp"
#include "mmfc/ndgrad/layers.hpp"
#include "mmfc/pipeline/metrics.hpp"
#include "mmfc/pipeline/scene.hpp"

namespace mmfc::pipeline {

inline constexpr char kFusionLayer[] = "fusion";
inline constexpr char kHeadNet[] = "head";

struct HeadConfig {
  std::size_t rows = 64;
  std::size_t dim = 32;
  std::size_t hidden = 32;
  std::size_t grid = 8;
  std::size_t classes = 4;
};

/// Fusion surrogate z = leaky_relu([y1 | y2] W + b) with W of shape 2D x D,
/// followed by a per-row two-layer task head; logits of rows sharing a cell
/// are averaged before the softmax.
class FusionHead {
 public:
  static FusionHead create(const HeadConfig& cfg, std::uint64_t seed);

  [[nodiscard]] const HeadConfig& config() const { return cfg_; }
  [[nodiscard]] ndgrad::ParameterStore<float>& params() { return store_; }
  [[nodiscard]] const ndgrad::ParameterStore<float>& params() const { return store_; }
  [[nodiscard]] const ndgrad::Dense<float>& fusion() const { return fusion_; }
  [[nodiscard]] const ndgrad::Mlp<float>& head() const { return head_; }

  /// y1 is the camera map, y2 the lidar map.
  [[nodiscard]] FeatureMap fuse(const FeatureMap& camera, const FeatureMap& lidar) const;
  [[nodiscard]] TaskPrediction predict(const FeatureMap& fused) const;

  /// Averages row logits into cell logits: cell_of_row one-hot, {G*G, Q} / count.
  [[nodiscard]] ndgrad::Tensor<float> cell_pooling() const;

  [[nodiscard]] std::uint64_t checksum() const { return store_.checksum(); }
  [[nodiscard]] ndgrad::ParameterFile to_file() const;
  static FusionHead from_file(ndgrad::ParameterFile file);
  void save(const std::filesystem::path& path) const;
  static FusionHead load(const std::filesystem::path& path);

 private:
  FusionHead(const HeadConfig& cfg, ndgrad::ParameterStore<float> store);
  void build_graphs();

  HeadConfig cfg_;
  ndgrad::ParameterStore<float> store_;
  ndgrad::Dense<float> fusion_;
  ndgrad::Mlp<float> head_;
  ndgrad::Graph<float> fuse_graph_;
  ndgrad::Graph<float> head_graph_;
};

/// Row-wise softmax.
ndgrad::Tensor<float> softmax_rows(const ndgrad::Tensor<float>& logits);

inline TaskPrediction task_predict(const FeatureMap& z, const FusionHead& head) { return head.predict(z); }

}  // namespace mmfc::pipeline
