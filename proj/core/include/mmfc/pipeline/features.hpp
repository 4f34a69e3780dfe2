#pragma once

#include <cstdint>
#include <span>

#include "mmfc/feature_map.hpp"
#include "mmfc/ndgrad/tensor.hpp"
#include "mmfc/pipeline/scene.hpp"

namespace mmfc::pipeline {

/// Synthetic backbone features. Row q describes cell q mod G^2. Before the
/// tanh, a modality's row is
///   class_gain * E_m[class] + occupancy_gain * u_m * occupied
///   + confusion * (sum_c e_c E_m[c] + e_0 u_m)
///   + nuisance_gain * (sqrt(rho) w + sqrt(1 - rho) v_m) M + noise * eta_m
/// where E_m, u_m, M are fixed random projections of the experiment, w is a
/// per-row latent shared by both modalities, v_m, e and eta_m are per-modality.
/// Empty camera cells show a random clutter class at clutter_gain. Camera rows
/// are then smoothed along D by a normalised moving sum of half-width
/// camera_smoothing.
struct FeatureConfig {
  std::size_t rows = 64;
  std::size_t dim = 32;
  double camera_class_gain = 1.0;
  double camera_occupancy_gain = 0.2;
  double camera_clutter_gain = 0.8;
  double camera_noise = 0.05;
  double camera_confusion = 0.33;
  std::size_t camera_smoothing = 1;
  double lidar_class_gain = 0.25;
  double lidar_occupancy_gain = 1.0;
  double lidar_noise = 0.05;
  double lidar_confusion = 0.33;
  double nuisance_gain = 0.4;
  std::size_t nuisance_rank = 2;
  double rho = 0.5;

  void validate(const SceneConfig& scene) const;
};

class FeatureGenerator {
 public:
  FeatureGenerator(const FeatureConfig& cfg, const SceneConfig& scene, std::uint64_t experiment_seed);

  [[nodiscard]] FeatureMap features(const SceneSample& scene, Modality modality) const;
  [[nodiscard]] const FeatureConfig& config() const { return cfg_; }
  [[nodiscard]] const SceneConfig& scene_config() const { return scene_; }

 private:
  FeatureConfig cfg_;
  SceneConfig scene_;
  ndgrad::Tensor<double> class_embed_[2];  // (C + 1) x D, row 0 unused
  ndgrad::Tensor<double> occupancy_dir_[2];  // D
  ndgrad::Tensor<double> nuisance_mix_;  // k x D
};

/// modality_features(scene, modality, generator)
inline FeatureMap modality_features(const SceneSample& scene, Modality modality, const FeatureGenerator& gen) {
  return gen.features(scene, modality);
}

/// Mean absolute difference between neighbouring columns.
double total_variation(const ndgrad::Tensor<float>& map);

/// Sample Pearson correlation over all element pairs.
double pearson(std::span<const float> a, std::span<const float> b);

}  // namespace mmfc::pipeline
