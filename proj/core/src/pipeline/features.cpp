#include "mmfc/pipeline/features.hpp"

#include <cmath>
#include <string>

#include "mmfc/error.hpp"
#include "mmfc/rng.hpp"

namespace mmfc::pipeline {

namespace {

enum Stream : std::uint64_t {
  kProjections = 0x9e0,
  kSharedNuisance = 0x5a1,
  kCameraNuisance = 0xca1,
  kLidarNuisance = 0x11d,
  kCameraNoise = 0xca2,
  kLidarNoise = 0x11e,
  kClutter = 0xc17,
  kCameraConfusion = 0xca3,
  kLidarConfusion = 0x11f,
};

std::size_t slot(Modality m) { return m == Modality::kCamera ? 0 : 1; }

}  // namespace

void FeatureConfig::validate(const SceneConfig& scene) const {
  if (rows == 0 || dim == 0) throw ConfigError("features: rows and dim must be positive");
  if (rows < scene.cells()) {
    throw ConfigError("features: rows (" + std::to_string(rows) + ") must cover all " +
                      std::to_string(scene.cells()) + " grid cells");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("features: rho must lie in [0, 1]");
  if (nuisance_rank == 0) throw ConfigError("features: nuisance_rank must be positive");
  for (double v : {camera_noise, lidar_noise, camera_confusion, lidar_confusion, nuisance_gain}) {
    if (!(v >= 0.0)) throw ConfigError("features: noise levels and gains must be nonnegative");
  }
}

FeatureGenerator::FeatureGenerator(const FeatureConfig& cfg, const SceneConfig& scene, std::uint64_t experiment_seed)
    : cfg_(cfg), scene_(scene) {
  scene_.validate();
  cfg_.validate(scene_);
  Rng rng(experiment_seed, kProjections);
  const std::size_t d = cfg_.dim;
  for (auto& e : class_embed_) {
    e = ndgrad::Tensor<double>({scene_.classes + 1, d});
    for (auto& v : e.values()) v = rng.normal();
  }
  for (auto& u : occupancy_dir_) {
    u = ndgrad::Tensor<double>({d});
    for (auto& v : u.values()) v = rng.normal();
  }
  nuisance_mix_ = ndgrad::Tensor<double>({cfg_.nuisance_rank, d});
  const double s = 1.0 / std::sqrt(static_cast<double>(cfg_.nuisance_rank));
  for (auto& v : nuisance_mix_.values()) v = s * rng.normal();
}

FeatureMap FeatureGenerator::features(const SceneSample& scene, Modality modality) const {
  if (modality == Modality::kFused) throw ConfigError("features: fused maps come from the fusion stage");
  if (scene.cells.size() != scene_.cells() || scene.classes != scene_.classes) {
    throw ShapeError("features: scene does not match the generator's grid");
  }
  const bool camera = modality == Modality::kCamera;
  const auto& embed = class_embed_[slot(modality)];
  const auto& occ = occupancy_dir_[slot(modality)];
  const double class_gain = camera ? cfg_.camera_class_gain : cfg_.lidar_class_gain;
  const double occ_gain = camera ? cfg_.camera_occupancy_gain : cfg_.lidar_occupancy_gain;
  const double noise = camera ? cfg_.camera_noise : cfg_.lidar_noise;
  const double confusion = camera ? cfg_.camera_confusion : cfg_.lidar_confusion;

  Rng shared(scene.seed, kSharedNuisance);
  Rng own(scene.seed, camera ? kCameraNuisance : kLidarNuisance);
  Rng eta(scene.seed, camera ? kCameraNoise : kLidarNoise);
  Rng clutter(scene.seed, kClutter);
  Rng confuse(scene.seed, camera ? kCameraConfusion : kLidarConfusion);

  const std::size_t d = cfg_.dim, k = cfg_.nuisance_rank;
  const double a = std::sqrt(cfg_.rho), b = std::sqrt(1.0 - cfg_.rho);
  std::vector<double> pre(d), mix(k), smooth(d);
  ndgrad::Tensor<float> out({cfg_.rows, d});
  for (std::size_t q = 0; q < cfg_.rows; ++q) {
    const std::uint8_t cls = scene.cells[q % scene_.cells()];
    // Draw clutter for every row so both modalities consume identical streams.
    const auto clutter_cls = 1 + clutter.below(scene_.classes);
    std::fill(pre.begin(), pre.end(), 0.0);
    if (cls != 0) {
      for (std::size_t j = 0; j < d; ++j) pre[j] += class_gain * embed.at(cls, j) + occ_gain * occ[j];
    } else if (camera) {
      for (std::size_t j = 0; j < d; ++j) pre[j] += cfg_.camera_clutter_gain * embed.at(clutter_cls, j);
    }
    // Confusion lives in the span of the class and occupancy directions.
    for (std::size_t c = 1; c <= scene_.classes; ++c) {
      const double e = confusion * confuse.normal();
      for (std::size_t j = 0; j < d; ++j) pre[j] += e * embed.at(c, j);
    }
    const double e = confusion * confuse.normal();
    for (std::size_t j = 0; j < d; ++j) pre[j] += e * occ[j];
    for (std::size_t i = 0; i < k; ++i) mix[i] = a * shared.normal() + b * own.normal();
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < d; ++j) pre[j] += cfg_.nuisance_gain * mix[i] * nuisance_mix_.at(i, j);
    }
    for (std::size_t j = 0; j < d; ++j) pre[j] += noise * eta.normal();
    if (camera && cfg_.camera_smoothing > 0) {
      const auto w = static_cast<std::ptrdiff_t>(cfg_.camera_smoothing);
      for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(d); ++j) {
        double acc = 0.0;
        int count = 0;
        for (std::ptrdiff_t t = j - w; t <= j + w; ++t) {
          if (t < 0 || t >= static_cast<std::ptrdiff_t>(d)) continue;
          acc += pre[static_cast<std::size_t>(t)];
          ++count;
        }
        smooth[static_cast<std::size_t>(j)] = acc / std::sqrt(static_cast<double>(count));
      }
      pre.swap(smooth);
    }
    for (std::size_t j = 0; j < d; ++j) out.at(q, j) = static_cast<float>(std::tanh(pre[j]));
  }
  return FeatureMap{std::move(out), modality};
}

double total_variation(const ndgrad::Tensor<float>& map) {
  const std::size_t cols = map.cols();
  if (cols < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t r = 0; r < map.rows(); ++r) {
    for (std::size_t c = 1; c < cols; ++c) acc += std::abs(map.at(r, c) - map.at(r, c - 1));
  }
  return acc / static_cast<double>(map.rows() * (cols - 1));
}

double pearson(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size() || a.empty()) throw ShapeError("pearson: length mismatch");
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

}  // namespace mmfc::pipeline
