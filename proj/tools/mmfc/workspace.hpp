#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmfc/experiment.hpp"
#include "mmfc/feature_map.hpp"
#include "mmfc/pipeline/topology.hpp"

namespace mmfc::cli {

inline constexpr char kToolVersion[] = "0.1.0";

/// Run directory:
///   config.json, manifest.json
///   data/{train,test}.jsonl
///   models/*.ckpt, logs/*.csv, streams/*.mmfc, eval/*
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root) : root_(std::move(root)) {}

  [[nodiscard]] const std::filesystem::path& root() const { return root_; }
  [[nodiscard]] std::filesystem::path path(const std::string& rel) const { return root_ / rel; }
  [[nodiscard]] bool exists(const std::string& rel) const { return std::filesystem::exists(path(rel)); }

  /// Config snapshot written by gen-data; DependencyError when absent.
  [[nodiscard]] ExperimentConfig load_config() const;
  [[nodiscard]] std::vector<pipeline::SceneSample> load_split(Split split, const ExperimentConfig& cfg) const;

  void write_text(const std::string& rel, const std::string& text) const;
  /// Records the file's content hash in manifest.json.
  void record(const std::string& rel) const;
  void record(const std::vector<std::string>& rels) const;

  /// DependencyError naming `what` when the file is missing.
  void require(const std::string& rel, const std::string& what) const;

 private:
  std::filesystem::path root_;
};

std::string file_hash(const std::filesystem::path& path);

std::string scene_line(std::size_t index, const pipeline::SceneSample& s);
pipeline::SceneSample parse_scene_line(const std::string& line, const pipeline::SceneConfig& cfg);

// Relative paths of trained models and their logs.
std::string head_path();
std::string anf_path(pipeline::Topology t, std::size_t lambda_index);
std::string cond_path(pipeline::Topology t, int lambda_case, std::size_t lambda_index);
std::string log_path_for(const std::string& model_rel);

/// Index of `lambda` in the grid; ConfigError when absent.
std::size_t lambda_index(const ExperimentConfig& cfg, double lambda);

/// Raw feature map file: "MMFCFMAP" | modality u8 | rows u32 | dim u32 | f32 LE values.
void save_feature_map(const std::filesystem::path& path, const FeatureMap& map);
FeatureMap load_feature_map(const std::filesystem::path& path);

}  // namespace mmfc::cli
