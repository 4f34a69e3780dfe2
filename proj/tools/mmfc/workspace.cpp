#include "workspace.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "mmfc/bytes.hpp"
#include "mmfc/error.hpp"
#include "mmfc/hash.hpp"
#include "mmfc/ndgrad/checkpoint.hpp"

namespace mmfc::cli {

namespace {

constexpr char kMapMagic[] = "MMFCFMAP";

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string split_file(Split split) { return split == Split::kTrain ? "data/train.jsonl" : "data/test.jsonl"; }

}  // namespace

ExperimentConfig Workspace::load_config() const {
  require("config.json", "run config (run gen-data first)");
  auto cfg = ExperimentConfig::from_json(read_json(path("config.json")));
  cfg.validate();
  return cfg;
}

std::vector<pipeline::SceneSample> Workspace::load_split(Split split, const ExperimentConfig& cfg) const {
  const auto rel = split_file(split);
  require(rel, "dataset split (run gen-data first)");
  std::ifstream in(path(rel));
  std::vector<pipeline::SceneSample> scenes;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) scenes.push_back(parse_scene_line(line, cfg.scene));
  }
  const std::size_t expected = split == Split::kTrain ? cfg.train_size : cfg.test_size;
  if (scenes.size() != expected) {
    throw IntegrityError(fmt::format("{}: {} scenes, config says {}", rel, scenes.size(), expected));
  }
  return scenes;
}

void Workspace::write_text(const std::string& rel, const std::string& text) const {
  ndgrad::write_file_atomic(path(rel), std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void Workspace::record(const std::string& rel) const { record(std::vector<std::string>{rel}); }

void Workspace::record(const std::vector<std::string>& rels) const {
  nlohmann::json manifest;
  if (exists("manifest.json")) manifest = read_json(path("manifest.json"));
  if (exists("config.json")) {
    const auto cfg = read_json(path("config.json"));
    manifest["config"] = cfg;
    manifest["seeds"] = {{"experiment", cfg.value("seed", 0)}};
  }
  manifest["tool"] = "mmfc";
  manifest["tool_version"] = kToolVersion;
  for (const auto& rel : rels) manifest["artifacts"][rel] = file_hash(path(rel));
  write_text("manifest.json", manifest.dump(2) + "\n");
}

void Workspace::require(const std::string& rel, const std::string& what) const {
  if (!exists(rel)) throw DependencyError("missing " + what + ": " + path(rel).string());
}

std::string file_hash(const std::filesystem::path& path) {
  return fmt::format("fnv1a64:{:016x}", fnv1a(ndgrad::read_file(path)));
}

std::string scene_line(std::size_t index, const pipeline::SceneSample& s) {
  nlohmann::json j{{"index", index}, {"seed", s.seed}, {"grid", s.grid}, {"classes", s.classes}, {"cells", s.cells}};
  return j.dump();
}

pipeline::SceneSample parse_scene_line(const std::string& line, const pipeline::SceneConfig& cfg) {
  try {
    const auto j = nlohmann::json::parse(line);
    pipeline::SceneSample s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.grid = j.at("grid").get<std::size_t>();
    s.classes = j.at("classes").get<std::size_t>();
    s.cells = j.at("cells").get<std::vector<std::uint8_t>>();
    if (s.grid != cfg.grid || s.classes != cfg.classes || s.cells.size() != cfg.cells()) {
      throw IntegrityError("dataset scene does not match the config geometry");
    }
    for (auto c : s.cells) {
      if (c > s.classes) throw IntegrityError("dataset scene has an out-of-range class");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("malformed dataset line: ") + e.what());
  }
}

std::string head_path() { return "models/head.ckpt"; }

std::string anf_path(pipeline::Topology t, std::size_t lambda_index) {
  return fmt::format("models/anf_{}_l{}.ckpt", pipeline::topology_name(t), lambda_index);
}

std::string cond_path(pipeline::Topology t, int lambda_case, std::size_t lambda_index) {
  return fmt::format("models/cond_{}_c{}_l{}.ckpt", pipeline::topology_name(t), lambda_case, lambda_index);
}

std::string log_path_for(const std::string& model_rel) {
  std::filesystem::path p(model_rel);
  return (std::filesystem::path("logs") / p.stem()).string() + ".csv";
}

std::size_t lambda_index(const ExperimentConfig& cfg, double lambda) {
  for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
    if (std::abs(cfg.lambda_grid[i] - lambda) <= 1e-12 * cfg.lambda_grid[i]) return i;
  }
  std::ostringstream grid;
  for (double l : cfg.lambda_grid) grid << ' ' << l;
  throw ConfigError(fmt::format("lambda {} is not on the configured grid:{}", lambda, grid.str()));
}

void save_feature_map(const std::filesystem::path& path, const FeatureMap& map) {
  ByteWriter w;
  w.text(kMapMagic);
  w.u8(static_cast<std::uint8_t>(map.modality));
  w.u32(static_cast<std::uint32_t>(map.rows()));
  w.u32(static_cast<std::uint32_t>(map.dim()));
  for (float v : map.values.values()) w.f32(v);
  ndgrad::write_file_atomic(path, w.take());
}

FeatureMap load_feature_map(const std::filesystem::path& path) {
  const auto bytes = ndgrad::read_file(path);
  ByteReader r(bytes);
  if (r.text(8) != kMapMagic) throw IntegrityError(path.string() + ": not a feature map file");
  const auto modality = r.u8();
  if (modality > 2) throw IntegrityError(path.string() + ": bad modality byte");
  const std::size_t rows = r.u32(), dim = r.u32();
  ndgrad::Tensor<float> t({rows, dim});
  for (auto& v : t.values()) v = r.f32();
  return FeatureMap{std::move(t), static_cast<Modality>(modality)};
}

}  // namespace mmfc::cli
