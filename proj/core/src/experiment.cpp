#include "mmfc/experiment.hpp"

#include <set>
#include <string>

namespace mmfc {

namespace {

using nlohmann::json;

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: '" + where + key + "' has the wrong type (" + j.at(key).dump() + ")");
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw ConfigError("config: unknown key '" + where + item.key() + "'");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  scene.validate();
  features.validate(scene);
  if (train_size == 0) throw ConfigError("config: train_size must be positive");
  if (head_epochs == 0 || codec_epochs == 0) throw ConfigError("config: epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("config: batch_size must be >= 1");
  if (!(head_lr >= 0) || !(codec_lr >= 0)) throw ConfigError("config: learning rates must be >= 0");
  if (!(distortion_scale > 0)) throw ConfigError("config: distortion_scale must be positive");
  if (lambda_grid.empty()) throw ConfigError("config: lambda_grid must not be empty");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0)) throw ConfigError("config: lambda_grid values must be positive");
    if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1])) {
      throw ConfigError("config: lambda_grid must be strictly increasing");
    }
  }
  if (lambda_grid.size() > 255) throw ConfigError("config: at most 255 lambda values");
}

nlohmann::json ExperimentConfig::to_json() const {
  const auto& f = features;
  return json{
      {"seed", seed},
      {"train_size", train_size},
      {"test_size", test_size},
      {"scene", {{"grid", scene.grid}, {"classes", scene.classes}, {"density", scene.density}}},
      {"features",
       {{"rows", f.rows},
        {"dim", f.dim},
        {"camera_class_gain", f.camera_class_gain},
        {"camera_occupancy_gain", f.camera_occupancy_gain},
        {"camera_clutter_gain", f.camera_clutter_gain},
        {"camera_noise", f.camera_noise},
        {"camera_confusion", f.camera_confusion},
        {"camera_smoothing", f.camera_smoothing},
        {"lidar_class_gain", f.lidar_class_gain},
        {"lidar_occupancy_gain", f.lidar_occupancy_gain},
        {"lidar_noise", f.lidar_noise},
        {"lidar_confusion", f.lidar_confusion},
        {"nuisance_gain", f.nuisance_gain},
        {"nuisance_rank", f.nuisance_rank},
        {"rho", f.rho}}},
      {"head", {{"hidden", head_hidden}, {"epochs", head_epochs}, {"lr", head_lr}}},
      {"codec",
       {{"epochs", codec_epochs},
        {"lr", codec_lr},
        {"batch_size", batch_size},
        {"distortion_scale", distortion_scale},
        {"lambda_grid", lambda_grid}}},
      {"timing_samples", timing_samples},
  };
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  reject_unknown(j, {"seed", "train_size", "test_size", "scene", "features", "head", "codec", "timing_samples"}, "");
  read(j, "seed", c.seed, "");
  read(j, "train_size", c.train_size, "");
  read(j, "test_size", c.test_size, "");
  read(j, "timing_samples", c.timing_samples, "");
  if (j.contains("scene")) {
    const auto& s = j["scene"];
    reject_unknown(s, {"grid", "classes", "density"}, "scene.");
    read(s, "grid", c.scene.grid, "scene.");
    read(s, "classes", c.scene.classes, "scene.");
    read(s, "density", c.scene.density, "scene.");
  }
  if (j.contains("features")) {
    const auto& s = j["features"];
    auto& f = c.features;
    reject_unknown(s,
                   {"rows", "dim", "camera_class_gain", "camera_occupancy_gain", "camera_clutter_gain",
                    "camera_noise", "camera_confusion", "camera_smoothing", "lidar_class_gain",
                    "lidar_occupancy_gain", "lidar_noise", "lidar_confusion", "nuisance_gain", "nuisance_rank", "rho"},
                   "features.");
    const std::string w = "features.";
    read(s, "rows", f.rows, w);
    read(s, "dim", f.dim, w);
    read(s, "camera_class_gain", f.camera_class_gain, w);
    read(s, "camera_occupancy_gain", f.camera_occupancy_gain, w);
    read(s, "camera_clutter_gain", f.camera_clutter_gain, w);
    read(s, "camera_noise", f.camera_noise, w);
    read(s, "camera_confusion", f.camera_confusion, w);
    read(s, "camera_smoothing", f.camera_smoothing, w);
    read(s, "lidar_class_gain", f.lidar_class_gain, w);
    read(s, "lidar_occupancy_gain", f.lidar_occupancy_gain, w);
    read(s, "lidar_noise", f.lidar_noise, w);
    read(s, "lidar_confusion", f.lidar_confusion, w);
    read(s, "nuisance_gain", f.nuisance_gain, w);
    read(s, "nuisance_rank", f.nuisance_rank, w);
    read(s, "rho", f.rho, w);
  }
  if (j.contains("head")) {
    const auto& s = j["head"];
    reject_unknown(s, {"hidden", "epochs", "lr"}, "head.");
    read(s, "hidden", c.head_hidden, "head.");
    read(s, "epochs", c.head_epochs, "head.");
    read(s, "lr", c.head_lr, "head.");
  }
  if (j.contains("codec")) {
    const auto& s = j["codec"];
    reject_unknown(s, {"epochs", "lr", "batch_size", "distortion_scale", "lambda_grid"}, "codec.");
    read(s, "epochs", c.codec_epochs, "codec.");
    read(s, "lr", c.codec_lr, "codec.");
    read(s, "batch_size", c.batch_size, "codec.");
    read(s, "distortion_scale", c.distortion_scale, "codec.");
    read(s, "lambda_grid", c.lambda_grid, "codec.");
  }
  c.validate();
  return c;
}

pipeline::HeadConfig ExperimentConfig::head_config() const {
  return pipeline::HeadConfig{features.rows, features.dim, head_hidden, scene.grid, scene.classes};
}

training::TrainConfig ExperimentConfig::head_train_config() const {
  training::TrainConfig t;
  t.stage = training::Stage::kTaskHead;
  t.epochs = head_epochs;
  t.lr = head_lr;
  t.batch_size = batch_size;
  t.seed = derive_seed(seed, 0x4ead);
  return t;
}

training::TrainConfig ExperimentConfig::codec_train_config() const {
  training::TrainConfig t;
  t.stage = training::Stage::kAnf;
  t.epochs = codec_epochs;
  t.lr = codec_lr;
  t.batch_size = batch_size;
  t.seed = derive_seed(seed, 0xc0dec);
  t.distortion_scale = distortion_scale;
  return t;
}

pipeline::FeatureGenerator ExperimentConfig::generator() const {
  return pipeline::FeatureGenerator(features, scene, seed);
}

std::uint64_t sample_seed(std::uint64_t seed, Split split, std::size_t index) {
  return derive_seed(derive_seed(seed, 0xda7a00 + static_cast<std::uint64_t>(split)), index);
}

std::vector<pipeline::SceneSample> make_split(const ExperimentConfig& cfg, Split split) {
  const std::size_t n = split == Split::kTrain ? cfg.train_size : cfg.test_size;
  std::vector<pipeline::SceneSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(pipeline::generate_scene(sample_seed(cfg.seed, split, i), cfg.scene));
  return out;
}

training::TrainingData make_training_data(const ExperimentConfig& cfg) {
  return training::TrainingData::build(make_split(cfg, Split::kTrain), cfg.generator());
}

eval::TestSet make_test_set(const ExperimentConfig& cfg) {
  eval::TestSet t;
  t.scenes = make_split(cfg, Split::kTest);
  const auto gen = cfg.generator();
  for (const auto& s : t.scenes) t.features.push_back(pipeline::scene_features(s, gen));
  return t;
}

}  // namespace mmfc
