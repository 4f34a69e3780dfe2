#include "mmfc/pipeline/fusion.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace mmfc::pipeline {

using ndgrad::Tensor;

namespace {

constexpr char kMetaTag[] = "META";
constexpr char kKindTag[] = "KIND";
constexpr char kKind[] = "head";

std::vector<std::uint8_t> text_bytes(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

FusionHead::FusionHead(const HeadConfig& cfg, ndgrad::ParameterStore<float> store)
    : cfg_(cfg), store_(std::move(store)) {
  fusion_ = ndgrad::Dense<float>::bind(store_, kFusionLayer);
  head_ = ndgrad::Mlp<float>::bind(store_, kHeadNet);
  build_graphs();
}

FusionHead FusionHead::create(const HeadConfig& cfg, std::uint64_t seed) {
  if (cfg.rows < cfg.grid * cfg.grid) throw ConfigError("fusion head: rows must cover every grid cell");
  ndgrad::ParameterStore<float> store;
  Rng rng(seed, 0xf05e);
  ndgrad::Dense<float>::create(store, kFusionLayer, 2 * cfg.dim, cfg.dim, rng);
  ndgrad::Mlp<float>::create(store, kHeadNet, cfg.dim, cfg.hidden, cfg.classes + 1, rng);
  return FusionHead(cfg, std::move(store));
}

Tensor<float> FusionHead::cell_pooling() const {
  const std::size_t cells = cfg_.grid * cfg_.grid;
  Tensor<float> p({cells, cfg_.rows});
  std::vector<float> count(cells, 0.f);
  for (std::size_t q = 0; q < cfg_.rows; ++q) count[q % cells] += 1.f;
  for (std::size_t q = 0; q < cfg_.rows; ++q) p.at(q % cells, q) = 1.f / count[q % cells];
  return p;
}

void FusionHead::build_graphs() {
  fuse_graph_ = {};
  {
    auto& g = fuse_graph_;
    auto cat = g.concat_last(g.input("camera", {0, cfg_.dim}), g.input("lidar", {0, cfg_.dim}));
    g.output("z", g.leaky_relu(fusion_.build(g, cat)));
  }
  head_graph_ = {};
  {
    auto& g = head_graph_;
    auto logits = head_.build(g, g.input("z", {cfg_.rows, cfg_.dim}));
    if (cfg_.rows != cfg_.grid * cfg_.grid) logits = g.matmul(g.constant(cell_pooling()), logits);
    g.output("logits", logits);
  }
}

FeatureMap FusionHead::fuse(const FeatureMap& camera, const FeatureMap& lidar) const {
  if (camera.modality != Modality::kCamera || lidar.modality != Modality::kLidar) {
    throw ConfigError("fuse: expects a camera map and a lidar map, in that order");
  }
  if (camera.values.shape() != lidar.values.shape()) {
    throw ShapeError("fuse: camera " + ndgrad::to_string(camera.values.shape()) + " and lidar " +
                     ndgrad::to_string(lidar.values.shape()) + " maps differ in shape");
  }
  auto out = ndgrad::evaluate(fuse_graph_, {{"camera", camera.values}, {"lidar", lidar.values}});
  return FeatureMap{std::move(out.at("z")), Modality::kFused};
}

TaskPrediction FusionHead::predict(const FeatureMap& fused) const {
  auto out = ndgrad::evaluate(head_graph_, {{"z", fused.values}});
  return TaskPrediction{softmax_rows(out.at("logits"))};
}

ndgrad::ParameterFile FusionHead::to_file() const {
  ndgrad::ParameterFile file;
  for (const auto* p : store_.all()) file.params.add(p->name, p->value);
  nlohmann::json meta{{"rows", cfg_.rows},
                      {"dim", cfg_.dim},
                      {"hidden", cfg_.hidden},
                      {"grid", cfg_.grid},
                      {"classes", cfg_.classes}};
  file.sections[kKindTag] = text_bytes(kKind);
  file.sections[kMetaTag] = text_bytes(meta.dump());
  return file;
}

FusionHead FusionHead::from_file(ndgrad::ParameterFile file) {
  auto kind = file.sections.find(kKindTag);
  auto meta = file.sections.find(kMetaTag);
  if (kind == file.sections.end() || meta == file.sections.end() ||
      std::string(kind->second.begin(), kind->second.end()) != kKind) {
    throw IntegrityError("checkpoint is not a fusion/task head");
  }
  HeadConfig cfg;
  try {
    const auto j = nlohmann::json::parse(meta->second.begin(), meta->second.end());
    cfg.rows = j.at("rows");
    cfg.dim = j.at("dim");
    cfg.hidden = j.at("hidden");
    cfg.grid = j.at("grid");
    cfg.classes = j.at("classes");
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("fusion head metadata: ") + e.what());
  }
  return FusionHead(cfg, std::move(file.params));
}

void FusionHead::save(const std::filesystem::path& path) const { to_file().save(path); }

FusionHead FusionHead::load(const std::filesystem::path& path) {
  return from_file(ndgrad::ParameterFile::load(path));
}

Tensor<float> softmax_rows(const Tensor<float>& logits) {
  Tensor<float> out(logits.shape());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto in = logits.row(r);
    auto o = out.row(r);
    const float mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) total += std::exp(static_cast<double>(in[c] - mx));
    for (std::size_t c = 0; c < in.size(); ++c) {
      o[c] = static_cast<float>(std::exp(static_cast<double>(in[c] - mx)) / total);
    }
  }
  return out;
}

}  // namespace mmfc::pipeline
