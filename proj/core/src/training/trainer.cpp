#include "mmfc/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mmfc/entropy/quantize.hpp"
#include "mmfc/ndgrad/adam.hpp"
#include "mmfc/training/loss.hpp"

namespace mmfc::training {

using ndgrad::Tensor;

namespace {

constexpr std::uint64_t kShuffleStream = 0x5f1;
constexpr std::uint64_t kNoiseStream = 0x4015e;
constexpr std::uint64_t kInitStream = 0x1417;

/// Stacks maps[idx[0..]] into one (sum rows) x cols tensor.
Tensor<float> stack(const std::vector<const Tensor<float>*>& maps) {
  const std::size_t cols = maps.front()->cols();
  std::size_t rows = 0;
  for (const auto* m : maps) rows += m->rows();
  Tensor<float> out({rows, cols});
  auto it = out.values().begin();
  for (const auto* m : maps) it = std::copy(m->values().begin(), m->values().end(), it);
  return out;
}

struct BatchStats {
  double loss = 0.0;
  double bits = 0.0;
  double mse = 0.0;
};

/// Shared epoch loop: shuffles sample indices, calls step(batch) for each
/// batch, applies Adam (unless lr == 0) and logs per-epoch means. Parameters
/// in `fast` are stepped at kPriorLrScale * lr.
template <typename StepFn>
TrainLog run_epochs(const TrainConfig& cfg, std::size_t samples, const std::vector<ndgrad::Parameter<float>*>& params,
                    StepFn&& step, const std::vector<ndgrad::Parameter<float>*>& fast = {}) {
  cfg.validate();
  if (samples == 0) throw ConfigError("training: no training samples");
  std::optional<ndgrad::Adam<float>> adam, adam_fast;
  if (cfg.lr > 0) {
    std::vector<ndgrad::Parameter<float>*> slow;
    for (auto* p : params) {
      if (std::find(fast.begin(), fast.end(), p) == fast.end()) slow.push_back(p);
    }
    adam.emplace(slow, ndgrad::AdamConfig{cfg.lr});
    if (!fast.empty()) adam_fast.emplace(fast, ndgrad::AdamConfig{cfg.lr * kPriorLrScale});
  }
  Rng shuffle(cfg.seed, kShuffleStream);
  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), 0);
  TrainLog log;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = samples; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
    BatchStats total;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < samples; b += cfg.batch_size) {
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(b),
                                           order.begin() + static_cast<std::ptrdiff_t>(std::min(samples, b + cfg.batch_size)));
      const BatchStats s = step(batch);
      if (!std::isfinite(s.loss)) {
        throw Error("training diverged: non-finite loss in epoch " + std::to_string(epoch));
      }
      if (adam) adam->step();
      if (adam_fast) adam_fast->step();
      const auto n = static_cast<double>(batch.size());
      total.loss += s.loss * n;
      total.bits += s.bits;
      total.mse += s.mse * n;
      seen += batch.size();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto n = static_cast<double>(seen);
    log.epochs.push_back({epoch, total.bits / n, total.mse / n, total.loss / n, seconds});
  }
  return log;
}

std::vector<Tensor<float>> modality_maps(const TrainingData& data, Modality m, const pipeline::FusionHead* head) {
  std::vector<Tensor<float>> maps;
  maps.reserve(data.size());
  for (const auto& f : data.features) {
    if (m == Modality::kCamera) {
      maps.push_back(f.camera.values);
    } else if (m == Modality::kLidar) {
      maps.push_back(f.lidar.values);
    } else {
      maps.push_back(head->fuse(f.camera, f.lidar).values);
    }
  }
  return maps;
}

}  // namespace

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::kTaskHead: return "task-head";
    case Stage::kAnf: return "anf";
    case Stage::kCond: return "cond";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  if (name == "task-head" || name == "head") return Stage::kTaskHead;
  if (name == "anf") return Stage::kAnf;
  if (name == "cond") return Stage::kCond;
  throw ConfigError("unknown stage '" + std::string(name) + "' (expected task-head, anf or cond)");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("train: lr must be a finite value >= 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("train: lambda must be finite and >= 0");
  if (!(distortion_scale > 0.0)) throw ConfigError("train: distortion_scale must be positive");
  if (lambda_case != 1 && lambda_case != 2) throw ConfigError("train: case must be 1 or 2");
}

std::string TrainLog::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "epoch,rate_bits,mse,loss,seconds\n";
  for (const auto& e : epochs) {
    os << e.epoch << ',' << e.rate_bits << ',' << e.mse << ',' << e.loss << ',' << e.seconds << '\n';
  }
  return os.str();
}

void TrainLog::save_csv(const std::filesystem::path& path) const {
  const auto text = to_csv();
  ndgrad::write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

TrainingData TrainingData::build(std::vector<pipeline::SceneSample> scenes, const pipeline::FeatureGenerator& gen) {
  TrainingData d;
  d.features.reserve(scenes.size());
  for (const auto& s : scenes) d.features.push_back(pipeline::scene_features(s, gen));
  d.scenes = std::move(scenes);
  return d;
}

std::uint64_t lambda_seed(std::uint64_t base, std::size_t lambda_index) { return derive_seed(base, 0x1a0 + lambda_index); }

Trained<pipeline::FusionHead> train_task_head(const TrainConfig& cfg, const TrainingData& data,
                                              const pipeline::HeadConfig& head_cfg) {
  auto head = pipeline::FusionHead::create(head_cfg, derive_seed(cfg.seed, kInitStream));
  const std::size_t cells = head_cfg.grid * head_cfg.grid;
  const bool pooled = head_cfg.rows != cells;

  ndgrad::Graph<float> g;
  auto cat = g.concat_last(g.input("camera", {0, head_cfg.dim}), g.input("lidar", {0, head_cfg.dim}));
  auto logits = head.head().build(g, g.leaky_relu(head.fusion().build(g, cat)));
  if (pooled) logits = g.matmul(g.input("pool"), logits);
  g.output("loss", g.reduce_mean(g.softmax_cross_entropy(logits, g.input("targets", {0, head_cfg.classes + 1}))));

  const auto pool_one = head.cell_pooling();
  auto params = head.params().all();
  auto step = [&](const std::vector<std::size_t>& batch) {
    std::vector<const Tensor<float>*> cam, lid;
    Tensor<float> targets({batch.size() * cells, head_cfg.classes + 1});
    for (std::size_t i = 0; i < batch.size(); ++i) {
      cam.push_back(&data.features[batch[i]].camera.values);
      lid.push_back(&data.features[batch[i]].lidar.values);
      const auto& scene = data.scenes[batch[i]];
      for (std::size_t c = 0; c < cells; ++c) targets.at(i * cells + c, scene.cells[c]) = 1.f;
    }
    ndgrad::Bindings<float> in{{"camera", stack(cam)}, {"lidar", stack(lid)}, {"targets", std::move(targets)}};
    if (pooled) {
      Tensor<float> pool({batch.size() * cells, batch.size() * head_cfg.rows});
      for (std::size_t i = 0; i < batch.size(); ++i) {
        for (std::size_t c = 0; c < cells; ++c) {
          for (std::size_t q = 0; q < head_cfg.rows; ++q) {
            pool.at(i * cells + c, i * head_cfg.rows + q) = pool_one.at(c, q);
          }
        }
      }
      in.emplace("pool", std::move(pool));
    }
    const auto r = ndgrad::gradient<float>(g, in, params, "loss");
    return BatchStats{r.outputs.at("loss").item(), 0.0, 0.0};
  };
  auto log = run_epochs(cfg, data.size(), params, step);
  return {std::move(head), std::move(log)};
}

namespace {

// Distortion is weighed relative to the mean power of the training targets, so
// one lambda means the same thing for fused and single-modality maps.
double distortion_weight(const TrainConfig& cfg, const std::vector<Tensor<float>>& maps) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& m : maps) {
    for (float v : m.values()) acc += static_cast<double>(v) * v;
    n += m.size();
  }
  const double power = n > 0 ? acc / static_cast<double>(n) : 0.0;
  if (!(power > 0.0)) throw ConfigError("train: training targets are all zero");
  return cfg.lambda * cfg.distortion_scale / power;
}

}  // namespace

Trained<codec::AnfCodec> train_anf_on(const TrainConfig& cfg, const std::vector<Tensor<float>>& maps,
                                      const codec::CodecConfig& codec_cfg) {
  auto codec = codec::AnfCodec::create(codec_cfg, derive_seed(cfg.seed, kInitStream));
  PriorSource<float> prior{&codec.params().get(codec::kEntropyLoc), &codec.params().get(codec::kEntropyRawScale),
                           nullptr};
  ndgrad::Graph<float> g;
  build_rd_graph(g, codec.transform(), prior, distortion_weight(cfg, maps));

  Rng noise_rng(cfg.seed, kNoiseStream);
  auto params = codec.params().all();
  auto step = [&](const std::vector<std::size_t>& batch) {
    std::vector<const Tensor<float>*> xs;
    for (auto i : batch) xs.push_back(&maps[i]);
    auto x = stack(xs);
    auto noise = entropy::uniform_noise({x.rows(), codec_cfg.latent}, noise_rng);
    const auto r = ndgrad::gradient<float>(g, {{"x", std::move(x)}, {"noise", std::move(noise)}}, params, "loss");
    return BatchStats{r.outputs.at("loss").item(), r.outputs.at("bits").item(), r.outputs.at("mse").item()};
  };
  auto log = run_epochs(cfg, maps.size(), params, step, {prior.loc, prior.raw_scale});
  return {std::move(codec), std::move(log)};
}

Trained<codec::CondCodec> train_cond_on(const TrainConfig& cfg, const std::vector<Tensor<float>>& maps,
                                        const std::vector<Tensor<float>>& conds,
                                        const codec::CodecConfig& codec_cfg) {
  if (maps.size() != conds.size()) throw ShapeError("train_cond: target/condition count mismatch");
  auto codec = codec::CondCodec::create(codec_cfg, derive_seed(cfg.seed, kInitStream));
  PriorSource<float> prior{nullptr, nullptr, &codec.prior()};
  ndgrad::Graph<float> g;
  build_rd_graph(g, codec.transform(), prior, distortion_weight(cfg, maps));

  Rng noise_rng(cfg.seed, kNoiseStream);
  auto params = codec.params().all();
  auto step = [&](const std::vector<std::size_t>& batch) {
    std::vector<const Tensor<float>*> xs, cs;
    for (auto i : batch) {
      xs.push_back(&maps[i]);
      cs.push_back(&conds[i]);
    }
    auto x = stack(xs);
    auto noise = entropy::uniform_noise({x.rows(), codec_cfg.latent}, noise_rng);
    const auto r = ndgrad::gradient<float>(
        g, {{"x", std::move(x)}, {"noise", std::move(noise)}, {"cond", stack(cs)}}, params, "loss");
    return BatchStats{r.outputs.at("loss").item(), r.outputs.at("bits").item(), r.outputs.at("mse").item()};
  };
  // The prior net's output bias is the condition-independent part of the
  // prior, the counterpart of the unconditional codec's (loc, raw scale).
  auto log = run_epochs(cfg, maps.size(), params, step, {codec.prior().out.bias});
  return {std::move(codec), std::move(log)};
}

Trained<codec::AnfCodec> train_anf(const TrainConfig& cfg, const TrainingData& data, Modality modality,
                                   const pipeline::FusionHead* head) {
  if (data.size() == 0) throw ConfigError("train anf: empty training set");
  if (modality == Modality::kFused && head == nullptr) {
    throw ConfigError("train anf: fused features need the trained task head (train stage task-head first)");
  }
  const std::uint64_t before = head ? head->checksum() : 0;
  const auto maps = modality_maps(data, modality, head);
  const auto& shape = maps.front().shape();
  auto result = train_anf_on(cfg, maps, codec::CodecConfig::for_shape(shape[0], shape[1], modality));
  if (head && head->checksum() != before) throw Error("train anf: frozen task head was modified");
  return result;
}

Trained<codec::CondCodec> train_cond(const TrainConfig& cfg, const TrainingData& data, Modality target,
                                     const codec::AnfCodec* predictor) {
  if (target == Modality::kFused) throw ConfigError("train cond: target must be camera or lidar");
  const Modality other = target == Modality::kCamera ? Modality::kLidar : Modality::kCamera;
  if (predictor == nullptr) {
    throw ConfigError("train cond: needs the trained " + std::string(modality_name(other)) + " predictor codec");
  }
  if (predictor->config().modality != other) {
    throw ConfigError("train cond: predictor codes " + std::string(modality_name(predictor->config().modality)) +
                      ", expected " + std::string(modality_name(other)));
  }
  if (data.size() == 0) throw ConfigError("train cond: empty training set");
  const auto maps = modality_maps(data, target, nullptr);
  const auto inputs = modality_maps(data, other, nullptr);
  std::vector<Tensor<float>> conds;
  conds.reserve(inputs.size());
  // The decoder only ever sees the decoded predictor; train on exactly that.
  for (const auto& y : inputs) conds.push_back(predictor->reconstruct(y));
  const auto& shape = maps.front().shape();
  return train_cond_on(cfg, maps, conds, codec::CodecConfig::for_shape(shape[0], shape[1], target));
}

}  // namespace mmfc::training
