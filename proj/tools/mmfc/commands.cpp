#include "commands.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>

#include "mmfc/codec/anf_codec.hpp"
#include "mmfc/codec/anf_transform.hpp"
#include "mmfc/codec/cond_codec.hpp"
#include "mmfc/error.hpp"
#include "mmfc/eval/rd_curve.hpp"
#include "mmfc/eval/timing.hpp"
#include "mmfc/parallel.hpp"
#include "mmfc/pipeline/topology.hpp"
#include "mmfc/training/sweep.hpp"
#include "workspace.hpp"

namespace mmfc::cli {

namespace {

using pipeline::Topology;

ExperimentConfig load_checked_config(const Workspace& ws, const Options& o) {
  auto cfg = ws.load_config();
  if (o.seed && *o.seed != cfg.seed) {
    throw ConfigError(fmt::format("--seed {} differs from the workspace seed {}; regenerate with gen-data",
                                  *o.seed, cfg.seed));
  }
  return cfg;
}

Modality first_modality(Topology t) {
  return t == Topology::kA1 ? Modality::kFused : t == Topology::kA2 ? Modality::kCamera : Modality::kLidar;
}

Modality conditional_modality(Topology t) { return t == Topology::kA2 ? Modality::kLidar : Modality::kCamera; }

void check_case(Topology t, int lambda_case) {
  if (lambda_case != 1 && lambda_case != 2) throw ConfigError("--case must be 1 or 2");
  if (t == Topology::kA3 && lambda_case != 1) throw ConfigError("approach 3 is built for case 1 only");
}

std::size_t predictor_index(Topology t, int lambda_case, std::size_t i) {
  return t != Topology::kA1 && lambda_case == 1 ? 0 : i;
}

training::TrainConfig codec_config_at(const ExperimentConfig& cfg, training::Stage stage, std::size_t i,
                                      int lambda_case) {
  auto tc = cfg.codec_train_config();
  tc.stage = stage;
  tc.lambda = cfg.lambda_grid[i];
  tc.lambda_case = lambda_case;
  tc.seed = training::lambda_seed(tc.seed, i);
  return tc;
}

std::vector<std::size_t> selected_indices(const ExperimentConfig& cfg, const Options& o) {
  if (o.sweep) {
    std::vector<std::size_t> all(cfg.lambda_grid.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  if (!o.lambda) throw ConfigError("give --lambda or --sweep");
  return {lambda_index(cfg, *o.lambda)};
}

pipeline::FusionHead load_head(const Workspace& ws) {
  ws.require(head_path(), "task head checkpoint (train --stage task-head first)");
  return pipeline::FusionHead::load(ws.path(head_path()));
}

codec::AnfCodec load_anf(const Workspace& ws, Topology t, std::size_t i) {
  const auto rel = anf_path(t, i);
  ws.require(rel, fmt::format("{} predictor codec (train --stage anf --topology {})", modality_name(first_modality(t)),
                              pipeline::topology_name(t)));
  return codec::AnfCodec::load(ws.path(rel));
}

codec::CondCodec load_cond(const Workspace& ws, Topology t, int lambda_case, std::size_t i) {
  const auto rel = cond_path(t, lambda_case, i);
  ws.require(rel, fmt::format("conditional codec (train --stage cond --topology {} --case {})",
                              pipeline::topology_name(t), lambda_case));
  return codec::CondCodec::load(ws.path(rel));
}

training::TrainingData load_training_data(const Workspace& ws, const ExperimentConfig& cfg) {
  return training::TrainingData::build(ws.load_split(Split::kTrain, cfg), cfg.generator());
}

eval::TestSet load_test_set(const Workspace& ws, const ExperimentConfig& cfg) {
  eval::TestSet t;
  t.scenes = ws.load_split(Split::kTest, cfg);
  const auto gen = cfg.generator();
  for (const auto& s : t.scenes) t.features.push_back(pipeline::scene_features(s, gen));
  return t;
}

// Trains one model per index (in parallel) and saves it with its log.
template <typename Train>
void train_models(const Workspace& ws, const std::vector<std::size_t>& indices, std::size_t jobs,
                  const std::function<std::string(std::size_t)>& rel_of, Train train) {
  std::mutex io;
  std::vector<std::string> written;
  parallel_for(indices.size(), jobs, [&](std::size_t k) {
    const std::size_t i = indices[k];
    auto trained = train(i);
    const auto rel = rel_of(i);
    trained.model.save(ws.path(rel));
    trained.log.save_csv(ws.path(log_path_for(rel)));
    std::lock_guard lock(io);
    fmt::print("trained {} ({} epochs, final loss {:.4f})\n", rel, trained.log.epochs.size(),
               trained.log.epochs.empty() ? 0.0 : trained.log.epochs.back().loss);
    written.push_back(rel);
    written.push_back(log_path_for(rel));
  });
  std::sort(written.begin(), written.end());
  ws.record(written);
}

void train_head(const Workspace& ws, const ExperimentConfig& cfg, const training::TrainingData& data) {
  auto t = training::train_task_head(cfg.head_train_config(), data, cfg.head_config());
  t.model.save(ws.path(head_path()));
  t.log.save_csv(ws.path(log_path_for(head_path())));
  ws.record({head_path(), log_path_for(head_path())});
  fmt::print("trained {} ({} epochs, final loss {:.4f})\n", head_path(), t.log.epochs.size(),
             t.log.epochs.back().loss);
}

void train_anf_stage(const Workspace& ws, const ExperimentConfig& cfg, const training::TrainingData& data, Topology t,
                     const std::vector<std::size_t>& indices, std::size_t jobs) {
  std::optional<pipeline::FusionHead> head;
  if (t == Topology::kA1) head = load_head(ws);
  train_models(ws, indices, jobs, [&](std::size_t i) { return anf_path(t, i); }, [&](std::size_t i) {
    return training::train_anf(codec_config_at(cfg, training::Stage::kAnf, i, 1), data, first_modality(t),
                               head ? &*head : nullptr);
  });
}

void train_cond_stage(const Workspace& ws, const ExperimentConfig& cfg, const training::TrainingData& data,
                      Topology t, int lambda_case, const std::vector<std::size_t>& indices, std::size_t jobs) {
  if (t == Topology::kA1) throw ConfigError("approach 1 has no conditional codec");
  check_case(t, lambda_case);
  // Load every predictor up front so a missing one fails before any training.
  std::map<std::size_t, codec::AnfCodec> predictors;
  for (auto i : indices) {
    const auto p = predictor_index(t, lambda_case, i);
    if (!predictors.count(p)) predictors.emplace(p, load_anf(ws, t, p));
  }
  train_models(ws, indices, jobs, [&](std::size_t i) { return cond_path(t, lambda_case, i); }, [&](std::size_t i) {
    const auto& predictor = predictors.at(predictor_index(t, lambda_case, i));
    return training::train_cond(codec_config_at(cfg, training::Stage::kCond, i, lambda_case), data,
                                conditional_modality(t), &predictor);
  });
}

std::vector<std::size_t> missing(const Workspace& ws, std::size_t n, const std::function<std::string(std::size_t)>& rel) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ws.exists(rel(i))) out.push_back(i);
  }
  return out;
}

void train_all(const Workspace& ws, const ExperimentConfig& cfg, const training::TrainingData& data, std::size_t jobs) {
  if (!ws.exists(head_path())) train_head(ws, cfg, data);
  const std::size_t n = cfg.lambda_grid.size();
  for (auto t : {Topology::kA1, Topology::kA2}) {
    const auto todo = missing(ws, n, [&](std::size_t i) { return anf_path(t, i); });
    if (!todo.empty()) train_anf_stage(ws, cfg, data, t, todo, jobs);
  }
  if (!ws.exists(anf_path(Topology::kA3, 0))) train_anf_stage(ws, cfg, data, Topology::kA3, {0}, jobs);
  const std::pair<Topology, int> conds[] = {{Topology::kA2, 1}, {Topology::kA2, 2}, {Topology::kA3, 1}};
  for (auto [t, c] : conds) {
    const auto todo = missing(ws, n, [&](std::size_t i) { return cond_path(t, c, i); });
    if (!todo.empty()) train_cond_stage(ws, cfg, data, t, c, todo, jobs);
  }
}

std::string digest_hex(const FeatureMap& m) { return fmt::format("{:016x}", feature_digest(m.values)); }

std::string stream_ext(const entropy::Bitstream& bs) {
  return fmt::format(".{}.mmfc", modality_name(bs.header.role));
}

int codec_encode(const Workspace& ws, const Options& o) {
  const auto cfg = load_checked_config(ws, o);
  const auto t = pipeline::parse_topology(o.topology);
  const int lambda_case = t == Topology::kA1 ? 1 : o.lambda_case;
  check_case(t, lambda_case);
  if (!o.lambda) throw ConfigError("codec encode needs --lambda");
  const auto i = lambda_index(cfg, *o.lambda);
  if (o.split != "test" && o.split != "train") throw ConfigError("--split must be train or test");
  const auto scenes = ws.load_split(o.split == "test" ? Split::kTest : Split::kTrain, cfg);
  if (o.index >= scenes.size()) {
    throw ConfigError(fmt::format("--index {} out of range ({} scenes)", o.index, scenes.size()));
  }
  const auto head = load_head(ws);
  const auto y = pipeline::scene_features(scenes[o.index], cfg.generator());
  const auto tag = static_cast<std::uint8_t>(i);

  pipeline::TopologyResult res;
  std::vector<FeatureMap> decoded;
  if (t == Topology::kA1) {
    const auto codec = load_anf(ws, t, i);
    res = pipeline::run_approach1(y, head, codec, tag);
    decoded.push_back(codec.decompress(res.streams[0]));
  } else {
    const auto predictor = load_anf(ws, t, predictor_index(t, lambda_case, i));
    const auto conditional = load_cond(ws, t, lambda_case, i);
    res = t == Topology::kA2 ? pipeline::run_approach2(y, head, predictor, conditional, tag)
                             : pipeline::run_approach3(y, head, predictor, conditional, tag);
    decoded.push_back(predictor.decompress(res.streams[0]));
    decoded.push_back(conditional.decompress(res.streams[1], decoded[0]));
  }

  const auto dir = o.output.value_or(ws.path("streams"));
  const auto stem = fmt::format("{}_l{}_{}{}", eval::curve_label(t, lambda_case), i, o.split, o.index);
  for (std::size_t k = 0; k < res.streams.size(); ++k) {
    const auto file = dir / (stem + stream_ext(res.streams[k]));
    res.streams[k].save(file);
    fmt::print("wrote {} ({} bytes) reconstruction {}\n", file.string(), res.streams[k].size_bytes(),
               digest_hex(decoded[k]));
  }
  fmt::print("total {} bits\n", res.rate_bits);
  return 0;
}

int codec_decode(const Workspace& ws, const Options& o) {
  const auto cfg = load_checked_config(ws, o);
  if (o.inputs.empty() || o.inputs.size() > 2) throw ConfigError("codec decode takes one or two --input streams");
  struct Input {
    std::filesystem::path path;
    entropy::Bitstream bs;
  };
  std::vector<Input> in;
  for (const auto& p : o.inputs) {
    if (!std::filesystem::exists(p)) throw DependencyError("missing input stream " + p.string());
    in.push_back({p, entropy::Bitstream::load(p)});
  }
  // The unconditional stream decodes first; the other needs its output.
  std::stable_sort(in.begin(), in.end(),
                   [](const Input& a, const Input& b) { return !a.bs.header.conditional && b.bs.header.conditional; });
  const auto& h0 = in[0].bs.header;
  if (h0.conditional) throw DependencyError("conditional stream given without the predictor stream it depends on");
  if (h0.approach < 1 || h0.approach > 3) throw IntegrityError("stream header: unknown approach");
  const auto t = static_cast<Topology>(h0.approach);
  const int lambda_case = t == Topology::kA1 ? 1 : o.lambda_case;
  check_case(t, lambda_case);
  const std::size_t i = h0.lambda_index;
  if (i >= cfg.lambda_grid.size()) throw IntegrityError("stream header: lambda index outside the grid");
  if (t == Topology::kA1 && in.size() != 1) throw ConfigError("approach 1 has a single stream");
  if (t != Topology::kA1 && in.size() != 2) throw DependencyError("approaches 2 and 3 need both streams");
  for (const auto& x : in) {
    if (x.bs.header.approach != h0.approach || x.bs.header.lambda_index != h0.lambda_index) {
      throw IntegrityError("streams come from different runs (approach or lambda index differ)");
    }
  }

  const auto dir = o.output.value_or(ws.path("streams"));
  auto write = [&](const Input& x, const FeatureMap& m) {
    auto name = x.path.filename().string();
    if (name.size() > 5 && name.ends_with(".mmfc")) name.resize(name.size() - 5);
    const auto file = dir / (name + ".fmap");
    save_feature_map(file, m);
    fmt::print("wrote {} ({} x {}, {}) reconstruction {}\n", file.string(), m.rows(), m.dim(),
               modality_name(m.modality), digest_hex(m));
  };
  const auto predictor = load_anf(ws, t, predictor_index(t, lambda_case, i));
  const auto first = predictor.decompress(in[0].bs);
  write(in[0], first);
  if (in.size() == 2) {
    const auto conditional = load_cond(ws, t, lambda_case, i);
    write(in[1], conditional.decompress(in[1].bs, first));
  }
  return 0;
}

std::optional<training::SweepResult> assemble_sweep(const Workspace& ws, const ExperimentConfig& cfg, Topology t,
                                                    int lambda_case, std::string& why) {
  training::SweepResult s;
  s.topology = t;
  s.lambda_case = lambda_case;
  s.lambdas = cfg.lambda_grid;
  const std::size_t n = cfg.lambda_grid.size();
  std::vector<std::string> needed;
  const std::size_t predictors = t == Topology::kA1 || lambda_case == 2 ? n : 1;
  for (std::size_t i = 0; i < predictors; ++i) needed.push_back(anf_path(t, i));
  if (t != Topology::kA1) {
    for (std::size_t i = 0; i < n; ++i) needed.push_back(cond_path(t, lambda_case, i));
  }
  for (const auto& rel : needed) {
    if (!ws.exists(rel)) {
      why = "missing " + rel;
      return std::nullopt;
    }
  }
  for (std::size_t i = 0; i < predictors; ++i) s.predictors.push_back(codec::AnfCodec::load(ws.path(anf_path(t, i))));
  if (t != Topology::kA1) {
    for (std::size_t i = 0; i < n; ++i) s.conditionals.push_back(codec::CondCodec::load(ws.path(cond_path(t, lambda_case, i))));
  }
  return s;
}

nlohmann::json curve_json(const eval::RDCurve& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : c.points) {
    pts.push_back({{"lambda", p.lambda}, {"rate_bits", p.rate_bits}, {"map_percent", p.quality}, {"mse", p.distortion}});
  }
  return pts;
}

bool strictly_monotone(const eval::RDCurve& c, bool increasing, double eval::RDPoint::*field) {
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    const double a = c.points[k - 1].*field, b = c.points[k].*field;
    if (increasing ? !(b > a) : !(b < a)) return false;
  }
  return true;
}

}  // namespace

int cmd_gen_data(const Options& o) {
  ExperimentConfig cfg;
  if (o.config) {
    std::ifstream in(*o.config);
    if (!in) throw ConfigError("cannot open config " + o.config->string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(o.config->string() + ": " + e.what());
    }
    cfg = ExperimentConfig::from_json(j);
  }
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  (void)cfg.generator();  // validates the feature geometry

  Workspace ws(o.out);
  ws.write_text("config.json", cfg.to_json().dump(2) + "\n");
  for (auto split : {Split::kTrain, Split::kTest}) {
    const auto scenes = make_split(cfg, split);
    std::string text;
    for (std::size_t i = 0; i < scenes.size(); ++i) text += scene_line(i, scenes[i]) + "\n";
    ws.write_text(split == Split::kTrain ? "data/train.jsonl" : "data/test.jsonl", text);
  }
  ws.record({"config.json", "data/train.jsonl", "data/test.jsonl"});
  fmt::print("wrote {} train / {} test scenes to {} (seed {})\n", cfg.train_size, cfg.test_size,
             ws.path("data").string(), cfg.seed);
  return 0;
}

int cmd_train(const Options& o) {
  Workspace ws(o.out);
  const auto cfg = load_checked_config(ws, o);
  if (o.stage.empty()) throw ConfigError("train needs --stage (task-head, anf, cond or all)");
  if (o.stage == "all") {
    train_all(ws, cfg, load_training_data(ws, cfg), o.jobs);
    return 0;
  }
  const auto stage = training::parse_stage(o.stage);
  if (stage == training::Stage::kTaskHead) {
    train_head(ws, cfg, load_training_data(ws, cfg));
    return 0;
  }
  const auto t = pipeline::parse_topology(o.topology);
  const auto indices = selected_indices(cfg, o);
  if (stage == training::Stage::kAnf) {
    if (t == Topology::kA1) (void)load_head(ws);
    train_anf_stage(ws, cfg, load_training_data(ws, cfg), t, indices, o.jobs);
  } else {
    check_case(t, o.lambda_case);
    if (t == Topology::kA1) throw ConfigError("approach 1 has no conditional codec");
    for (auto i : indices) ws.require(anf_path(t, predictor_index(t, o.lambda_case, i)), "predictor codec checkpoint");
    train_cond_stage(ws, cfg, load_training_data(ws, cfg), t, o.lambda_case, indices, o.jobs);
  }
  return 0;
}

int cmd_codec(const Options& o) {
  Workspace ws(o.out);
  if (o.action == "encode") return codec_encode(ws, o);
  if (o.action == "decode") return codec_decode(ws, o);
  throw ConfigError("codec needs encode or decode");
}

int cmd_eval(const Options& o) {
  Workspace ws(o.out);
  const auto cfg = load_checked_config(ws, o);
  const auto head = load_head(ws);
  const auto test = load_test_set(ws, cfg);
  const double ceiling = eval::ceiling_map(head, test);

  const std::pair<Topology, int> wanted[] = {
      {Topology::kA1, 1}, {Topology::kA2, 1}, {Topology::kA2, 2}, {Topology::kA3, 1}};
  std::vector<eval::RDCurve> curves;
  nlohmann::json summary;
  summary["ceiling_map_percent"] = ceiling;
  summary["test_scenes"] = test.scenes.size();
  std::vector<std::string> written;
  for (auto [t, c] : wanted) {
    const auto label = eval::curve_label(t, c);
    if (!o.topologies.empty() &&
        std::find(o.topologies.begin(), o.topologies.end(), std::string(pipeline::topology_name(t))) ==
            o.topologies.end()) {
      continue;
    }
    std::string why;
    auto sweep = assemble_sweep(ws, cfg, t, c, why);
    if (!sweep) {
      fmt::print(stderr, "warning: curve {} absent ({})\n", label, why);
      summary["curves"][label] = {{"absent", why}};
      continue;
    }
    auto curve = eval::build_curve(*sweep, head, test, o.jobs);
    const auto rel = "eval/curve_" + label + ".csv";
    ws.write_text(rel, curve.to_csv());
    written.push_back(rel);
    summary["curves"][label] = {
        {"points", curve_json(curve)},
        {"rate_increasing", strictly_monotone(curve, true, &eval::RDPoint::rate_bits)},
        {"mse_decreasing", strictly_monotone(curve, false, &eval::RDPoint::distortion)},
    };
    curves.push_back(std::move(curve));
  }

  const auto report = eval::compare_topologies(curves);
  fmt::print("no-compression mAP (ceiling): {:.2f}%\n\n{}\n", ceiling, report.to_table());
  for (const auto& row : report.rows) {
    nlohmann::json r{{"approach", row.label}};
    r["bd_rate_percent"] = row.bd_rate ? nlohmann::json(*row.bd_rate) : nlohmann::json(nullptr);
    r["reference_percent"] = row.full_scale_reference ? nlohmann::json(*row.full_scale_reference) : nlohmann::json(nullptr);
    if (!row.note.empty()) r["note"] = row.note;
    summary["bd_rate"]["anchor"] = report.anchor;
    summary["bd_rate"]["rows"].push_back(r);
  }
  for (const auto& c : curves) {
    if (c.label != "a1" || c.points.empty()) continue;
    const auto& top = c.points.back();
    const double raw_bytes = static_cast<double>(cfg.features.rows * cfg.features.dim * 4);
    summary["a1_top"] = {{"map_gap_points", ceiling - top.quality},
                         {"rate_bytes", top.rate_bits / 8.0},
                         {"raw_bytes", raw_bytes},
                         {"rate_fraction", top.rate_bits / 8.0 / raw_bytes}};
  }

  const std::size_t n = o.timing_samples.value_or(cfg.timing_samples);
  if (n > 0) {
    const auto gen = cfg.generator();
    const std::size_t top = cfg.lambda_grid.size() - 1;
    fmt::print("\n{:<10} {:>16} {:>16}\n", "approach", "on-board (ms)", "edge-cloud (ms)");
    for (auto t : {Topology::kA1, Topology::kA2, Topology::kA3}) {
      std::optional<codec::AnfCodec> first;
      std::optional<codec::CondCodec> conditional;
      const std::size_t p = predictor_index(t, 1, top);
      if (!ws.exists(anf_path(t, p)) || (t != Topology::kA1 && !ws.exists(cond_path(t, 1, top)))) {
        fmt::print(stderr, "warning: timing for {} skipped (models missing)\n", pipeline::topology_name(t));
        continue;
      }
      first = load_anf(ws, t, p);
      if (t != Topology::kA1) conditional = load_cond(ws, t, 1, top);
      eval::TopologyModels models{&head, &*first, conditional ? &*conditional : nullptr};
      double ms[2];
      for (auto u : {eval::UseCase::kOnBoard, eval::UseCase::kEdgeCloud}) {
        const auto r = eval::timing_bench(t, u, models, gen, cfg.scene, n, cfg.seed);
        ms[u == eval::UseCase::kOnBoard ? 0 : 1] = 1e3 * r.mean_seconds;
        summary["timing"][std::string(pipeline::topology_name(t))][std::string(eval::use_case_name(u))] = {
            {"mean_seconds", r.mean_seconds}, {"stddev_seconds", r.stddev_seconds}, {"samples", r.samples}};
        summary["timing_hardware"] = r.hardware;
      }
      fmt::print("{:<10} {:>16.3f} {:>16.3f}\n", pipeline::topology_name(t), ms[0], ms[1]);
    }
  }
  ws.write_text("eval/summary.json", summary.dump(2) + "\n");
  written.push_back("eval/summary.json");
  ws.record(written);
  fmt::print("\nwrote {}\n", ws.path("eval").string());
  return 0;
}

namespace {

template <typename T>
double max_flow_error(std::uint64_t seed) {
  Rng rng(seed);
  ndgrad::ParameterStore<T> store;
  codec::AnfShape shape;
  const auto flow = codec::AnfTransform<T>::create(store, "flow", shape, rng);
  ndgrad::Graph<T> g;
  const auto x = g.input("x", {0, shape.dim});
  const auto b = flow.forward(g, x);
  g.output("x_back", flow.inverse(g, b.z, b.r));
  ndgrad::Tensor<T> in({64, shape.dim});
  for (auto& v : in.values()) v = static_cast<T>(rng.normal());
  const auto out = ndgrad::evaluate(g, {{"x", in}});
  double worst = 0.0;
  const auto& back = out.at("x_back");
  for (std::size_t i = 0; i < in.size(); ++i) worst = std::max(worst, std::abs(static_cast<double>(back[i] - in[i])));
  return worst;
}

}  // namespace

int cmd_check(const Options& o) {
  const char* env = std::getenv("MMFC_PRECISION");
  const std::string precision = env ? env : "f32";
  if (precision != "f32" && precision != "f64") throw ConfigError("MMFC_PRECISION must be f32 or f64");
  const bool f64 = precision == "f64";
  const double tol = f64 ? 1e-10 : 1e-5;
  double worst = 0.0;
  const std::uint64_t base = o.seed.value_or(1);
  for (std::uint64_t s = 0; s < 20; ++s) {
    worst = std::max(worst, f64 ? max_flow_error<double>(base + s) : max_flow_error<float>(base + s));
  }
  const bool ok = worst <= tol;
  fmt::print("flow invertibility ({}): max abs error {:.3e}, tolerance {:.0e}: {}\n", precision, worst, tol,
             ok ? "ok" : "FAILED");
  return ok ? 0 : 1;
}

}  // namespace mmfc::cli
