#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <string_view>

#include "criteria.hpp"
#include "mmfc/eval/timing.hpp"
#include "mmfc/training/sweep.hpp"

namespace mmfc::acceptance {

using pipeline::Topology;

namespace {

constexpr double kSweepBudgetSeconds = 2 * 3600.0;

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

bool strictly_monotone(const eval::RDCurve& c, bool increasing, double eval::RDPoint::*field) {
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    const double a = c.points[i - 1].*field, b = c.points[i].*field;
    if (increasing ? !(b > a) : !(b < a)) return false;
  }
  return c.points.size() == training::kGridSize;
}

std::string curve_summary(const eval::RDCurve& c, std::string_view quality = "mAP") {
  std::string s = c.label + ":";
  for (const auto& p : c.points) {
    s += fmt::format(" ({:.0f} b, mse {:.4f}, {} {:.2f})", p.rate_bits, p.distortion, quality, p.quality);
  }
  return s;
}

// Camera coded with and without the lidar map as the condition, on features
// that contain only the shared nuisance component. Quality is PSNR of the
// camera map with a peak-to-peak range of 2. Rate is the entropy-coded
// payload: the container header differs by the 8-byte condition digest, which
// is bookkeeping rather than coding cost.
struct CondPair {
  eval::RDCurve unconditional{"unconditional", {}};
  eval::RDCurve conditional{"conditional", {}};
};

CondPair conditional_pair(const ExperimentConfig& base, double rho) {
  ExperimentConfig cfg = base;
  auto& f = cfg.features;
  f.camera_class_gain = f.camera_occupancy_gain = f.camera_clutter_gain = 0;
  f.lidar_class_gain = f.lidar_occupancy_gain = 0;
  f.camera_confusion = f.lidar_confusion = 0;
  f.nuisance_gain = 1.0;
  f.rho = rho;
  const auto data = make_training_data(cfg);
  const auto test = make_test_set(cfg);
  std::vector<ndgrad::Tensor<float>> xs, cs;
  for (const auto& y : data.features) {
    xs.push_back(y.camera.values);
    cs.push_back(y.lidar.values);
  }
  const auto codec_cfg = codec::CodecConfig::for_shape(f.rows, f.dim, Modality::kCamera);
  auto psnr = [](double mse) { return 10 * std::log10(4.0 / mse); };
  CondPair out;
  for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
    auto tc = cfg.codec_train_config();
    tc.lambda = cfg.lambda_grid[i];
    tc.seed = training::lambda_seed(tc.seed, i);
    tc.stage = training::Stage::kAnf;
    const auto u = training::train_anf_on(tc, xs, codec_cfg).model;
    tc.stage = training::Stage::kCond;
    const auto c = training::train_cond_on(tc, xs, cs, codec_cfg).model;
    double ub = 0, cb = 0, ue = 0, ce = 0;
    for (const auto& y : test.features) {
      const auto us = u.compress(y.camera);
      ub += 8.0 * static_cast<double>(us.payload.size());
      ue += ndgrad::mean_squared_error(y.camera.values, u.decompress(us).values);
      const auto cstream = c.compress(y.camera, y.lidar);
      cb += 8.0 * static_cast<double>(cstream.payload.size());
      ce += ndgrad::mean_squared_error(y.camera.values, c.decompress(cstream, y.lidar).values);
    }
    const auto n = static_cast<double>(test.features.size());
    out.unconditional.points.push_back({ub / n, psnr(ue / n), tc.lambda, ue / n});
    out.conditional.points.push_back({cb / n, psnr(ce / n), tc.lambda, ce / n});
  }
  return out;
}

std::string bd_or_error(const eval::RDCurve& anchor, const eval::RDCurve& test, std::optional<double>& value) {
  try {
    value = eval::bd_rate(anchor, test);
    return fmt::format("{:.2f}%", *value);
  } catch (const std::exception& e) {
    return fmt::format("undefined ({})", e.what());
  }
}

}  // namespace

Scale scale_from_env() {
  Scale s;
  const char* env = std::getenv("MMFC_ACCEPTANCE_SCALE");
  const std::string name = env ? env : "reduced";
  if (name == "full") {
    s.name = "full desk scale";
  } else {
    // A quarter of the training scenes and 40 instead of 50 epochs, so the
    // suite finishes in well under an hour on one core.
    s.name = "reduced";
    s.cfg.train_size = 500;
    s.cfg.test_size = 200;
    s.cfg.codec_epochs = 40;
  }
  const ExperimentConfig full;
  s.work_fraction = static_cast<double>(s.cfg.train_size * s.cfg.codec_epochs) /
                    static_cast<double>(full.train_size * full.codec_epochs);
  return s;
}

void run_experiment(const Scale& scale, std::vector<Outcome>& out) {
  const auto& cfg = scale.cfg;
  fmt::print("experiment: {} scale, {} train / {} test scenes, {} codec epochs, {} head epochs\n", scale.name,
             cfg.train_size, cfg.test_size, cfg.codec_epochs, cfg.head_epochs);
  const auto data = make_training_data(cfg);
  const auto test = make_test_set(cfg);

  Stopwatch training_clock;
  const auto head = training::train_task_head(cfg.head_train_config(), data, cfg.head_config()).model;
  const double head_seconds = training_clock.seconds();
  const auto base = cfg.codec_train_config();
  training::SweepOptions opts;
  opts.grid = cfg.lambda_grid;
  auto a1 = training::sweep(base, data, head, Topology::kA1, 1, opts);
  auto a2c2 = training::sweep(base, data, head, Topology::kA2, 2, opts);
  auto cached = opts;
  cached.predictor_cache = [&](Modality m, std::size_t i) -> const codec::AnfCodec* {
    return m == Modality::kCamera ? &a2c2.predictors.at(i) : nullptr;
  };
  auto a2c1 = training::sweep(base, data, head, Topology::kA2, 1, cached);
  auto a3c1 = training::sweep(base, data, head, Topology::kA3, 1, opts);
  const double train_seconds = training_clock.seconds();
  // Training cost is linear in scenes x epochs; the head keeps its epoch count.
  const ExperimentConfig full;
  const double head_fraction = static_cast<double>(cfg.train_size * cfg.head_epochs) /
                               static_cast<double>(full.train_size * full.head_epochs);
  const double projected = head_seconds / head_fraction + (train_seconds - head_seconds) / scale.work_fraction;
  fmt::print("trained head + 21 codecs in {:.0f} s\n", train_seconds);

  Stopwatch eval_clock;
  std::vector<eval::RDCurve> curves;
  for (const auto* s : {&a1, &a2c1, &a2c2, &a3c1}) curves.push_back(eval::build_curve(*s, head, test));
  const double ceiling = eval::ceiling_map(head, test);
  for (const auto& c : curves) fmt::print("  {}\n", curve_summary(c));
  fmt::print("  ceiling mAP {:.2f}%, evaluation {:.0f} s\n", ceiling, eval_clock.seconds());

  // 4: trained codecs join the random ones.
  std::vector<const codec::AnfCodec*> anf;
  std::vector<const codec::CondCodec*> cond;
  for (const auto* s : {&a1, &a2c2, &a3c1}) {
    for (const auto& p : s->predictors) anf.push_back(&p);
  }
  for (const auto* s : {&a2c1, &a2c2, &a3c1}) {
    for (const auto& c : s->conditionals) cond.push_back(&c);
  }
  out.push_back(flow_invertibility(anf, cond));

  // 6
  {
    bool monotone = true;
    std::string detail;
    for (const auto& c : curves) {
      const bool rate = strictly_monotone(c, true, &eval::RDPoint::rate_bits);
      const bool mse = strictly_monotone(c, false, &eval::RDPoint::distortion);
      monotone = monotone && rate && mse;
      detail += fmt::format("{} rate {} mse {}; ", c.label, rate ? "up" : "NOT up", mse ? "down" : "NOT down");
    }
    const bool measured = scale.work_fraction >= 1.0;
    detail += fmt::format("sweep training {:.0f} s at this scale, {} {:.0f} s at full desk scale (limit {:.0f} s)",
                          train_seconds, measured ? "measured" : "projected", projected, kSweepBudgetSeconds);
    out.push_back({6, "RD monotonicity", monotone && projected < kSweepBudgetSeconds, detail});
  }

  // 7
  {
    Stopwatch clock;
    const auto hi = conditional_pair(cfg, 0.9);
    const auto zero = conditional_pair(cfg, 0.0);
    std::optional<double> bd_hi, bd_zero;
    const auto s_hi = bd_or_error(hi.unconditional, hi.conditional, bd_hi);
    const auto s_zero = bd_or_error(zero.unconditional, zero.conditional, bd_zero);
    for (const auto* p : {&hi, &zero}) {
      fmt::print("  {}\n  {}\n", curve_summary(p->unconditional, "psnr"), curve_summary(p->conditional, "psnr"));
    }
    const bool pass = bd_hi && *bd_hi <= -5.0 && bd_zero && std::abs(*bd_zero) <= 2.0;
    out.push_back({7, "conditional coding gain", pass,
                   fmt::format("BD-rate conditional vs unconditional: rho 0.9 {} (want <= -5%), rho 0 {} (want within "
                               "+-2%), {:.0f} s",
                               s_hi, s_zero, clock.seconds())});
  }

  // 8
  {
    std::optional<double> bd;
    const auto s = bd_or_error(curves[1], curves[0], bd);
    const auto report = eval::compare_topologies(curves);
    fmt::print("\n{}\n", report.to_table());
    out.push_back({8, "topology ordering", bd && *bd <= -10.0,
                   fmt::format("BD-rate a1 vs a2_case1 {} (want <= -10%); four-way table above is reported only", s)});
  }

  // 9
  {
    const auto& top = curves[0].points.back();
    const double raw_bytes = static_cast<double>(cfg.features.rows * cfg.features.dim * sizeof(float));
    const double gap = ceiling - top.quality;
    const double fraction = top.rate_bits / 8.0 / raw_bytes;
    out.push_back({9, "near-ceiling accuracy", gap <= 2.0 && fraction < 0.10,
                   fmt::format("top a1 point mAP {:.2f}% vs ceiling {:.2f}% (gap {:.2f}, limit 2), rate {:.0f} of {:.0f} "
                               "raw bytes ({:.1f}%, limit 10%)",
                               top.quality, ceiling, gap, top.rate_bits / 8.0, raw_bytes, 100 * fraction)});
  }

  // 12
  {
    constexpr std::size_t kSamples = 200;
    const auto gen = cfg.generator();
    const std::size_t top = cfg.lambda_grid.size() - 1;
    std::map<std::pair<Topology, eval::UseCase>, double> ms;
    const std::pair<Topology, eval::TopologyModels> setups[] = {
        {Topology::kA1, {&head, &a1.predictors.at(top), nullptr}},
        {Topology::kA2, {&head, &a2c1.predictor_for(top), &a2c1.conditionals.at(top)}},
        {Topology::kA3, {&head, &a3c1.predictor_for(top), &a3c1.conditionals.at(top)}},
    };
    std::string hardware;
    for (const auto& [t, models] : setups) {
      for (auto u : {eval::UseCase::kOnBoard, eval::UseCase::kEdgeCloud}) {
        const auto r = eval::timing_bench(t, u, models, gen, cfg.scene, kSamples, cfg.seed);
        ms[{t, u}] = 1e3 * r.mean_seconds;
        hardware = r.hardware;
      }
    }
    bool pass = true;
    std::string detail;
    for (auto t : {Topology::kA1, Topology::kA2, Topology::kA3}) {
      const double on = ms[{t, eval::UseCase::kOnBoard}], edge = ms[{t, eval::UseCase::kEdgeCloud}];
      pass = pass && edge < on;
      detail += fmt::format("{} on-board {:.3f} ms / edge-cloud {:.3f} ms; ", pipeline::topology_name(t), on, edge);
    }
    for (auto u : {eval::UseCase::kOnBoard, eval::UseCase::kEdgeCloud}) {
      pass = pass && ms[{Topology::kA1, u}] < ms[{Topology::kA2, u}] && ms[{Topology::kA1, u}] < ms[{Topology::kA3, u}];
    }
    detail += fmt::format("n = {}, {}", kSamples, hardware);
    out.push_back({12, "timing structure", pass, detail});
  }
}

}  // namespace mmfc::acceptance
