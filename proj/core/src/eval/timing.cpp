#include "mmfc/eval/timing.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

namespace mmfc::eval {

using pipeline::Topology;

std::string_view use_case_name(UseCase u) { return u == UseCase::kOnBoard ? "on-board" : "edge-cloud"; }

std::string hardware_descriptor() {
  std::string model = "unknown cpu";
  std::ifstream in("/proc/cpuinfo");
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) model = line.substr(line.find_first_not_of(' ', colon + 1));
      break;
    }
  }
  return model + ", " + std::to_string(std::max(1u, std::thread::hardware_concurrency())) + " hardware threads";
}

namespace {

// Work of one sample; the result is folded into `sink` so nothing is elided.
double run_once(Topology topology, UseCase use_case, const TopologyModels& m, const pipeline::SceneSample& scene,
                const pipeline::FeatureGenerator& gen) {
  const auto y = pipeline::scene_features(scene, gen);
  if (use_case == UseCase::kOnBoard) {
    pipeline::TopologyResult r;
    if (topology == Topology::kA1) {
      r = pipeline::run_approach1(y, *m.head, *m.first);
    } else if (topology == Topology::kA2) {
      r = pipeline::run_approach2(y, *m.head, *m.first, *m.conditional);
    } else {
      r = pipeline::run_approach3(y, *m.head, *m.first, *m.conditional);
    }
    return static_cast<double>(r.rate_bits) + r.prediction.scores[0];
  }
  if (topology == Topology::kA1) {
    return static_cast<double>(m.first->compress(m.head->fuse(y.camera, y.lidar), {1, 0}).size_bits());
  }
  const auto approach = static_cast<std::uint8_t>(topology);
  const auto& first = topology == Topology::kA2 ? y.camera : y.lidar;
  const auto& second = topology == Topology::kA2 ? y.lidar : y.camera;
  const auto s1 = m.first->compress(first, {approach, 0});
  const auto first_hat = m.first->decompress(s1);
  const auto s2 = m.conditional->compress(second, first_hat, {approach, 0});
  return static_cast<double>(s1.size_bits() + s2.size_bits());
}

}  // namespace

TimingReport timing_bench(Topology topology, UseCase use_case, const TopologyModels& models,
                          const pipeline::FeatureGenerator& gen, const pipeline::SceneConfig& scene_cfg,
                          std::size_t n, std::uint64_t seed) {
  TimingReport rep;
  rep.topology = topology;
  rep.use_case = use_case;
  rep.hardware = hardware_descriptor();
  if (n == 0) return rep;
  if (!models.head || !models.first || (topology != Topology::kA1 && !models.conditional)) {
    throw DependencyError("timing_bench: models for topology " + std::string(pipeline::topology_name(topology)) +
                          " are incomplete");
  }
  std::vector<double> secs(n);
  volatile double sink = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto scene = pipeline::generate_scene(derive_seed(seed, i), scene_cfg);
    const auto start = std::chrono::steady_clock::now();
    sink = sink + run_once(topology, use_case, models, scene, gen);
    secs[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  double mean = 0.0;
  for (double s : secs) mean += s / static_cast<double>(n);
  double var = 0.0;
  for (double s : secs) var += (s - mean) * (s - mean);
  rep.samples = n;
  rep.mean_seconds = mean;
  rep.stddev_seconds = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
  return rep;
}

}  // namespace mmfc::eval
