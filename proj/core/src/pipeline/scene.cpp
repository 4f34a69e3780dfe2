#include "mmfc/pipeline/scene.hpp"

#include <algorithm>
#include <string>

#include "mmfc/error.hpp"
#include "mmfc/rng.hpp"

namespace mmfc::pipeline {

void SceneConfig::validate() const {
  if (grid == 0) throw ConfigError("scene: grid must be positive");
  if (classes == 0 || classes > 254) throw ConfigError("scene: classes must be in 1..254");
  if (!(density >= 0.0 && density < 1.0)) {
    throw ConfigError("scene: density must lie in [0, 1), got " + std::to_string(density));
  }
}

std::size_t SceneSample::object_count() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](auto c) { return c != 0; }));
}

SceneSample generate_scene(std::uint64_t seed, const SceneConfig& cfg) {
  cfg.validate();
  Rng rng(seed, 0x5ce7e);
  SceneSample s;
  s.grid = cfg.grid;
  s.classes = cfg.classes;
  s.seed = seed;
  s.cells.resize(cfg.cells());
  for (auto& cell : s.cells) {
    const bool occupied = rng.bernoulli(cfg.density);
    const auto cls = 1 + rng.below(cfg.classes);
    cell = occupied ? static_cast<std::uint8_t>(cls) : 0;
  }
  return s;
}

}  // namespace mmfc::pipeline
