#pragma once

#include <cstdint>
#include <vector>

namespace mmfc::pipeline {

struct SceneConfig {
  std::size_t grid = 8;
  std::size_t classes = 4;
  double density = 0.25;

  [[nodiscard]] std::size_t cells() const { return grid * grid; }
  void validate() const;
};

/// G x G grid; cell value 0 is empty, 1..C a class.
struct SceneSample {
  std::size_t grid = 0;
  std::size_t classes = 0;
  std::vector<std::uint8_t> cells;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t object_count() const;
  friend bool operator==(const SceneSample&, const SceneSample&) = default;
};

/// Independent Bernoulli(density) occupancy per cell with a uniform class.
SceneSample generate_scene(std::uint64_t seed, const SceneConfig& cfg);

}  // namespace mmfc::pipeline
