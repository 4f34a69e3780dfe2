#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mmfc/ndgrad/tensor.hpp"
#include "mmfc/pipeline/scene.hpp"

namespace mmfc::pipeline {

/// Per-cell softmax scores, shape {G*G, C+1}; column 0 is "empty".
struct TaskPrediction {
  ndgrad::Tensor<float> scores;
};

struct EvalMetrics {
  double map_percent = 0.0;
  /// AP per class 1..C; NaN for classes without positives (excluded from the mean).
  std::vector<double> class_ap;
  std::vector<bool> class_present;
};

/// All-point interpolated average precision of a ranking. Items with equal
/// score are taken as one group, so the result does not depend on their order.
/// positive[i] != 0 marks a positive. Returns NaN when there are none.
double average_precision(std::span<const double> scores, std::span<const std::uint8_t> positive);

EvalMetrics mean_average_precision(std::span<const TaskPrediction> preds, std::span<const SceneSample> truths);

}  // namespace mmfc::pipeline
