#include "mmfc/pipeline/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mmfc/error.hpp"

namespace mmfc::pipeline {

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw ShapeError("average_precision: length mismatch");
  const auto total_pos = static_cast<std::size_t>(
      std::count_if(positive.begin(), positive.end(), [](auto v) { return v != 0; }));
  if (total_pos == 0) return std::numeric_limits<double>::quiet_NaN();

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // One precision/recall point per group of tied scores.
  std::vector<double> precision, recall;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += positive[order[j]] != 0 ? 1 : 0;
      ++j;
    }
    seen = j;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(seen));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(total_pos));
    i = j;
  }
  // Precision envelope from the right, then area over recall steps.
  for (std::size_t i = precision.size() - 1; i-- > 0;) precision[i] = std::max(precision[i], precision[i + 1]);
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < precision.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

EvalMetrics mean_average_precision(std::span<const TaskPrediction> preds, std::span<const SceneSample> truths) {
  if (preds.size() != truths.size()) throw ShapeError("mean_average_precision: prediction/truth count mismatch");
  EvalMetrics m;
  if (preds.empty()) return m;
  const std::size_t classes = truths.front().classes;
  const std::size_t cells = truths.front().cells.size();
  for (std::size_t s = 0; s < preds.size(); ++s) {
    const auto& sc = preds[s].scores;
    if (sc.rank() != 2 || sc.rows() != cells || sc.cols() != classes + 1 || truths[s].cells.size() != cells) {
      throw ShapeError("mean_average_precision: sample " + std::to_string(s) + " has mismatched shape");
    }
  }
  std::vector<double> scores(preds.size() * cells);
  std::vector<std::uint8_t> pos(scores.size());
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 1; c <= classes; ++c) {
    for (std::size_t s = 0; s < preds.size(); ++s) {
      for (std::size_t k = 0; k < cells; ++k) {
        scores[s * cells + k] = preds[s].scores.at(k, c);
        pos[s * cells + k] = truths[s].cells[k] == c ? 1 : 0;
      }
    }
    const double ap = average_precision(scores, pos);
    m.class_ap.push_back(ap);
    m.class_present.push_back(!std::isnan(ap));
    if (!std::isnan(ap)) {
      sum += ap;
      ++present;
    }
  }
  m.map_percent = present ? 100.0 * sum / static_cast<double>(present) : 0.0;
  return m;
}

}  // namespace mmfc::pipeline
