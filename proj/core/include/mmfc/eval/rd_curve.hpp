#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmfc/pipeline/topology.hpp"
#include "mmfc/training/sweep.hpp"

namespace mmfc::eval {

struct RDPoint {
  double rate_bits = 0.0;  // mean total bits per sample
  double quality = 0.0;    // mAP %, or another quality in dB for codec-only curves
  double lambda = 0.0;
  double distortion = 0.0;  // mean MSE of the coded maps
  pipeline::Topology topology = pipeline::Topology::kA1;
  int lambda_case = 1;
};

struct RDCurve {
  std::string label;
  std::vector<RDPoint> points;

  /// Points ordered by rate.
  [[nodiscard]] std::vector<RDPoint> sorted() const;
  [[nodiscard]] std::string to_csv() const;
};

/// Held-out scenes and their backbone features.
struct TestSet {
  std::vector<pipeline::SceneSample> scenes;
  std::vector<pipeline::SceneFeatures> features;
};

/// Curve label used in reports and file names: a1, a2_case1, a2_case2, a3_case1.
std::string curve_label(pipeline::Topology t, int lambda_case);

/// One point per lambda: mean total stream bits and mAP over the test set.
/// Emits a warning on stderr when fewer than 4 points result.
RDCurve build_curve(const training::SweepResult& sweep, const pipeline::FusionHead& head, const TestSet& test,
                    std::size_t jobs = 1);

/// mAP of the frozen head on uncompressed features.
double ceiling_map(const pipeline::FusionHead& head, const TestSet& test);

/// Bjontegaard delta rate of `test` against `anchor`, in percent: cubic
/// least-squares fit of log10(rate) over quality, averaged over the common
/// quality interval. Throws ConfigError for fewer than 2 points, quality not
/// strictly increasing with rate, or no quality overlap.
double bd_rate(const RDCurve& anchor, const RDCurve& test);

struct TopologyRow {
  std::string label;
  std::optional<double> bd_rate;         // vs. the anchor; nullopt if the curve is absent
  std::optional<double> full_scale_reference;  // percent
  std::string note;
};

struct TopologyReport {
  std::string anchor;
  std::vector<TopologyRow> rows;

  [[nodiscard]] std::string to_table() const;
};

/// BD-rates of a1, a3_case1, a2_case2 against a2_case1, in that order after
/// the anchor's own row. Missing curves are listed as absent.
TopologyReport compare_topologies(const std::vector<RDCurve>& curves);

}  // namespace mmfc::eval
