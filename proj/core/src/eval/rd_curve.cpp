#include "mmfc/eval/rd_curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "mmfc/parallel.hpp"

namespace mmfc::eval {

using pipeline::Topology;

std::vector<RDPoint> RDCurve::sorted() const {
  auto pts = points;
  std::stable_sort(pts.begin(), pts.end(), [](const RDPoint& a, const RDPoint& b) { return a.rate_bits < b.rate_bits; });
  return pts;
}

std::string RDCurve::to_csv() const {
  std::ostringstream os;
  os << "topology,case,lambda,rate_bits,rate_kbytes,map_percent,mse\n";
  for (const auto& p : sorted()) {
    os << fmt::format("{},{},{},{:.3f},{:.6f},{:.4f},{:.8g}\n", pipeline::topology_name(p.topology), p.lambda_case,
                      p.lambda, p.rate_bits, p.rate_bits / 8.0 / 1000.0, p.quality, p.distortion);
  }
  return os.str();
}

std::string curve_label(Topology t, int lambda_case) {
  if (t == Topology::kA1) return "a1";
  return fmt::format("{}_case{}", pipeline::topology_name(t), lambda_case);
}

RDCurve build_curve(const training::SweepResult& sweep, const pipeline::FusionHead& head, const TestSet& test,
                    std::size_t jobs) {
  RDCurve curve;
  curve.label = curve_label(sweep.topology, sweep.lambda_case);
  const std::size_t n = test.scenes.size();
  for (std::size_t li = 0; li < sweep.lambdas.size(); ++li) {
    std::vector<pipeline::TaskPrediction> preds(n);
    std::vector<double> bits(n), mse(n);
    parallel_for(n, jobs, [&](std::size_t s) {
      const auto tag = static_cast<std::uint8_t>(li);
      pipeline::TopologyResult r;
      switch (sweep.topology) {
        case Topology::kA1:
          r = pipeline::run_approach1(test.features[s], head, sweep.predictors.at(li), tag);
          break;
        case Topology::kA2:
          r = pipeline::run_approach2(test.features[s], head, sweep.predictor_for(li), sweep.conditionals.at(li), tag);
          break;
        case Topology::kA3:
          r = pipeline::run_approach3(test.features[s], head, sweep.predictor_for(li), sweep.conditionals.at(li), tag);
          break;
      }
      preds[s] = std::move(r.prediction);
      bits[s] = static_cast<double>(r.rate_bits);
      mse[s] = r.distortion;
    });
    RDPoint p;
    p.lambda = sweep.lambdas[li];
    p.topology = sweep.topology;
    p.lambda_case = sweep.lambda_case;
    for (std::size_t s = 0; s < n; ++s) {
      p.rate_bits += bits[s] / static_cast<double>(n);
      p.distortion += mse[s] / static_cast<double>(n);
    }
    p.quality = pipeline::mean_average_precision(preds, test.scenes).map_percent;
    curve.points.push_back(p);
  }
  if (curve.points.size() < 4) {
    std::cerr << "warning: curve " << curve.label << " has " << curve.points.size()
              << " points; BD-rate needs 4 for a cubic fit\n";
  }
  return curve;
}

double ceiling_map(const pipeline::FusionHead& head, const TestSet& test) {
  std::vector<pipeline::TaskPrediction> preds;
  preds.reserve(test.features.size());
  for (const auto& f : test.features) preds.push_back(pipeline::run_uncompressed(f, head));
  return pipeline::mean_average_precision(preds, test.scenes).map_percent;
}

namespace {

// Polynomial in the normalised variable t = (q - centre) / half_width.
struct Fit {
  std::vector<double> coef;  // ascending powers of t
  double centre = 0.0;
  double half = 1.0;

  [[nodiscard]] double integral(double q0, double q1) const {
    auto antiderivative = [&](double q) {
      const double t = (q - centre) / half;
      double acc = 0.0, tp = t;
      for (std::size_t k = 0; k < coef.size(); ++k, tp *= t) acc += coef[k] * tp / static_cast<double>(k + 1);
      return acc * half;
    };
    return antiderivative(q1) - antiderivative(q0);
  }
};

Fit fit_log_rate(const RDCurve& c, const std::string& role) {
  const auto pts = c.sorted();
  if (pts.size() < 2) throw ConfigError("bd_rate: " + role + " curve '" + c.label + "' needs at least 2 points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].rate_bits > 0) || !std::isfinite(pts[i].quality)) {
      throw ConfigError("bd_rate: " + role + " curve '" + c.label + "' has a non-positive rate or invalid quality");
    }
    if (i > 0 && !(pts[i].quality > pts[i - 1].quality)) {
      throw ConfigError("bd_rate: quality of " + role + " curve '" + c.label +
                        "' is not strictly increasing with rate");
    }
  }
  Fit f;
  const double qmin = pts.front().quality, qmax = pts.back().quality;
  f.centre = 0.5 * (qmin + qmax);
  f.half = 0.5 * (qmax - qmin);
  const std::size_t terms = std::min<std::size_t>(4, pts.size());
  // Normal equations A^T A c = A^T y, solved by Gaussian elimination.
  std::array<std::array<double, 5>, 4> m{};
  for (const auto& p : pts) {
    const double t = (p.quality - f.centre) / f.half;
    const double y = std::log10(p.rate_bits);
    std::array<double, 4> pw{1, t, t * t, t * t * t};
    for (std::size_t r = 0; r < terms; ++r) {
      for (std::size_t k = 0; k < terms; ++k) m[r][k] += pw[r] * pw[k];
      m[r][4] += pw[r] * y;
    }
  }
  for (std::size_t col = 0; col < terms; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < terms; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    }
    std::swap(m[col], m[piv]);
    for (std::size_t r = 0; r < terms; ++r) {
      if (r == col) continue;
      const double factor = m[r][col] / m[col][col];
      for (std::size_t k = col; k < 5; ++k) m[r][k] -= factor * m[col][k];
    }
  }
  for (std::size_t k = 0; k < terms; ++k) f.coef.push_back(m[k][4] / m[k][k]);
  return f;
}

}  // namespace

double bd_rate(const RDCurve& anchor, const RDCurve& test) {
  const Fit fa = fit_log_rate(anchor, "anchor");
  const Fit ft = fit_log_rate(test, "test");
  const auto pa = anchor.sorted(), pt = test.sorted();
  const double lo = std::max(pa.front().quality, pt.front().quality);
  const double hi = std::min(pa.back().quality, pt.back().quality);
  if (!(hi > lo)) {
    throw ConfigError(fmt::format("bd_rate: quality ranges of '{}' [{:.3f}, {:.3f}] and '{}' [{:.3f}, {:.3f}] do not overlap",
                                  anchor.label, pa.front().quality, pa.back().quality, test.label,
                                  pt.front().quality, pt.back().quality));
  }
  const double delta = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
  return (std::pow(10.0, delta) - 1.0) * 100.0;
}

TopologyReport compare_topologies(const std::vector<RDCurve>& curves) {
  struct Entry {
    const char* label;
    std::optional<double> reference;
  };
  const Entry entries[] = {{"a2_case1", 0.0}, {"a1", -67.7}, {"a3_case1", -50.4}, {"a2_case2", -47.6}};
  auto find = [&](const std::string& label) -> const RDCurve* {
    for (const auto& c : curves) {
      if (c.label == label) return &c;
    }
    return nullptr;
  };
  TopologyReport report;
  report.anchor = "a2_case1";
  const RDCurve* anchor = find(report.anchor);
  for (const auto& e : entries) {
    TopologyRow row;
    row.label = e.label;
    row.full_scale_reference = e.reference;
    const RDCurve* c = find(e.label);
    if (!c) {
      row.note = "absent";
    } else if (!anchor) {
      row.note = "anchor absent";
    } else {
      try {
        row.bd_rate = bd_rate(*anchor, *c);
      } catch (const ConfigError& err) {
        row.note = err.what();
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string TopologyReport::to_table() const {
  std::ostringstream os;
  os << fmt::format("{:<12} {:>16} {:>22}\n", "approach", "BD-rate mAP (%)", "full-scale reference (%)");
  for (const auto& r : rows) {
    const std::string bd = r.bd_rate ? fmt::format("{:.1f}", *r.bd_rate) : std::string("n/a");
    const std::string ref = r.full_scale_reference ? fmt::format("{:.1f}", *r.full_scale_reference) : std::string("-");
    os << fmt::format("{:<12} {:>16} {:>22}", r.label, bd, ref);
    if (!r.note.empty()) os << "  (" << r.note << ")";
    os << '\n';
  }
  os << "anchor: " << anchor << '\n';
  return os.str();
}

}  // namespace mmfc::eval
