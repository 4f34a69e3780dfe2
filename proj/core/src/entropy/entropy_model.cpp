#include "mmfc/entropy/entropy_model.hpp"

#include <algorithm>
#include <cmath>

#include "mmfc/bytes.hpp"
#include "mmfc/entropy/cdf_table.hpp"
#include "mmfc/hash.hpp"

namespace mmfc::entropy {

double logistic_cdf(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logistic_bin_mass(double loc, double scale, double k) {
  const double hi = (k + 0.5 - loc) / scale;
  const double lo = (k - 0.5 - loc) / scale;
  // Subtract on whichever tail keeps precision.
  if (lo + hi > 0) return logistic_cdf(-lo) - logistic_cdf(-hi);
  return logistic_cdf(hi) - logistic_cdf(lo);
}

EntropyModel EntropyModel::from_unconstrained(std::span<const float> loc, std::span<const float> raw_scale) {
  if (loc.size() != raw_scale.size()) throw ShapeError("entropy model: loc/scale length mismatch");
  EntropyModel m;
  m.loc.assign(loc.begin(), loc.end());
  m.scale.resize(raw_scale.size());
  for (std::size_t c = 0; c < raw_scale.size(); ++c) {
    const double r = raw_scale[c];
    const double sp = r > 0 ? r + std::log1p(std::exp(-r)) : std::log1p(std::exp(r));
    m.scale[c] = std::max(sp, kMinScale);
  }
  return m;
}

void EntropyModel::validate() const {
  if (loc.size() != scale.size() || loc.empty()) throw ConfigError("entropy model: bad channel count");
  for (std::size_t c = 0; c < loc.size(); ++c) {
    if (!std::isfinite(loc[c]) || !std::isfinite(scale[c]) || scale[c] < kMinScale) {
      throw ConfigError("entropy model: invalid parameters on channel " + std::to_string(c));
    }
  }
}

QuantizedEntropyModel QuantizedEntropyModel::from(const EntropyModel& model) {
  model.validate();
  constexpr double unit = 1 << kParamFracBits;
  constexpr double loc_limit = static_cast<double>(kSupportMax) * unit;
  QuantizedEntropyModel q;
  q.loc_q.resize(model.channels());
  q.scale_q.resize(model.channels());
  for (std::size_t c = 0; c < model.channels(); ++c) {
    q.loc_q[c] = static_cast<std::int32_t>(std::clamp(std::nearbyint(model.loc[c] * unit), -loc_limit, loc_limit));
    q.scale_q[c] = static_cast<std::int32_t>(std::clamp(std::nearbyint(model.scale[c] * unit), 1.0, loc_limit));
  }
  return q;
}

double QuantizedEntropyModel::loc(std::size_t c) const {
  return static_cast<double>(loc_q[c]) / (1 << kParamFracBits);
}

double QuantizedEntropyModel::scale(std::size_t c) const {
  return static_cast<double>(scale_q[c]) / (1 << kParamFracBits);
}

std::vector<std::uint8_t> QuantizedEntropyModel::serialize() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(channels()));
  for (std::size_t c = 0; c < channels(); ++c) {
    w.i32(loc_q[c]);
    w.i32(scale_q[c]);
  }
  return w.take();
}

QuantizedEntropyModel QuantizedEntropyModel::parse(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  QuantizedEntropyModel q;
  const std::uint32_t n = r.u32();
  for (std::uint32_t c = 0; c < n; ++c) {
    q.loc_q.push_back(r.i32());
    q.scale_q.push_back(r.i32());
    if (q.scale_q.back() < 1) throw IntegrityError("quantized entropy model: non-positive scale");
  }
  return q;
}

std::uint64_t QuantizedEntropyModel::hash() const { return fnv1a(serialize()); }

double bin_pmf(const EntropyModel& model, std::size_t channel, std::int64_t k) {
  if (channel >= model.channels()) throw ShapeError("bin_pmf: channel out of range");
  return std::max(logistic_bin_mass(model.loc[channel], model.scale[channel], static_cast<double>(k)), kPmfFloor);
}

double estimate_rate_bits(const ndgrad::Tensor<float>& latent, const EntropyModel& model, QuantMode mode) {
  const std::size_t channels = model.channels();
  if (channels != latent.cols() && channels != latent.size()) {
    throw ShapeError("estimate_rate_bits: model has " + std::to_string(channels) +
                     " channels for latent " + ndgrad::to_string(latent.shape()));
  }
  if (mode == QuantMode::kNoise) {
    double bits = 0.0;
    for (std::size_t i = 0; i < latent.size(); ++i) {
      const std::size_t c = i % channels;
      const double p = logistic_bin_mass(model.loc[c], model.scale[c], latent[i]);
      bits -= std::log2(std::max(p, 1e-9));
    }
    return bits;
  }
  const CdfTable table = CdfTable::build(model);
  std::vector<std::int32_t> values(latent.size());
  for (std::size_t i = 0; i < latent.size(); ++i) {
    values[i] = static_cast<std::int32_t>(std::nearbyint(latent[i]));
  }
  return table.cost_bits(values);
}

}  // namespace mmfc::entropy
