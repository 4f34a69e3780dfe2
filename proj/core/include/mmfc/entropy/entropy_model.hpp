#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mmfc/entropy/quantize.hpp"
#include "mmfc/ndgrad/tensor.hpp"

namespace mmfc::entropy {

inline constexpr double kMinScale = 1e-6;
/// pmf floor, equal to one unit of the 16-bit coder precision.
inline constexpr double kPmfFloor = 1.0 / 65536.0;
/// Fixed-point granularity of quantized (loc, scale): 1/256.
inline constexpr int kParamFracBits = 8;

/// Per-channel discretized logistic: channel c has location loc[c] and
/// scale[c] > 0. When a model covers every element of a latent (one channel
/// per element) it is "element-wise"; otherwise channels index columns.
struct EntropyModel {
  std::vector<double> loc;
  std::vector<double> scale;

  [[nodiscard]] std::size_t channels() const { return loc.size(); }

  /// scale = softplus(raw_scale), clamped to kMinScale.
  static EntropyModel from_unconstrained(std::span<const float> loc, std::span<const float> raw_scale);
  void validate() const;
};

/// (loc, scale) rounded to multiples of 1/256; the only form tables are built from.
struct QuantizedEntropyModel {
  std::vector<std::int32_t> loc_q;
  std::vector<std::int32_t> scale_q;

  static QuantizedEntropyModel from(const EntropyModel& model);
  [[nodiscard]] std::size_t channels() const { return loc_q.size(); }
  [[nodiscard]] double loc(std::size_t c) const;
  [[nodiscard]] double scale(std::size_t c) const;
  [[nodiscard]] std::vector<std::uint8_t> serialize() const;
  static QuantizedEntropyModel parse(std::span<const std::uint8_t> bytes);
  /// FNV-1a over serialize().
  [[nodiscard]] std::uint64_t hash() const;
};

/// logistic CDF
double logistic_cdf(double x);
/// Mass of logistic(loc, scale) on [k - 1/2, k + 1/2], without flooring.
double logistic_bin_mass(double loc, double scale, double k);

/// Floored pmf of integer bin k of a channel (tails handled by CdfTable).
double bin_pmf(const EntropyModel& model, std::size_t channel, std::int64_t k);

/// Sum of -log2 p over the latent. kNoise: likelihood of each (noisy) value
/// under the logistic convolved with a unit bin, floored at 1e-9 like the
/// training graph. kRound: values are rounded and charged the fixed-point pmf
/// of the coder tables, plus 32 bits per tail escape.
double estimate_rate_bits(const ndgrad::Tensor<float>& latent, const EntropyModel& model, QuantMode mode);

}  // namespace mmfc::entropy
