#pragma once

#include <cstdint>
#include <vector>

#include "mmfc/entropy/entropy_model.hpp"

namespace mmfc::entropy {

inline constexpr int kProbBits = 16;
inline constexpr std::uint32_t kProbTotal = 1u << kProbBits;
inline constexpr double kSupportHalfWidthScales = 16.0;
/// Upper bound on coded support bins per channel (beyond it, values escape).
inline constexpr std::int64_t kMaxSupportBins = 4095;
inline constexpr std::int64_t kSupportMin = -(1 << 15);
inline constexpr std::int64_t kSupportMax = (1 << 15) - 1;

/// Fixed-point CDF of one channel. Bin 0 is the low tail, bin bins-1 the high
/// tail; bin j in between codes the integer k_min + j - 1.
struct CdfChannel {
  std::int32_t k_min = 0;
  std::uint32_t bins = 0;
  std::vector<std::uint32_t> cum;  // bins + 1 entries, 0 .. kProbTotal

  [[nodiscard]] std::int32_t k_max() const { return k_min + static_cast<std::int32_t>(bins) - 3; }
  [[nodiscard]] std::uint32_t bin_of(std::int64_t value) const;
  [[nodiscard]] bool is_tail(std::uint32_t bin) const { return bin == 0 || bin + 1 == bins; }
  [[nodiscard]] std::uint32_t freq(std::uint32_t bin) const { return cum[bin + 1] - cum[bin]; }
  /// Bin whose interval contains the 16-bit target.
  [[nodiscard]] std::uint32_t find(std::uint32_t target) const;

  friend bool operator==(const CdfChannel&, const CdfChannel&) = default;
};

struct CdfTable {
  std::vector<CdfChannel> channels;

  static CdfTable build(const QuantizedEntropyModel& model);
  static CdfTable build(const EntropyModel& model) { return build(QuantizedEntropyModel::from(model)); }

  [[nodiscard]] std::size_t size() const { return channels.size(); }
  /// Exact code length in bits of `values` (channel i % size()), including escapes.
  [[nodiscard]] double cost_bits(std::span<const std::int32_t> values) const;

  friend bool operator==(const CdfTable&, const CdfTable&) = default;
};

}  // namespace mmfc::entropy
