#include "mmfc/entropy/cdf_table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmfc::entropy {

std::uint32_t CdfChannel::bin_of(std::int64_t value) const {
  if (value < k_min) return 0;
  if (value > k_max()) return bins - 1;
  return static_cast<std::uint32_t>(value - k_min + 1);
}

std::uint32_t CdfChannel::find(std::uint32_t target) const {
  // Last bin whose start is <= target.
  auto it = std::upper_bound(cum.begin(), cum.end() - 1, target);
  return static_cast<std::uint32_t>(std::distance(cum.begin(), it) - 1);
}

namespace {

CdfChannel build_channel(double loc, double scale) {
  const auto center = static_cast<std::int64_t>(std::floor(loc));
  const std::int64_t half_cap = kMaxSupportBins / 2;
  std::int64_t lo = static_cast<std::int64_t>(std::floor(loc - kSupportHalfWidthScales * scale));
  std::int64_t hi = static_cast<std::int64_t>(std::ceil(loc + kSupportHalfWidthScales * scale));
  lo = std::clamp(std::max(lo, center - half_cap), kSupportMin, kSupportMax);
  hi = std::clamp(std::min(hi, center + half_cap), kSupportMin, kSupportMax);

  const auto support = static_cast<std::size_t>(hi - lo + 1);
  const std::size_t bins = support + 2;
  std::vector<double> pmf(bins);
  pmf.front() = logistic_cdf((static_cast<double>(lo) - 0.5 - loc) / scale);
  pmf.back() = logistic_cdf(-(static_cast<double>(hi) + 0.5 - loc) / scale);
  for (std::size_t j = 0; j < support; ++j) {
    pmf[j + 1] = logistic_bin_mass(loc, scale, static_cast<double>(lo + static_cast<std::int64_t>(j)));
  }
  for (auto& p : pmf) p = std::max(p, kPmfFloor);
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);

  // Every bin gets one unit; the rest is shared by largest remainder, ties to
  // the lower bin index, so construction is deterministic.
  const double spare = static_cast<double>(kProbTotal - bins);
  std::vector<std::uint32_t> freq(bins);
  std::vector<double> remainder(bins);
  std::uint64_t assigned = 0;
  for (std::size_t j = 0; j < bins; ++j) {
    const double share = pmf[j] / total * spare;
    const double whole = std::floor(share);
    freq[j] = 1 + static_cast<std::uint32_t>(whole);
    remainder[j] = share - whole;
    assigned += freq[j];
  }
  std::vector<std::size_t> order(bins);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < kProbTotal; ++k, ++assigned) ++freq[order[k % bins]];

  CdfChannel ch;
  ch.k_min = static_cast<std::int32_t>(lo);
  ch.bins = static_cast<std::uint32_t>(bins);
  ch.cum.resize(bins + 1);
  ch.cum[0] = 0;
  for (std::size_t j = 0; j < bins; ++j) ch.cum[j + 1] = ch.cum[j] + freq[j];
  return ch;
}

}  // namespace

CdfTable CdfTable::build(const QuantizedEntropyModel& model) {
  CdfTable table;
  table.channels.reserve(model.channels());
  for (std::size_t c = 0; c < model.channels(); ++c) {
    table.channels.push_back(build_channel(model.loc(c), model.scale(c)));
  }
  return table;
}

double CdfTable::cost_bits(std::span<const std::int32_t> values) const {
  double bits = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const CdfChannel& ch = channels[i % channels.size()];
    const std::uint32_t bin = ch.bin_of(values[i]);
    bits += kProbBits - std::log2(static_cast<double>(ch.freq(bin)));
    if (ch.is_tail(bin)) bits += 32.0;
  }
  return bits;
}

}  // namespace mmfc::entropy
