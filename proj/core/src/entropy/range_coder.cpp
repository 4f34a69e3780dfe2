#include "mmfc/entropy/range_coder.hpp"

#include <algorithm>

namespace mmfc::entropy {

namespace {
// 16-bit marker coded after the last symbol. A minimally flushed
// stream cut short still decodes to *some* symbol sequence, so without it
// truncation would go unnoticed.
constexpr std::uint16_t kTerminator = 0xA5C3;
}  // namespace

namespace {
constexpr std::uint32_t kTop = 1u << 24;
constexpr std::uint64_t kWindow = 0xFFFFFFFFull;
}  // namespace

void RangeEncoder::encode(std::uint32_t start, std::uint32_t freq) {
  touched_ = true;
  const std::uint32_t r = range_ >> kProbBits;
  low_ += static_cast<std::uint64_t>(r) * start;
  range_ = r * freq;
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::shift_low() {
  if (low_ < 0xFF000000ull || low_ > kWindow) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    if (has_cache_) out_.push_back(static_cast<std::uint8_t>(cache_ + carry));
    for (; pending_ff_ > 0; --pending_ff_) out_.push_back(static_cast<std::uint8_t>(0xFF + carry));
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
    has_cache_ = true;
  } else {
    ++pending_ff_;
  }
  low_ = (low_ << 8) & kWindow;
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  if (!touched_) return {};
  // Pick the value in [low, low + range) with the most trailing zero bytes.
  int n = 0;
  std::uint64_t value = low_;
  for (; n <= 4; ++n) {
    const std::uint64_t mask = n == 4 ? 0 : (kWindow >> (8 * n));
    value = (low_ + mask) & ~mask;
    if (value < low_ + range_) break;
  }
  low_ = value;
  for (int i = 0; i <= n; ++i) shift_low();
  while (!out_.empty() && out_.back() == 0) out_.pop_back();
  touched_ = false;
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> payload) : payload_(payload) {
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  const std::uint8_t b = pos_ < payload_.size() ? payload_[pos_] : 0;
  ++pos_;
  return b;
}

std::uint32_t RangeDecoder::target() {
  step_ = range_ >> kProbBits;
  return std::min<std::uint32_t>(code_ / step_, kProbTotal - 1);
}

void RangeDecoder::consume(std::uint32_t start, std::uint32_t freq) {
  code_ -= step_ * start;
  range_ = step_ * freq;
  if (code_ >= range_) {
    throw IntegrityError("range decoder left its interval near payload byte offset " +
                         std::to_string(pos_ > 4 ? pos_ - 4 : 0));
  }
  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

std::uint16_t RangeDecoder::decode_raw16() {
  const std::uint32_t v = target();
  consume(v, 1);
  return static_cast<std::uint16_t>(v);
}

std::vector<std::uint8_t> rc_encode(std::span<const std::int32_t> values, const CdfTable& table) {
  if (values.empty()) return {};
  if (table.size() == 0) throw ShapeError("rc_encode: empty table");
  RangeEncoder enc;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const CdfChannel& ch = table.channels[i % table.size()];
    const std::uint32_t bin = ch.bin_of(values[i]);
    enc.encode(ch.cum[bin], ch.freq(bin));
    if (ch.is_tail(bin)) {
      const auto raw = static_cast<std::uint32_t>(values[i]);
      enc.encode_raw16(static_cast<std::uint16_t>(raw >> 16));
      enc.encode_raw16(static_cast<std::uint16_t>(raw & 0xFFFF));
    }
  }
  enc.encode_raw16(kTerminator);
  return enc.finish();
}

std::vector<std::int32_t> rc_decode(std::span<const std::uint8_t> payload, const CdfTable& table,
                                    std::size_t count) {
  if (count == 0) return {};
  if (table.size() == 0) throw ShapeError("rc_decode: empty table");
  RangeDecoder dec(payload);
  std::vector<std::int32_t> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const CdfChannel& ch = table.channels[i % table.size()];
    const std::uint32_t bin = ch.find(dec.target());
    dec.consume(ch.cum[bin], ch.freq(bin));
    if (ch.is_tail(bin)) {
      const std::uint32_t hi = dec.decode_raw16();
      const std::uint32_t lo = dec.decode_raw16();
      values[i] = static_cast<std::int32_t>((hi << 16) | lo);
    } else {
      values[i] = ch.k_min + static_cast<std::int32_t>(bin) - 1;
    }
  }
  if (dec.decode_raw16() != kTerminator) {
    throw IntegrityError("range-coded payload is truncated or corrupt: end marker not found (payload " +
                         std::to_string(payload.size()) + " bytes)");
  }

  const std::vector<std::uint8_t> canonical = rc_encode(values, table);
  if (!std::equal(canonical.begin(), canonical.end(), payload.begin(), payload.end())) {
    const auto mismatch = std::mismatch(canonical.begin(), canonical.end(), payload.begin(), payload.end());
    const auto offset = static_cast<std::size_t>(std::distance(payload.begin(), mismatch.second));
    const char* what = payload.size() < canonical.size() && offset == payload.size() ? "truncated" : "corrupt";
    throw IntegrityError(std::string("range-coded payload is ") + what + " at byte offset " +
                         std::to_string(offset) + " (payload " + std::to_string(payload.size()) +
                         " bytes, expected " + std::to_string(canonical.size()) + ")");
  }
  return values;
}

}  // namespace mmfc::entropy
