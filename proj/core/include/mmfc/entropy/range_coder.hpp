#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mmfc/entropy/cdf_table.hpp"

namespace mmfc::entropy {

/// 32-bit range encoder over 16-bit frequencies, byte-wise renormalisation
/// with carry propagation. finish() emits the shortest tail that pins the
/// final interval and drops trailing zero bytes; the decoder reads zeros past
/// the end of the payload.
class RangeEncoder {
 public:
  void encode(std::uint32_t start, std::uint32_t freq);
  void encode_raw16(std::uint16_t bits) { encode(bits, 1); }
  std::vector<std::uint8_t> finish();

 private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  bool has_cache_ = false;
  std::uint64_t pending_ff_ = 0;
  bool touched_ = false;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> payload);

  /// 16-bit target for the next symbol; must be followed by consume().
  std::uint32_t target();
  void consume(std::uint32_t start, std::uint32_t freq);
  std::uint16_t decode_raw16();

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> payload_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t step_ = 0;
};

/// Codes `values`, value i using channel i % table.size(). Values outside a
/// channel's support take a tail bin followed by a raw 32-bit two's-complement
/// literal, so every int32 is codable. A 16-bit end marker follows the
/// last symbol. Empty input gives an empty payload.
std::vector<std::uint8_t> rc_encode(std::span<const std::int32_t> values, const CdfTable& table);

/// Inverse of rc_encode for `count` symbols. The decoded symbols are
/// re-encoded and compared with the payload: a truncated or corrupted payload
/// raises IntegrityError naming the first differing byte offset. A payload
/// coded with a different table is not reliably detectable.
std::vector<std::int32_t> rc_decode(std::span<const std::uint8_t> payload, const CdfTable& table,
                                    std::size_t count);

}  // namespace mmfc::entropy
