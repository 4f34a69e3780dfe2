#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mmfc/feature_map.hpp"

namespace mmfc::entropy {

inline constexpr char kStreamMagic[4] = {'M', 'M', 'F', 'C'};
inline constexpr std::uint8_t kStreamVersion = 1;
/// Set in the role byte of streams coded conditionally on another stream.
inline constexpr std::uint8_t kConditionalRoleFlag = 0x80;
inline constexpr std::size_t kHeaderBytes = 24;
inline constexpr std::size_t kConditionalHeaderBytes = kHeaderBytes + 8;

/// Container header, little-endian:
///   magic "MMFC" | version u8 | approach u8 | role u8 | lambda index u8 |
///   Q u16 | D u16 | model hash u64 | [condition digest u64] | payload length u32
/// The role byte holds the Modality in its low bits and kConditionalRoleFlag
/// for conditional streams; only those carry the condition digest.
struct StreamHeader {
  std::uint8_t version = kStreamVersion;
  std::uint8_t approach = 1;
  Modality role = Modality::kFused;
  bool conditional = false;
  std::uint8_t lambda_index = 0;
  std::uint16_t rows = 0;
  std::uint16_t dim = 0;
  std::uint64_t model_hash = 0;
  std::uint64_t condition_digest = 0;
  std::uint32_t payload_length = 0;

  [[nodiscard]] std::size_t size_bytes() const {
    return conditional ? kConditionalHeaderBytes : kHeaderBytes;
  }
  friend bool operator==(const StreamHeader&, const StreamHeader&) = default;
};

struct Bitstream {
  StreamHeader header;
  std::vector<std::uint8_t> payload;

  /// Full file size; this is what rate accounting charges.
  [[nodiscard]] std::size_t size_bytes() const { return header.size_bytes() + payload.size(); }
  [[nodiscard]] std::uint64_t size_bits() const { return 8ull * size_bytes(); }

  [[nodiscard]] std::vector<std::uint8_t> serialize() const;
  /// Throws IntegrityError on bad magic/version or when the recorded payload
  /// length disagrees with the bytes present.
  static Bitstream parse(std::span<const std::uint8_t> bytes);

  void save(const std::filesystem::path& path) const;
  static Bitstream load(const std::filesystem::path& path);

  friend bool operator==(const Bitstream&, const Bitstream&) = default;
};

}  // namespace mmfc::entropy
