#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mmfc/ndgrad/parameter.hpp"

namespace mmfc::ndgrad {

inline constexpr char kParamMagic[8] = {'M', 'M', 'F', 'C', 'P', 'A', 'R', 'M'};
inline constexpr std::uint16_t kParamFormatVersion = 1;

/// Parameter file: magic `MMFCPARM`, u16 version, u32 parameter count, then per
/// parameter u16 name length + UTF-8 name, u8 rank, u32 dims, little-endian
/// f32 payload. Tagged sections may follow: 4-byte ASCII tag, u32 length,
/// bytes. All integers little-endian.
struct ParameterFile {
  ParameterStore<float> params;
  /// Keyed by 4-character tag; written in key order.
  std::map<std::string, std::vector<std::uint8_t>> sections;

  [[nodiscard]] std::vector<std::uint8_t> serialize() const;
  static ParameterFile parse(std::span<const std::uint8_t> bytes);

  /// Atomic write (temp file + rename).
  void save(const std::filesystem::path& path) const;
  static ParameterFile load(const std::filesystem::path& path);
};

/// Overwrites values in `dst` from same-named, same-shaped parameters in `src`.
/// Throws if any parameter of dst is missing or mis-shaped.
void copy_values(const ParameterStore<float>& src, ParameterStore<float>& dst);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes to `path.tmp` and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace mmfc::ndgrad
