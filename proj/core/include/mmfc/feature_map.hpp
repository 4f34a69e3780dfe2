#pragma once

#include <cstdint>
#include <string_view>

#include "mmfc/ndgrad/tensor.hpp"

namespace mmfc {

/// Numbering matches the stream-role byte of the bitstream header.
enum class Modality : std::uint8_t { kFused = 0, kCamera = 1, kLidar = 2 };

std::string_view modality_name(Modality m);
Modality parse_modality(std::string_view name);

/// Single-channel Q x D feature map tagged with its modality.
struct FeatureMap {
  ndgrad::Tensor<float> values;
  Modality modality = Modality::kFused;

  [[nodiscard]] std::size_t rows() const { return values.shape()[0]; }
  [[nodiscard]] std::size_t dim() const { return values.shape()[1]; }
};

/// FNV-1a over the little-endian float32 bytes of the map.
std::uint64_t feature_digest(const ndgrad::Tensor<float>& values);

}  // namespace mmfc
