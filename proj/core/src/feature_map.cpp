#include "mmfc/feature_map.hpp"

#include <cstring>

#include "mmfc/hash.hpp"

namespace mmfc {

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::kFused: return "fused";
    case Modality::kCamera: return "camera";
    case Modality::kLidar: return "lidar";
  }
  return "unknown";
}

Modality parse_modality(std::string_view name) {
  if (name == "fused") return Modality::kFused;
  if (name == "camera") return Modality::kCamera;
  if (name == "lidar") return Modality::kLidar;
  throw ConfigError("unknown modality '" + std::string(name) + "'");
}

std::uint64_t feature_digest(const ndgrad::Tensor<float>& values) {
  std::uint64_t h = kFnvOffset;
  for (float v : values.values()) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    const std::uint8_t b[4] = {static_cast<std::uint8_t>(bits), static_cast<std::uint8_t>(bits >> 8),
                               static_cast<std::uint8_t>(bits >> 16), static_cast<std::uint8_t>(bits >> 24)};
    h = fnv1a(std::span<const std::uint8_t>(b, 4), h);
  }
  return h;
}

}  // namespace mmfc
