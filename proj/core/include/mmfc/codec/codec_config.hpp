#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmfc/entropy/bitstream.hpp"
#include "mmfc/feature_map.hpp"
#include "mmfc/ndgrad/tensor.hpp"

namespace mmfc::codec {

/// softplus^-1(1): initial raw prior scale, so every channel starts at scale 1.
inline constexpr float kInitialRawScale = 0.541324854612918f;

/// Geometry of a codec. Rows of the Q x D input are coded as independent
/// vectors sharing one model; latent defaults to D / 4 and hidden to 4 * latent.
struct CodecConfig {
  std::size_t rows = 64;
  std::size_t dim = 32;
  std::size_t latent = 8;
  std::size_t hidden = 32;
  Modality modality = Modality::kFused;

  static CodecConfig for_shape(std::size_t rows, std::size_t dim, Modality modality);
  void validate() const;
  [[nodiscard]] std::string to_json() const;
  static CodecConfig from_json(const std::string& text);
  friend bool operator==(const CodecConfig&, const CodecConfig&) = default;
};

/// Header fields that describe where a stream sits in a topology.
struct StreamTag {
  std::uint8_t approach = 1;
  std::uint8_t lambda_index = 0;
};

/// Rounds a latent to coder symbols; throws on non-finite values.
std::vector<std::int32_t> latent_symbols(const ndgrad::Tensor<float>& latent);
ndgrad::Tensor<float> symbols_latent(std::span<const std::int32_t> symbols, std::size_t rows, std::size_t cols);

/// Checks header geometry/role/hash against what a decoder expects.
void check_header(const entropy::StreamHeader& h, const CodecConfig& cfg, bool conditional,
                  std::uint64_t model_hash);

}  // namespace mmfc::codec
