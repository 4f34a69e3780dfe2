#pragma once

#include <filesystem>
#include <utility>

#include "mmfc/codec/anf_transform.hpp"
#include "mmfc/codec/codec_config.hpp"
#include "mmfc/entropy/cdf_table.hpp"
#include "mmfc/entropy/entropy_model.hpp"
#include "mmfc/ndgrad/checkpoint.hpp"

namespace mmfc::codec {

inline constexpr char kAnfPrefix[] = "anf";
inline constexpr char kEntropyLoc[] = "entropy.loc";
inline constexpr char kEntropyRawScale[] = "entropy.raw_scale";

/// Unconditional two-step ANF codec with a factorized logistic prior over the
/// latent columns. Lossy because the residual branch is dropped: decoding
/// runs the inverse flow with r = 0.
class AnfCodec {
 public:
  static AnfCodec create(const CodecConfig& cfg, std::uint64_t seed);

  [[nodiscard]] const CodecConfig& config() const { return cfg_; }
  [[nodiscard]] ndgrad::ParameterStore<float>& params() { return store_; }
  [[nodiscard]] const ndgrad::ParameterStore<float>& params() const { return store_; }
  [[nodiscard]] const AnfTransform<float>& transform() const { return transform_; }

  /// (z, r) for an N x dim batch of rows.
  [[nodiscard]] std::pair<ndgrad::Tensor<float>, ndgrad::Tensor<float>> forward(const ndgrad::Tensor<float>& x) const;
  [[nodiscard]] ndgrad::Tensor<float> inverse(const ndgrad::Tensor<float>& z, const ndgrad::Tensor<float>& r) const;
  /// inverse(q(forward(x).z), 0) with q = rounding, or identity when quantize
  /// is false. With rounding this equals decompress(compress(x)) bit for bit.
  [[nodiscard]] ndgrad::Tensor<float> reconstruct(const ndgrad::Tensor<float>& x, bool quantize = true) const;

  [[nodiscard]] entropy::EntropyModel entropy_model() const;
  [[nodiscard]] entropy::QuantizedEntropyModel quantized_entropy() const;
  /// FNV-1a of the serialized checkpoint.
  [[nodiscard]] std::uint64_t model_hash() const;

  [[nodiscard]] entropy::Bitstream compress(const FeatureMap& x, StreamTag tag = {}) const;
  [[nodiscard]] FeatureMap decompress(const entropy::Bitstream& bs) const;

  [[nodiscard]] ndgrad::ParameterFile to_file() const;
  static AnfCodec from_file(ndgrad::ParameterFile file);
  [[nodiscard]] AnfCodec clone() const { return from_file(to_file()); }
  void save(const std::filesystem::path& path) const;
  static AnfCodec load(const std::filesystem::path& path);

 private:
  AnfCodec(const CodecConfig& cfg, ndgrad::ParameterStore<float> store);
  void build_graphs();

  CodecConfig cfg_;
  ndgrad::ParameterStore<float> store_;
  AnfTransform<float> transform_;
  ndgrad::Graph<float> forward_graph_;
  ndgrad::Graph<float> inverse_graph_;
};

}  // namespace mmfc::codec
