#pragma once

#include <filesystem>
#include <utility>

#include "mmfc/codec/anf_transform.hpp"
#include "mmfc/codec/codec_config.hpp"
#include "mmfc/entropy/entropy_model.hpp"
#include "mmfc/ndgrad/checkpoint.hpp"

namespace mmfc::codec {

inline constexpr char kCondPrefix[] = "cond";
inline constexpr char kPriorNet[] = "prior";

/// Conditional ANF codec: every coupling net sees [branch | cond row], and a
/// prior net maps each cond row to per-element logistic (loc, raw scale) of
/// the latent row. The condition must be the decoded predictor map so the
/// decoder can rebuild it exactly; its digest travels in the header.
class CondCodec {
 public:
  /// cfg.modality is the coded (target) modality; the condition has the same
  /// Q x D geometry.
  static CondCodec create(const CodecConfig& cfg, std::uint64_t seed);

  [[nodiscard]] const CodecConfig& config() const { return cfg_; }
  [[nodiscard]] ndgrad::ParameterStore<float>& params() { return store_; }
  [[nodiscard]] const ndgrad::ParameterStore<float>& params() const { return store_; }
  [[nodiscard]] const AnfTransform<float>& transform() const { return transform_; }
  [[nodiscard]] const ndgrad::Mlp<float>& prior() const { return prior_; }

  [[nodiscard]] std::pair<ndgrad::Tensor<float>, ndgrad::Tensor<float>> forward(
      const ndgrad::Tensor<float>& x, const ndgrad::Tensor<float>& cond) const;
  [[nodiscard]] ndgrad::Tensor<float> inverse(const ndgrad::Tensor<float>& z, const ndgrad::Tensor<float>& r,
                                              const ndgrad::Tensor<float>& cond) const;
  [[nodiscard]] ndgrad::Tensor<float> reconstruct(const ndgrad::Tensor<float>& x, const ndgrad::Tensor<float>& cond,
                                                  bool quantize = true) const;

  /// Element-wise model: one channel per latent element of the N rows of cond.
  [[nodiscard]] entropy::EntropyModel entropy_model(const ndgrad::Tensor<float>& cond) const;
  [[nodiscard]] std::uint64_t model_hash() const;

  /// Throws ShapeError when x and cond geometries differ.
  [[nodiscard]] entropy::Bitstream compress(const FeatureMap& x, const FeatureMap& cond, StreamTag tag = {}) const;
  /// Throws IntegrityError on model-hash or condition-digest mismatch.
  [[nodiscard]] FeatureMap decompress(const entropy::Bitstream& bs, const FeatureMap& cond) const;

  [[nodiscard]] ndgrad::ParameterFile to_file() const;
  static CondCodec from_file(ndgrad::ParameterFile file);
  [[nodiscard]] CondCodec clone() const { return from_file(to_file()); }
  void save(const std::filesystem::path& path) const;
  static CondCodec load(const std::filesystem::path& path);

 private:
  CondCodec(const CodecConfig& cfg, ndgrad::ParameterStore<float> store);
  void build_graphs();

  CodecConfig cfg_;
  ndgrad::ParameterStore<float> store_;
  AnfTransform<float> transform_;
  ndgrad::Mlp<float> prior_;
  ndgrad::Graph<float> forward_graph_;
  ndgrad::Graph<float> inverse_graph_;
  ndgrad::Graph<float> prior_graph_;
};

}  // namespace mmfc::codec
