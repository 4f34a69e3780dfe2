#include "mmfc/codec/cond_codec.hpp"

#include "mmfc/entropy/cdf_table.hpp"
#include "mmfc/entropy/range_coder.hpp"
#include "mmfc/hash.hpp"

namespace mmfc::codec {

using ndgrad::Tensor;

namespace {

constexpr char kMetaTag[] = "META";
constexpr char kKindTag[] = "KIND";
constexpr char kKind[] = "cond";

AnfShape shape_of(const CodecConfig& cfg) { return AnfShape{cfg.dim, cfg.latent, cfg.hidden, cfg.dim}; }

std::vector<std::uint8_t> text_bytes(const std::string& s) { return {s.begin(), s.end()}; }

void check_pair(const Tensor<float>& x, const Tensor<float>& cond) {
  if (x.shape() != cond.shape()) {
    throw ShapeError("conditional codec: target " + ndgrad::to_string(x.shape()) + " and condition " +
                     ndgrad::to_string(cond.shape()) + " differ in shape");
  }
}

}  // namespace

CondCodec::CondCodec(const CodecConfig& cfg, ndgrad::ParameterStore<float> store)
    : cfg_(cfg), store_(std::move(store)) {
  transform_ = AnfTransform<float>::bind(store_, kCondPrefix, shape_of(cfg_));
  prior_ = ndgrad::Mlp<float>::bind(store_, kPriorNet);
  build_graphs();
}

CondCodec CondCodec::create(const CodecConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ndgrad::ParameterStore<float> store;
  Rng rng(seed);
  AnfTransform<float>::create(store, kCondPrefix, shape_of(cfg), rng);
  // Zero output weights: the prior starts as the unconditional initial prior
  // (loc 0, scale 1) for every row, whatever the condition.
  auto prior = ndgrad::Mlp<float>::create(store, kPriorNet, cfg.dim, cfg.hidden, 2 * cfg.latent, rng);
  prior.out.weight->value.fill(0.f);
  for (std::size_t c = 0; c < cfg.latent; ++c) prior.out.bias->value[cfg.latent + c] = kInitialRawScale;
  return CondCodec(cfg, std::move(store));
}

void CondCodec::build_graphs() {
  forward_graph_ = {};
  {
    auto& g = forward_graph_;
    auto x = g.input("x", {0, cfg_.dim});
    auto c = g.input("cond", {0, cfg_.dim});
    auto b = transform_.forward(g, x, c);
    g.output("z", b.z);
    g.output("r", b.r);
  }
  inverse_graph_ = {};
  {
    auto& g = inverse_graph_;
    auto z = g.input("z", {0, cfg_.latent});
    auto r = g.input("r", {0, cfg_.dim});
    auto c = g.input("cond", {0, cfg_.dim});
    g.output("x", transform_.inverse(g, z, r, c));
  }
  prior_graph_ = {};
  {
    auto& g = prior_graph_;
    auto p = prior_.build(g, g.input("cond", {0, cfg_.dim}));
    g.output("loc", g.slice_last(p, 0, cfg_.latent));
    g.output("raw_scale", g.slice_last(p, cfg_.latent, 2 * cfg_.latent));
  }
}

std::pair<Tensor<float>, Tensor<float>> CondCodec::forward(const Tensor<float>& x, const Tensor<float>& cond) const {
  check_pair(x, cond);
  auto out = ndgrad::evaluate(forward_graph_, {{"x", x}, {"cond", cond}});
  return {std::move(out.at("z")), std::move(out.at("r"))};
}

Tensor<float> CondCodec::inverse(const Tensor<float>& z, const Tensor<float>& r, const Tensor<float>& cond) const {
  check_pair(r, cond);
  return std::move(ndgrad::evaluate(inverse_graph_, {{"z", z}, {"r", r}, {"cond", cond}}).at("x"));
}

Tensor<float> CondCodec::reconstruct(const Tensor<float>& x, const Tensor<float>& cond, bool quantize) const {
  auto z = forward(x, cond).first;
  if (quantize) z = entropy::round_half_even(z);
  return inverse(z, Tensor<float>({x.rows(), cfg_.dim}), cond);
}

entropy::EntropyModel CondCodec::entropy_model(const Tensor<float>& cond) const {
  auto out = ndgrad::evaluate(prior_graph_, {{"cond", cond}});
  return entropy::EntropyModel::from_unconstrained(out.at("loc").values(), out.at("raw_scale").values());
}

std::uint64_t CondCodec::model_hash() const { return fnv1a(to_file().serialize()); }

entropy::Bitstream CondCodec::compress(const FeatureMap& x, const FeatureMap& cond, StreamTag tag) const {
  if (x.values.rank() != 2 || x.rows() != cfg_.rows || x.dim() != cfg_.dim) {
    throw ShapeError("cond_compress: feature map " + ndgrad::to_string(x.values.shape()) + " does not match codec " +
                     std::to_string(cfg_.rows) + "x" + std::to_string(cfg_.dim));
  }
  check_pair(x.values, cond.values);
  const auto symbols = latent_symbols(forward(x.values, cond.values).first);
  const auto table = entropy::CdfTable::build(entropy_model(cond.values));
  entropy::Bitstream bs;
  bs.payload = entropy::rc_encode(symbols, table);
  bs.header.approach = tag.approach;
  bs.header.lambda_index = tag.lambda_index;
  bs.header.role = cfg_.modality;
  bs.header.conditional = true;
  bs.header.rows = static_cast<std::uint16_t>(cfg_.rows);
  bs.header.dim = static_cast<std::uint16_t>(cfg_.dim);
  bs.header.model_hash = model_hash();
  bs.header.condition_digest = feature_digest(cond.values);
  bs.header.payload_length = static_cast<std::uint32_t>(bs.payload.size());
  return bs;
}

FeatureMap CondCodec::decompress(const entropy::Bitstream& bs, const FeatureMap& cond) const {
  check_header(bs.header, cfg_, true, model_hash());
  if (cond.values.rank() != 2 || cond.rows() != cfg_.rows || cond.dim() != cfg_.dim) {
    throw ShapeError("cond_decompress: condition shape " + ndgrad::to_string(cond.values.shape()) +
                     " does not match codec");
  }
  if (bs.header.condition_digest != feature_digest(cond.values)) {
    throw IntegrityError("condition digest mismatch: the supplied predictor differs from the one used to encode");
  }
  const auto table = entropy::CdfTable::build(entropy_model(cond.values));
  const auto symbols = entropy::rc_decode(bs.payload, table, cfg_.rows * cfg_.latent);
  const auto z = symbols_latent(symbols, cfg_.rows, cfg_.latent);
  return FeatureMap{inverse(z, Tensor<float>({cfg_.rows, cfg_.dim}), cond.values), cfg_.modality};
}

ndgrad::ParameterFile CondCodec::to_file() const {
  ndgrad::ParameterFile file;
  for (const auto* p : store_.all()) file.params.add(p->name, p->value);
  file.sections[kKindTag] = text_bytes(kKind);
  file.sections[kMetaTag] = text_bytes(cfg_.to_json());
  return file;
}

CondCodec CondCodec::from_file(ndgrad::ParameterFile file) {
  auto kind = file.sections.find(kKindTag);
  auto meta = file.sections.find(kMetaTag);
  if (kind == file.sections.end() || meta == file.sections.end()) {
    throw IntegrityError("codec checkpoint lacks KIND/META sections");
  }
  if (std::string(kind->second.begin(), kind->second.end()) != kKind) {
    throw IntegrityError("checkpoint holds a '" + std::string(kind->second.begin(), kind->second.end()) +
                         "' model, not a conditional codec");
  }
  const auto cfg = CodecConfig::from_json(std::string(meta->second.begin(), meta->second.end()));
  return CondCodec(cfg, std::move(file.params));
}

void CondCodec::save(const std::filesystem::path& path) const { to_file().save(path); }

CondCodec CondCodec::load(const std::filesystem::path& path) { return from_file(ndgrad::ParameterFile::load(path)); }

}  // namespace mmfc::codec
