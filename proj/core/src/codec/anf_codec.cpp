#include "mmfc/codec/anf_codec.hpp"

#include "mmfc/entropy/range_coder.hpp"
#include "mmfc/hash.hpp"

namespace mmfc::codec {

using ndgrad::Tensor;

namespace {

constexpr char kMetaTag[] = "META";
constexpr char kEntropyTag[] = "ENTQ";
constexpr char kKindTag[] = "KIND";
constexpr char kKind[] = "anf";

AnfShape shape_of(const CodecConfig& cfg) { return AnfShape{cfg.dim, cfg.latent, cfg.hidden, 0}; }

std::vector<std::uint8_t> text_bytes(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

AnfCodec::AnfCodec(const CodecConfig& cfg, ndgrad::ParameterStore<float> store)
    : cfg_(cfg), store_(std::move(store)) {
  transform_ = AnfTransform<float>::bind(store_, kAnfPrefix, shape_of(cfg_));
  build_graphs();
}

AnfCodec AnfCodec::create(const CodecConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ndgrad::ParameterStore<float> store;
  Rng rng(seed);
  AnfTransform<float>::create(store, kAnfPrefix, shape_of(cfg), rng);
  store.add_zeros(kEntropyLoc, {cfg.latent});
  store.add(kEntropyRawScale, Tensor<float>({cfg.latent}, kInitialRawScale));
  return AnfCodec(cfg, std::move(store));
}

void AnfCodec::build_graphs() {
  forward_graph_ = {};
  auto x = forward_graph_.input("x", {0, cfg_.dim});
  auto b = transform_.forward(forward_graph_, x);
  forward_graph_.output("z", b.z);
  forward_graph_.output("r", b.r);

  inverse_graph_ = {};
  auto z = inverse_graph_.input("z", {0, cfg_.latent});
  auto r = inverse_graph_.input("r", {0, cfg_.dim});
  inverse_graph_.output("x", transform_.inverse(inverse_graph_, z, r));
}

std::pair<Tensor<float>, Tensor<float>> AnfCodec::forward(const Tensor<float>& x) const {
  auto out = ndgrad::evaluate(forward_graph_, {{"x", x}});
  return {std::move(out.at("z")), std::move(out.at("r"))};
}

Tensor<float> AnfCodec::inverse(const Tensor<float>& z, const Tensor<float>& r) const {
  return std::move(ndgrad::evaluate(inverse_graph_, {{"z", z}, {"r", r}}).at("x"));
}

Tensor<float> AnfCodec::reconstruct(const Tensor<float>& x, bool quantize) const {
  auto z = forward(x).first;
  if (quantize) z = entropy::round_half_even(z);
  return inverse(z, Tensor<float>({x.rows(), cfg_.dim}));
}

entropy::EntropyModel AnfCodec::entropy_model() const {
  return entropy::EntropyModel::from_unconstrained(store_.get(kEntropyLoc).value.values(),
                                                   store_.get(kEntropyRawScale).value.values());
}

entropy::QuantizedEntropyModel AnfCodec::quantized_entropy() const {
  return entropy::QuantizedEntropyModel::from(entropy_model());
}

std::uint64_t AnfCodec::model_hash() const { return fnv1a(to_file().serialize()); }

entropy::Bitstream AnfCodec::compress(const FeatureMap& x, StreamTag tag) const {
  if (x.values.rank() != 2 || x.rows() != cfg_.rows || x.dim() != cfg_.dim) {
    throw ShapeError("compress: feature map " + ndgrad::to_string(x.values.shape()) + " does not match codec " +
                     std::to_string(cfg_.rows) + "x" + std::to_string(cfg_.dim));
  }
  const auto symbols = latent_symbols(forward(x.values).first);
  const auto table = entropy::CdfTable::build(quantized_entropy());
  entropy::Bitstream bs;
  bs.payload = entropy::rc_encode(symbols, table);
  bs.header.approach = tag.approach;
  bs.header.lambda_index = tag.lambda_index;
  bs.header.role = cfg_.modality;
  bs.header.rows = static_cast<std::uint16_t>(cfg_.rows);
  bs.header.dim = static_cast<std::uint16_t>(cfg_.dim);
  bs.header.model_hash = model_hash();
  bs.header.payload_length = static_cast<std::uint32_t>(bs.payload.size());
  return bs;
}

FeatureMap AnfCodec::decompress(const entropy::Bitstream& bs) const {
  check_header(bs.header, cfg_, false, model_hash());
  const auto table = entropy::CdfTable::build(quantized_entropy());
  const auto symbols = entropy::rc_decode(bs.payload, table, cfg_.rows * cfg_.latent);
  const auto z = symbols_latent(symbols, cfg_.rows, cfg_.latent);
  return FeatureMap{inverse(z, Tensor<float>({cfg_.rows, cfg_.dim})), cfg_.modality};
}

ndgrad::ParameterFile AnfCodec::to_file() const {
  ndgrad::ParameterFile file;
  for (const auto* p : store_.all()) file.params.add(p->name, p->value);
  file.sections[kKindTag] = text_bytes(kKind);
  file.sections[kMetaTag] = text_bytes(cfg_.to_json());
  file.sections[kEntropyTag] = quantized_entropy().serialize();
  return file;
}

AnfCodec AnfCodec::from_file(ndgrad::ParameterFile file) {
  auto section = [&](const char* tag) -> const std::vector<std::uint8_t>& {
    auto it = file.sections.find(tag);
    if (it == file.sections.end()) throw IntegrityError(std::string("codec checkpoint lacks section ") + tag);
    return it->second;
  };
  const auto& kind = section(kKindTag);
  if (std::string(kind.begin(), kind.end()) != kKind) {
    throw IntegrityError("checkpoint holds a '" + std::string(kind.begin(), kind.end()) + "' model, not an anf codec");
  }
  const auto& meta = section(kMetaTag);
  const auto cfg = CodecConfig::from_json(std::string(meta.begin(), meta.end()));
  const auto stored = section(kEntropyTag);
  AnfCodec codec(cfg, std::move(file.params));
  if (codec.quantized_entropy().serialize() != stored) {
    throw IntegrityError("codec checkpoint: stored entropy tables disagree with its parameters");
  }
  return codec;
}

void AnfCodec::save(const std::filesystem::path& path) const { to_file().save(path); }

AnfCodec AnfCodec::load(const std::filesystem::path& path) { return from_file(ndgrad::ParameterFile::load(path)); }

}  // namespace mmfc::codec
