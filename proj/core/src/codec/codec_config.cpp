#include "mmfc/codec/codec_config.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace mmfc::codec {

CodecConfig CodecConfig::for_shape(std::size_t rows, std::size_t dim, Modality modality) {
  CodecConfig c;
  c.rows = rows;
  c.dim = dim;
  c.latent = std::max<std::size_t>(1, dim / 4);
  c.hidden = 4 * c.latent;
  c.modality = modality;
  return c;
}

void CodecConfig::validate() const {
  if (rows == 0 || dim == 0 || latent == 0 || hidden == 0) throw ConfigError("codec config: zero dimension");
  if (rows > 0xFFFF || dim > 0xFFFF) throw ConfigError("codec config: rows and dim must fit in 16 bits");
}

std::string CodecConfig::to_json() const {
  nlohmann::json j{{"rows", rows},
                   {"dim", dim},
                   {"latent", latent},
                   {"hidden", hidden},
                   {"modality", std::string(modality_name(modality))}};
  return j.dump();
}

CodecConfig CodecConfig::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    CodecConfig c;
    c.rows = j.at("rows").get<std::size_t>();
    c.dim = j.at("dim").get<std::size_t>();
    c.latent = j.at("latent").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.modality = parse_modality(j.at("modality").get<std::string>());
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("codec metadata: ") + e.what());
  }
}

std::vector<std::int32_t> latent_symbols(const ndgrad::Tensor<float>& latent) {
  constexpr double lo = std::numeric_limits<std::int32_t>::min();
  constexpr double hi = std::numeric_limits<std::int32_t>::max();
  std::vector<std::int32_t> out(latent.size());
  for (std::size_t i = 0; i < latent.size(); ++i) {
    const double v = latent[i];
    if (!std::isfinite(v)) throw Error("latent element " + std::to_string(i) + " is not finite");
    out[i] = static_cast<std::int32_t>(std::clamp(std::nearbyint(v), lo, hi));
  }
  return out;
}

ndgrad::Tensor<float> symbols_latent(std::span<const std::int32_t> symbols, std::size_t rows, std::size_t cols) {
  ndgrad::Tensor<float> t({rows, cols});
  for (std::size_t i = 0; i < symbols.size(); ++i) t[i] = static_cast<float>(symbols[i]);
  return t;
}

void check_header(const entropy::StreamHeader& h, const CodecConfig& cfg, bool conditional,
                  std::uint64_t model_hash) {
  if (h.conditional != conditional) {
    throw IntegrityError(conditional ? "stream is not conditional" : "stream is conditional; a condition is needed");
  }
  if (h.rows != cfg.rows || h.dim != cfg.dim) {
    throw IntegrityError("stream shape " + std::to_string(h.rows) + "x" + std::to_string(h.dim) +
                         " does not match codec " + std::to_string(cfg.rows) + "x" + std::to_string(cfg.dim));
  }
  if (h.role != cfg.modality) {
    throw IntegrityError("stream role " + std::string(modality_name(h.role)) + " does not match codec modality " +
                         std::string(modality_name(cfg.modality)));
  }
  if (h.model_hash != model_hash) {
    throw IntegrityError("model hash mismatch: stream was coded by a different model; refusing to decode");
  }
}

}  // namespace mmfc::codec
