#include <gtest/gtest.h>

#include <filesystem>

#include "mmfc/codec/anf_codec.hpp"
#include "mmfc/codec/cond_codec.hpp"
#include "mmfc/entropy/range_coder.hpp"

namespace mmfc::codec {
namespace {

using ndgrad::Tensor;

Tensor<float> random_map(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Tensor<float> t({rows, cols});
  for (auto& v : t.values()) v = static_cast<float>(scale * rng.normal());
  return t;
}

CodecConfig small_config(Modality m = Modality::kFused) { return CodecConfig::for_shape(16, 12, m); }

void perturb_all(ndgrad::ParameterStore<float>& store, Rng& rng, double scale) {
  for (auto* p : store.all()) {
    for (auto& v : p->value.values()) v += static_cast<float>(scale * rng.normal());
  }
}

TEST(AnfTransform, ZeroNetsAreTheIdentityFlow) {
  auto codec = AnfCodec::create(small_config(), 1);
  for (auto* p : codec.params().all()) p->value.fill(0.f);
  Rng rng(2);
  const auto x = random_map(16, 12, rng);
  auto [z, r] = codec.forward(x);
  for (float v : z.values()) EXPECT_EQ(v, 0.f);
  EXPECT_EQ(r, x);
}

TEST(AnfTransform, InverseUndoesForwardAtSinglePrecision) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto codec = AnfCodec::create(small_config(), 100 + trial);
    perturb_all(codec.params(), rng, 0.3);
    const auto x = random_map(16, 12, rng, 2.0);
    auto [z, r] = codec.forward(x);
    EXPECT_LE(ndgrad::max_abs_diff(codec.inverse(z, r), x), 1e-5f);
  }
}

TEST(AnfTransform, InverseUndoesForwardAtDoublePrecision) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    ndgrad::ParameterStore<double> store;
    const AnfShape shape{10, 3, 12, trial % 2 ? 10u : 0u};
    auto t = AnfTransform<double>::create(store, "t", shape, rng);
    for (auto* p : store.all()) {
      for (auto& v : p->value.values()) v += 0.3 * rng.normal();
    }
    ndgrad::Graph<double> g;
    auto x = g.input("x");
    std::optional<ndgrad::NodeId> c;
    if (shape.cond_dim) c = g.input("c");
    auto b = t.forward(g, x, c);
    g.output("back", t.inverse(g, b.z, b.r, c));
    Tensor<double> xv({7, 10}), cv({7, 10});
    for (auto& v : xv.values()) v = 2 * rng.normal();
    for (auto& v : cv.values()) v = rng.normal();
    ndgrad::Bindings<double> in{{"x", xv}};
    if (shape.cond_dim) in.emplace("c", cv);
    EXPECT_LE(ndgrad::max_abs_diff(ndgrad::evaluate(g, in).at("back"), xv), 1e-10);
  }
}

TEST(AnfCodec, CompressDecompressMatchesReconstruct) {
  Rng rng(5);
  auto codec = AnfCodec::create(small_config(), 7);
  perturb_all(codec.params(), rng, 0.2);
  const FeatureMap x{random_map(16, 12, rng), Modality::kFused};
  const auto bs = codec.compress(x, {1, 3});
  EXPECT_EQ(bs.header.lambda_index, 3);
  EXPECT_EQ(codec.compress(x, {1, 3}), bs);
  const auto once = codec.decompress(bs);
  const auto twice = codec.decompress(entropy::Bitstream::parse(bs.serialize()));
  EXPECT_EQ(once.values, twice.values);
  EXPECT_EQ(once.values, codec.reconstruct(x.values));
}

TEST(AnfCodec, IdentityQuantizationHookMatchesFlowWithZeroResidual) {
  Rng rng(6);
  auto codec = AnfCodec::create(small_config(), 8);
  const auto x = random_map(16, 12, rng);
  auto [z, r] = codec.forward(x);
  EXPECT_EQ(codec.reconstruct(x, false), codec.inverse(z, Tensor<float>(r.shape())));
}

TEST(AnfCodec, PayloadTracksRateEstimate) {
  Rng rng(7);
  auto codec = AnfCodec::create(CodecConfig::for_shape(128, 128, Modality::kCamera), 9);
  perturb_all(codec.params(), rng, 0.1);
  const FeatureMap x{random_map(128, 128, rng, 3.0), Modality::kCamera};
  const auto bs = codec.compress(x);
  const auto zhat = entropy::round_half_even(codec.forward(x.values).first);
  const double est = entropy::estimate_rate_bits(zhat, codec.entropy_model(), entropy::QuantMode::kRound);
  const double actual = 8.0 * static_cast<double>(bs.payload.size());
  EXPECT_LE(std::abs(actual - est), 0.02 * est + 64);
}

TEST(AnfCodec, ModelHashMismatchRefused) {
  Rng rng(8);
  auto a = AnfCodec::create(small_config(), 10);
  auto b = AnfCodec::create(small_config(), 11);
  const auto bs = a.compress({random_map(16, 12, rng), Modality::kFused});
  EXPECT_THROW(b.decompress(bs), IntegrityError);
}

TEST(AnfCodec, ShapeAndRoleChecks) {
  Rng rng(9);
  auto codec = AnfCodec::create(small_config(Modality::kLidar), 12);
  EXPECT_THROW(codec.compress({random_map(8, 12, rng), Modality::kLidar}), ShapeError);
  auto bs = codec.compress({random_map(16, 12, rng), Modality::kLidar});
  bs.header.role = Modality::kCamera;
  EXPECT_THROW(codec.decompress(bs), IntegrityError);
}

TEST(AnfCodec, TruncatedPayloadRefused) {
  Rng rng(10);
  auto codec = AnfCodec::create(small_config(), 13);
  perturb_all(codec.params(), rng, 0.3);
  auto bs = codec.compress({random_map(16, 12, rng, 4.0), Modality::kFused});
  ASSERT_GT(bs.payload.size(), 4u);
  bs.payload.resize(bs.payload.size() - 1);
  bs.header.payload_length -= 1;
  EXPECT_THROW(codec.decompress(bs), IntegrityError);
}

TEST(AnfCodec, SaveLoadKeepsHashAndOutputs) {
  Rng rng(11);
  auto codec = AnfCodec::create(small_config(Modality::kCamera), 14);
  perturb_all(codec.params(), rng, 0.2);
  const auto path = std::filesystem::temp_directory_path() / "mmfc_codec_test" / "anf.bin";
  codec.save(path);
  auto back = AnfCodec::load(path);
  EXPECT_EQ(back.config(), codec.config());
  EXPECT_EQ(back.model_hash(), codec.model_hash());
  const auto x = random_map(16, 12, rng);
  EXPECT_EQ(back.reconstruct(x), codec.reconstruct(x));
  EXPECT_THROW(CondCodec::load(path), IntegrityError);
  std::filesystem::remove_all(path.parent_path());
}

TEST(CondCodec, FreshCodecMatchesFreshUnconditionalCodec) {
  Rng rng(12);
  const auto cfg = small_config(Modality::kLidar);
  auto u = AnfCodec::create(cfg, 21);
  auto c = CondCodec::create(cfg, 21);
  const auto x = random_map(16, 12, rng);
  const auto cond = random_map(16, 12, rng);
  EXPECT_EQ(c.forward(x, cond).first, u.forward(x).first);
  EXPECT_EQ(c.reconstruct(x, cond), u.reconstruct(x));
  const auto em = c.entropy_model(cond);
  const auto um = u.entropy_model();
  ASSERT_EQ(em.channels(), 16 * cfg.latent);
  for (std::size_t i = 0; i < em.channels(); ++i) {
    EXPECT_EQ(em.loc[i], um.loc[i % cfg.latent]);
    EXPECT_EQ(em.scale[i], um.scale[i % cfg.latent]);
  }
}

TEST(CondCodec, RoundTripAndDeterminism) {
  Rng rng(13);
  auto codec = CondCodec::create(small_config(Modality::kLidar), 22);
  perturb_all(codec.params(), rng, 0.2);
  const FeatureMap x{random_map(16, 12, rng), Modality::kLidar};
  const FeatureMap cond{random_map(16, 12, rng), Modality::kCamera};
  const auto bs = codec.compress(x, cond, {2, 1});
  EXPECT_TRUE(bs.header.conditional);
  EXPECT_EQ(bs.header.role, Modality::kLidar);
  EXPECT_EQ(codec.compress(x, cond, {2, 1}), bs);
  EXPECT_EQ(bs.size_bytes(), entropy::kConditionalHeaderBytes + bs.payload.size());
  EXPECT_EQ(codec.decompress(bs, cond).values, codec.reconstruct(x.values, cond.values));
}

TEST(CondCodec, PerturbedConditionRefused) {
  Rng rng(14);
  auto codec = CondCodec::create(small_config(Modality::kCamera), 23);
  const FeatureMap x{random_map(16, 12, rng), Modality::kCamera};
  FeatureMap cond{random_map(16, 12, rng), Modality::kLidar};
  const auto bs = codec.compress(x, cond);
  cond.values[37] += 1e-3f;
  EXPECT_THROW(codec.decompress(bs, cond), IntegrityError);
}

TEST(CondCodec, MismatchedShapesRejected) {
  Rng rng(15);
  auto codec = CondCodec::create(small_config(), 24);
  EXPECT_THROW(codec.forward(random_map(16, 12, rng), random_map(15, 12, rng)), ShapeError);
}

TEST(CondCodec, InverseUndoesForwardWithConditionFixed) {
  Rng rng(16);
  auto codec = CondCodec::create(small_config(), 25);
  perturb_all(codec.params(), rng, 0.3);
  const auto x = random_map(16, 12, rng, 2.0);
  const auto cond = random_map(16, 12, rng);
  auto [z, r] = codec.forward(x, cond);
  EXPECT_LE(ndgrad::max_abs_diff(codec.inverse(z, r, cond), x), 1e-5f);
}

}  // namespace
}  // namespace mmfc::codec
