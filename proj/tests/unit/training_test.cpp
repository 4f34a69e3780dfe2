#include <gtest/gtest.h>

#include "mmfc/error.hpp"
#include "mmfc/experiment.hpp"
#include "mmfc/training/loss.hpp"
#include "mmfc/training/sweep.hpp"
#include "mmfc/training/trainer.hpp"

namespace mmfc::training {
namespace {

FeatureMap constant_map(float v) {
  ndgrad::Tensor<float> t({4, 8});
  t.fill(v);
  return FeatureMap{std::move(t), Modality::kCamera};
}

TEST(RdLoss, HandEvaluatedExamples) {
  const auto x = constant_map(1.f);
  const auto shifted = constant_map(3.f);
  EXPECT_DOUBLE_EQ(rd_loss(x, x, 42.0, 0.5), 42.0);
  EXPECT_DOUBLE_EQ(rd_loss(x, shifted, 42.0, 0.0), 42.0);
  EXPECT_DOUBLE_EQ(rd_loss(x, shifted, 100.0, 0.0625), 100.25);
}

TEST(RdLoss, ShapeMismatchRejected) {
  const auto x = constant_map(1.f);
  const FeatureMap y{ndgrad::Tensor<float>({4, 4}), Modality::kCamera};
  EXPECT_THROW(rd_loss(x, y, 1.0, 1.0), ShapeError);
}

class SmallRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cfg_ = new ExperimentConfig();
    cfg_->train_size = 48;
    cfg_->test_size = 8;
    cfg_->head_epochs = 2;
    cfg_->codec_epochs = 2;
    data_ = new TrainingData(make_training_data(*cfg_));
    head_ = new pipeline::FusionHead(train_task_head(cfg_->head_train_config(), *data_, cfg_->head_config()).model);
  }
  static void TearDownTestSuite() {
    delete head_;
    delete data_;
    delete cfg_;
  }

  static TrainConfig codec_config() { return cfg_->codec_train_config(); }

  static ExperimentConfig* cfg_;
  static TrainingData* data_;
  static pipeline::FusionHead* head_;
};

ExperimentConfig* SmallRun::cfg_ = nullptr;
TrainingData* SmallRun::data_ = nullptr;
pipeline::FusionHead* SmallRun::head_ = nullptr;

TEST_F(SmallRun, ZeroLearningRateLeavesParametersUnchanged) {
  auto cfg = codec_config();
  cfg.lr = 0.0;
  cfg.epochs = 1;
  const auto one = train_anf(cfg, *data_, Modality::kCamera, nullptr);
  EXPECT_EQ(one.log.epochs.size(), 1u);
  cfg.epochs = 3;
  const auto three = train_anf(cfg, *data_, Modality::kCamera, nullptr);
  EXPECT_EQ(one.model.params().checksum(), three.model.params().checksum());

  cfg.lr = 1e-3;
  const auto moved = train_anf(cfg, *data_, Modality::kCamera, nullptr);
  EXPECT_NE(one.model.params().checksum(), moved.model.params().checksum());
}

TEST_F(SmallRun, SameSeedGivesIdenticalCheckpoints) {
  const auto cfg = codec_config();
  const auto a = train_anf(cfg, *data_, Modality::kLidar, nullptr);
  const auto b = train_anf(cfg, *data_, Modality::kLidar, nullptr);
  EXPECT_EQ(a.model.to_file().serialize(), b.model.to_file().serialize());
  const auto ca = train_cond(cfg, *data_, Modality::kCamera, &a.model);
  const auto cb = train_cond(cfg, *data_, Modality::kCamera, &b.model);
  EXPECT_EQ(ca.model.to_file().serialize(), cb.model.to_file().serialize());
}

TEST_F(SmallRun, CodecTrainingLeavesTheHeadFrozen) {
  const auto before = head_->checksum();
  (void)train_anf(codec_config(), *data_, Modality::kFused, head_);
  EXPECT_EQ(head_->checksum(), before);
}

TEST_F(SmallRun, StageDependenciesEnforced) {
  const auto cfg = codec_config();
  EXPECT_THROW(train_anf(cfg, *data_, Modality::kFused, nullptr), ConfigError);
  EXPECT_THROW(train_cond(cfg, *data_, Modality::kCamera, nullptr), ConfigError);
  const auto camera = train_anf(cfg, *data_, Modality::kCamera, nullptr);
  // The predictor must code the other modality.
  EXPECT_THROW(train_cond(cfg, *data_, Modality::kCamera, &camera.model), ConfigError);
  EXPECT_THROW(train_cond(cfg, *data_, Modality::kFused, &camera.model), ConfigError);
}

// Adam moves a parameter by at most about lr per step, so after 6 steps only
// the prior group (10x lr) can have moved further than 6 * lr.
TEST_F(SmallRun, PriorParametersUseTheFasterLearningRate) {
  auto cfg = codec_config();
  cfg.epochs = 1;  // 48 samples / batch 8 = 6 steps
  auto frozen = cfg;
  frozen.lr = 0.0;  // no steps: the initial parameters
  const auto init = train_anf(frozen, *data_, Modality::kCamera, nullptr).model;
  const auto trained = train_anf(cfg, *data_, Modality::kCamera, nullptr).model;
  const double step_budget = 6 * cfg.lr * 1.01;
  double prior_move = 0.0, flow_move = 0.0;
  for (const auto* p : trained.params().all()) {
    const auto& before = init.params().get(p->name).value;
    const double moved = ndgrad::max_abs_diff(p->value, before);
    const bool prior = p->name == codec::kEntropyLoc || p->name == codec::kEntropyRawScale;
    (prior ? prior_move : flow_move) = std::max(prior ? prior_move : flow_move, moved);
  }
  EXPECT_GT(prior_move, step_budget);
  EXPECT_LE(flow_move, step_budget);
}

TEST_F(SmallRun, LogHasOneRowPerEpoch) {
  auto cfg = codec_config();
  cfg.epochs = 3;
  const auto t = train_anf(cfg, *data_, Modality::kCamera, nullptr);
  ASSERT_EQ(t.log.epochs.size(), 3u);
  const auto csv = t.log.to_csv();
  EXPECT_EQ(csv.rfind("epoch,rate_bits,mse,loss,seconds\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST_F(SmallRun, SweepShapes) {
  SweepOptions opts;
  opts.grid = {0.0078125, 0.0625};
  auto cfg = codec_config();
  cfg.epochs = 1;
  const auto a1 = sweep(cfg, *data_, *head_, pipeline::Topology::kA1, 1, opts);
  EXPECT_EQ(a1.predictors.size(), 2u);
  EXPECT_TRUE(a1.conditionals.empty());
  const auto c1 = sweep(cfg, *data_, *head_, pipeline::Topology::kA2, 1, opts);
  EXPECT_EQ(c1.predictors.size(), 1u);
  EXPECT_EQ(c1.conditionals.size(), 2u);
  EXPECT_EQ(&c1.predictor_for(1), &c1.predictors.front());
  const auto c2 = sweep(cfg, *data_, *head_, pipeline::Topology::kA2, 2, opts);
  EXPECT_EQ(c2.predictors.size(), 2u);
  EXPECT_THROW(sweep(cfg, *data_, *head_, pipeline::Topology::kA3, 2, opts), ConfigError);
  opts.grid.clear();
  EXPECT_THROW(sweep(cfg, *data_, *head_, pipeline::Topology::kA1, 1, opts), ConfigError);
}

TEST(Training, ReconstructionErrorHalvesAtTopLambda) {
  ExperimentConfig cfg;
  cfg.train_size = 200;
  const auto data = make_training_data(cfg);
  auto tc = cfg.codec_train_config();
  tc.lambda = 0.0625;
  tc.epochs = 10;
  const auto t = train_anf(tc, data, Modality::kCamera, nullptr);
  EXPECT_LT(t.log.epochs.back().mse, 0.5 * t.log.epochs.front().mse);
  EXPECT_LE(t.log.epochs.back().loss, t.log.epochs.front().loss);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  cfg.lr = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.lambda_case = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.lr = 0.0;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(TrainConfig, StageNames) {
  for (auto s : {Stage::kTaskHead, Stage::kAnf, Stage::kCond}) EXPECT_EQ(parse_stage(stage_name(s)), s);
  EXPECT_THROW(parse_stage("bogus"), ConfigError);
}

TEST(TrainConfig, LambdaSeedsDifferPerIndex) {
  EXPECT_NE(lambda_seed(1, 0), lambda_seed(1, 1));
  EXPECT_EQ(lambda_seed(1, 2), lambda_seed(1, 2));
}

}  // namespace
}  // namespace mmfc::training
