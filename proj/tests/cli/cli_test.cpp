#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

Result run(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::temp_directory_path() / ("mmfc_cli_out_" + std::to_string(::getpid()) + ".txt");
  const std::string cmd = env + " " + MMFC_TOOL + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;
  fs::path config;

  void SetUp() override {
    dir = fs::temp_directory_path() / ("mmfc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    config = dir / "tiny.json";
    std::ofstream(config) << R"({"train_size": 16, "test_size": 6, "timing_samples": 2,
      "codec": {"epochs": 1}, "head": {"epochs": 1}})";
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string out(const std::string& name = "run") const { return "--out " + (dir / name).string(); }
  Result gen(const std::string& name = "run") const {
    return run("gen-data " + out(name) + " --seed 7 --config " + config.string());
  }
};

TEST_F(Cli, GenDataIsDeterministic) {
  ASSERT_EQ(gen("a").code, 0);
  ASSERT_EQ(gen("b").code, 0);
  EXPECT_EQ(slurp(dir / "a/data/train.jsonl"), slurp(dir / "b/data/train.jsonl"));
  EXPECT_EQ(slurp(dir / "a/data/test.jsonl"), slurp(dir / "b/data/test.jsonl"));
  const auto ma = nlohmann::json::parse(slurp(dir / "a/manifest.json"));
  const auto mb = nlohmann::json::parse(slurp(dir / "b/manifest.json"));
  EXPECT_EQ(ma["artifacts"], mb["artifacts"]);
  EXPECT_EQ(ma["seeds"]["experiment"], 7);
  EXPECT_EQ(ma["tool"], "mmfc");
}

TEST_F(Cli, EmptyScenesAreAccepted) {
  std::ofstream(config) << R"({"train_size": 4, "test_size": 2, "scene": {"density": 0.0}})";
  EXPECT_EQ(gen().code, 0);
}

TEST_F(Cli, MalformedConfigExitsWithConfigCode) {
  std::ofstream(config) << R"({"train_size": "many"})";
  EXPECT_EQ(gen().code, 2);
  std::ofstream(config) << R"({"codec": {"lambda_grid": [0.1, 0.05]}, "unknown": 1})";
  EXPECT_EQ(gen().code, 2);
  std::ofstream(config) << "{not json";
  EXPECT_EQ(gen().code, 2);
}

TEST_F(Cli, CommandsBeforeGenDataReportMissingDependency) {
  EXPECT_EQ(run("train " + out() + " --stage anf --lambda 0.0078125").code, 3);
  EXPECT_EQ(run("eval " + out()).code, 3);
}

TEST_F(Cli, TrainingRespectsDependenciesAndGrid) {
  ASSERT_EQ(gen().code, 0);
  EXPECT_EQ(run("train " + out() + " --stage cond --topology a2 --lambda 0.0078125").code, 3);
  EXPECT_EQ(run("train " + out() + " --stage anf --topology a1 --lambda 0.0078125").code, 3);
  EXPECT_EQ(run("train " + out() + " --stage anf --topology a2 --lambda 0.3").code, 2);
  EXPECT_EQ(run("train " + out() + " --stage anf --topology a2").code, 2);

  ASSERT_EQ(run("train " + out() + " --stage anf --topology a2 --lambda 0.0078125").code, 0);
  EXPECT_TRUE(fs::exists(dir / "run/models/anf_a2_l0.ckpt"));
  EXPECT_TRUE(fs::exists(dir / "run/logs/anf_a2_l0.csv"));
  EXPECT_FALSE(fs::exists(dir / "run/models/anf_a2_l1.ckpt"));

  ASSERT_EQ(run("train " + out() + " --stage anf --topology a3 --sweep --jobs 2").code, 0);
  for (int i = 0; i < 4; ++i) EXPECT_TRUE(fs::exists(dir / ("run/models/anf_a3_l" + std::to_string(i) + ".ckpt")));

  ASSERT_EQ(run("train " + out() + " --stage cond --topology a2 --case 1 --lambda 0.0078125").code, 0);
  EXPECT_EQ(run("train " + out() + " --stage cond --topology a3 --case 2 --sweep").code, 2);
}

TEST_F(Cli, CheckpointsAreReproducible) {
  ASSERT_EQ(gen("a").code, 0);
  ASSERT_EQ(gen("b").code, 0);
  ASSERT_EQ(run("train " + out("a") + " --stage anf --topology a2 --lambda 0.03125").code, 0);
  ASSERT_EQ(run("train " + out("b") + " --stage anf --topology a2 --sweep --jobs 3").code, 0);
  EXPECT_EQ(slurp(dir / "a/models/anf_a2_l2.ckpt"), slurp(dir / "b/models/anf_a2_l2.ckpt"));
}

class CliPipeline : public Cli {
 protected:
  void SetUp() override {
    Cli::SetUp();
    ASSERT_EQ(gen().code, 0);
    ASSERT_EQ(run("train " + out() + " --stage all").code, 0);
  }
};

TEST_F(CliPipeline, StageAllTrainsEveryModel) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir / "run/models")) n += e.path().extension() == ".ckpt";
  // head + a1 sweep + a2 sweep + a3 predictor + a2 case 1 + a2 case 2 + a3 case 1
  EXPECT_EQ(n, 1u + 4 + 4 + 1 + 4 + 4 + 4);
}

TEST_F(CliPipeline, EncodeDecodeRoundTrip) {
  const auto enc = run("codec encode " + out() + " --topology a2 --case 1 --lambda 0.0625 --index 1");
  ASSERT_EQ(enc.code, 0) << enc.out;
  const auto cam = dir / "run/streams/a2_case1_l3_test1.camera.mmfc";
  const auto lid = dir / "run/streams/a2_case1_l3_test1.lidar.mmfc";
  ASSERT_TRUE(fs::exists(cam));
  ASSERT_TRUE(fs::exists(lid));
  const auto dec = run("codec decode " + out() + " --case 1 --input " + cam.string() + " --input " + lid.string());
  ASSERT_EQ(dec.code, 0) << dec.out;
  // Each reconstruction digest printed at encode time reappears at decode time.
  std::istringstream lines(enc.out);
  std::string line;
  int digests = 0;
  while (std::getline(lines, line)) {
    const auto at = line.find("reconstruction ");
    if (at == std::string::npos) continue;
    ++digests;
    EXPECT_NE(dec.out.find(line.substr(at)), std::string::npos) << line;
  }
  EXPECT_EQ(digests, 2);
}

TEST_F(CliPipeline, SingleStreamTopologyEmitsOneFile) {
  ASSERT_EQ(run("codec encode " + out() + " --topology a1 --lambda 0.0078125 --index 0").code, 0);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir / "run/streams")) n += e.path().extension() == ".mmfc";
  EXPECT_EQ(n, 1u);
}

TEST_F(CliPipeline, CorruptedStreamIsRejected) {
  ASSERT_EQ(run("codec encode " + out() + " --topology a1 --lambda 0.0078125 --index 0").code, 0);
  const auto file = dir / "run/streams/a1_l0_test0.fused.mmfc";
  ASSERT_TRUE(fs::exists(file));
  auto bytes = slurp(file);
  bytes[bytes.size() / 2] ^= 0x5a;
  std::ofstream(file, std::ios::binary) << bytes;
  EXPECT_EQ(run("codec decode " + out() + " --input " + file.string()).code, 4);
  std::ofstream(file, std::ios::binary) << bytes.substr(0, 10);
  EXPECT_EQ(run("codec decode " + out() + " --input " + file.string()).code, 4);
}

TEST_F(CliPipeline, EncodeRejectsOutOfRangeIndex) {
  EXPECT_NE(run("codec encode " + out() + " --topology a1 --lambda 0.0078125 --index 99").code, 0);
}

TEST_F(CliPipeline, EvalWritesCurvesAndSummary) {
  const auto r = run("eval " + out());
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* c : {"a1", "a2_case1", "a2_case2", "a3_case1"}) {
    EXPECT_TRUE(fs::exists(dir / ("run/eval/curve_" + std::string(c) + ".csv"))) << c;
  }
  const auto summary = nlohmann::json::parse(slurp(dir / "run/eval/summary.json"));
  EXPECT_EQ(summary["curves"].size(), 4u);
  EXPECT_TRUE(summary.contains("bd_rate"));
  EXPECT_TRUE(summary.contains("timing"));
  EXPECT_EQ(summary["a1_top"]["raw_bytes"], 64 * 32 * 4);
  const auto manifest = nlohmann::json::parse(slurp(dir / "run/manifest.json"));
  EXPECT_TRUE(manifest["artifacts"].contains("eval/summary.json"));
}

TEST(CliCheck, FlowInvertibilityAtBothPrecisions) {
  EXPECT_EQ(run("check", "MMFC_PRECISION=f32").code, 0);
  EXPECT_EQ(run("check", "MMFC_PRECISION=f64").code, 0);
  EXPECT_EQ(run("check", "MMFC_PRECISION=f16").code, 2);
}

TEST(CliUsage, UnknownSubcommandIsAConfigError) {
  EXPECT_EQ(run("compress").code, 2);
  EXPECT_EQ(run("train --stage nope").code, 2);
}

}  // namespace
