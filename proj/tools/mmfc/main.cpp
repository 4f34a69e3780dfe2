#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "mmfc/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDependency = 3;
constexpr int kExitIntegrity = 4;

void add_common(CLI::App& app, mmfc::cli::Options& o) {
  app.add_option("--out", o.out, "Run directory")->capture_default_str();
  app.add_option("--seed", o.seed, "Experiment seed");
  app.add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mmfc;
  cli::Options o;
  const CLI::IsMember kTopologies({"a1", "a2", "a3"});
  CLI::App app{"Learned multimodal feature compression toolkit"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "Write the config snapshot and the train/test scene splits");
  add_common(*gen, o);
  gen->add_option("--config", o.config, "JSON experiment config");

  auto* train = app.add_subcommand("train", "Train the task head or codecs");
  add_common(*train, o);
  train->add_option("--stage", o.stage, "task-head | anf | cond | all")
      ->required()
      ->check(CLI::IsMember({"task-head", "anf", "cond", "all"}));
  train->add_option("--lambda", o.lambda, "Single lambda from the grid");
  train->add_flag("--sweep", o.sweep, "Train every lambda of the grid");
  train->add_option("--topology", o.topology, "a1 | a2 | a3")->check(kTopologies)->capture_default_str();
  train->add_option("--case", o.lambda_case, "Predictor pairing for a2/a3 (1 or 2)")->check(CLI::Range(1, 2))->capture_default_str();

  auto* codec = app.add_subcommand("codec", "Encode a scene to bitstreams or decode bitstreams");
  add_common(*codec, o);
  codec->add_option("action", o.action, "encode | decode")->required()->check(CLI::IsMember({"encode", "decode"}));
  codec->add_option("--topology", o.topology, "a1 | a2 | a3 (encode)")->check(kTopologies)->capture_default_str();
  codec->add_option("--case", o.lambda_case, "Predictor pairing for a2/a3")->check(CLI::Range(1, 2))->capture_default_str();
  codec->add_option("--lambda", o.lambda, "Lambda of the codec (encode)");
  codec->add_option("--index", o.index, "Scene index in the split (encode)")->capture_default_str();
  codec->add_option("--split", o.split, "train | test (encode)")
      ->check(CLI::IsMember({"train", "test"}))
      ->capture_default_str();
  codec->add_option("--input", o.inputs, "Bitstream file(s) (decode)");
  codec->add_option("--output", o.output, "Output directory (default <out>/streams)");

  auto* ev = app.add_subcommand("eval", "RD curves, BD-rate table and timing");
  add_common(*ev, o);
  ev->add_option("--topology", o.topologies, "Restrict to these topologies (repeatable)")->check(kTopologies);
  ev->add_option("--timing-samples", o.timing_samples, "Samples per timing measurement (0 skips)");

  auto* check = app.add_subcommand("check", "Flow invertibility self-check (precision from MMFC_PRECISION)");
  check->add_option("--seed", o.seed, "Seed of the random flows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cli::cmd_gen_data(o);
    if (*train) return cli::cmd_train(o);
    if (*codec) return cli::cmd_codec(o);
    if (*ev) return cli::cmd_eval(o);
    if (*check) return cli::cmd_check(o);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const ShapeError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const DependencyError& e) {
    fmt::print(stderr, "missing dependency: {}\n", e.what());
    return kExitDependency;
  } catch (const IntegrityError& e) {
    fmt::print(stderr, "data integrity error: {}\n", e.what());
    return kExitIntegrity;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
