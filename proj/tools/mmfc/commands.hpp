#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mmfc::cli {

struct Options {
  std::filesystem::path out = "mmfc-run";
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  bool sweep = false;
  std::string topology = "a1";
  int lambda_case = 1;
  std::size_t jobs = 1;

  std::string stage;
  std::string action;  // encode | decode
  std::vector<std::filesystem::path> inputs;
  std::optional<std::filesystem::path> output;
  std::size_t index = 0;
  std::string split = "test";
  std::optional<std::size_t> timing_samples;
  std::vector<std::string> topologies;
};

int cmd_gen_data(const Options& o);
int cmd_train(const Options& o);
int cmd_codec(const Options& o);
int cmd_eval(const Options& o);
/// Flow invertibility self-check at the precision named by MMFC_PRECISION.
int cmd_check(const Options& o);

}  // namespace mmfc::cli
