#include "mmfc/training/sweep.hpp"

#include "mmfc/parallel.hpp"

namespace mmfc::training {

const codec::AnfCodec& SweepResult::predictor_for(std::size_t lambda_index) const {
  if (predictors.empty()) throw DependencyError("sweep has no predictor codecs");
  return predictors.size() == 1 ? predictors.front() : predictors.at(lambda_index);
}

SweepResult sweep(const TrainConfig& base, const TrainingData& data, const pipeline::FusionHead& head,
                  pipeline::Topology topology, int lambda_case, const SweepOptions& options) {
  using pipeline::Topology;
  if (options.grid.empty()) throw ConfigError("sweep: lambda grid is empty");
  if (lambda_case != 1 && lambda_case != 2) throw ConfigError("sweep: case must be 1 or 2");
  if (topology == Topology::kA3 && lambda_case != 1) {
    throw ConfigError("sweep: approach 3 is built for case 1 only");
  }
  const std::size_t n = options.grid.size();
  SweepResult res;
  res.topology = topology;
  res.lambda_case = topology == Topology::kA1 ? 1 : lambda_case;
  res.lambdas = options.grid;

  auto config_for = [&](Stage stage, std::size_t i) {
    TrainConfig cfg = base;
    cfg.stage = stage;
    cfg.lambda = options.grid[i];
    cfg.lambda_case = res.lambda_case;
    cfg.seed = lambda_seed(base.seed, i);
    return cfg;
  };

  const Modality first = topology == Topology::kA1   ? Modality::kFused
                         : topology == Topology::kA2 ? Modality::kCamera
                                                     : Modality::kLidar;
  const std::size_t predictor_count = topology == Topology::kA1 || lambda_case == 2 ? n : 1;
  std::vector<std::optional<codec::AnfCodec>> predictors(predictor_count);
  std::vector<TrainLog> predictor_logs(predictor_count);
  std::vector<char> trained(predictor_count, 0);
  parallel_for(predictor_count, options.jobs, [&](std::size_t i) {
    if (options.predictor_cache) {
      if (const auto* cached = options.predictor_cache(first, i)) {
        predictors[i] = cached->clone();
        return;
      }
    }
    auto t = train_anf(config_for(Stage::kAnf, i), data, first, first == Modality::kFused ? &head : nullptr);
    predictors[i] = std::move(t.model);
    predictor_logs[i] = std::move(t.log);
    trained[i] = 1;
  });
  for (std::size_t i = 0; i < predictor_count; ++i) {
    res.predictors.push_back(std::move(*predictors[i]));
    if (trained[i]) res.predictor_logs.push_back(std::move(predictor_logs[i]));
  }
  if (topology == Topology::kA1) return res;

  const Modality target = first == Modality::kCamera ? Modality::kLidar : Modality::kCamera;
  std::vector<std::optional<codec::CondCodec>> conds(n);
  std::vector<TrainLog> cond_logs(n);
  parallel_for(n, options.jobs, [&](std::size_t i) {
    auto t = train_cond(config_for(Stage::kCond, i), data, target, &res.predictor_for(i));
    conds[i] = std::move(t.model);
    cond_logs[i] = std::move(t.log);
  });
  for (std::size_t i = 0; i < n; ++i) {
    res.conditionals.push_back(std::move(*conds[i]));
    res.conditional_logs.push_back(std::move(cond_logs[i]));
  }
  return res;
}

}  // namespace mmfc::training
