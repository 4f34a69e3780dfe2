#pragma once

#include <cstddef>
#include <vector>

#include "mmfc/ndgrad/parameter.hpp"

namespace mmfc::ndgrad {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moment buffers are kept per parameter, in the
/// order the parameters were given.
template <typename T>
class Adam {
 public:
  /// Throws ConfigError when lr <= 0 or the betas are outside [0, 1).
  Adam(std::vector<Parameter<T>*> params, AdamConfig config);

  /// Applies one update using the gradients currently stored in the
  /// parameters; `t` is the 1-based step index used for bias correction.
  void step(std::size_t t);
  /// Same, with an internal step counter.
  void step() { step(++t_); }

  [[nodiscard]] const AdamConfig& config() const { return config_; }

 private:
  std::vector<Parameter<T>*> params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t t_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace mmfc::ndgrad
