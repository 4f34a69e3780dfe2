#include "mmfc/ndgrad/adam.hpp"

#include <cmath>

namespace mmfc::ndgrad {

template <typename T>
Adam<T>::Adam(std::vector<Parameter<T>*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  if (!(config_.lr > 0.0)) throw ConfigError("adam: learning rate must be positive");
  if (config_.beta1 < 0.0 || config_.beta1 >= 1.0 || config_.beta2 < 0.0 || config_.beta2 >= 1.0) {
    throw ConfigError("adam: betas must lie in [0, 1)");
  }
  if (!(config_.eps > 0.0)) throw ConfigError("adam: eps must be positive");
  for (const auto* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

template <typename T>
void Adam<T>::step(std::size_t t) {
  if (t == 0) throw ConfigError("adam: step index starts at 1");
  t_ = t;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = *params_[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double update = config_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.eps);
      p.value[i] = static_cast<T>(p.value[i] - update);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace mmfc::ndgrad
