#include "mmfc/entropy/quantize.hpp"

#include <cfenv>
#include <cmath>

namespace mmfc::entropy {

ndgrad::Tensor<float> uniform_noise(const ndgrad::Shape& shape, Rng& rng) {
  ndgrad::Tensor<float> u(shape);
  for (auto& v : u.values()) v = static_cast<float>(rng.uniform() - 0.5);
  return u;
}

template <typename T>
ndgrad::Tensor<T> round_half_even(const ndgrad::Tensor<T>& x) {
  // nearbyint honours the current rounding mode; the default is
  // round-to-nearest-even and nothing in this project changes it.
  ndgrad::Tensor<T> out = x;
  for (auto& v : out.values()) v = std::nearbyint(v);
  return out;
}

template <typename T>
ndgrad::Tensor<T> quantize(const ndgrad::Tensor<T>& x, QuantMode mode, Rng& rng) {
  if (mode == QuantMode::kRound) return round_half_even(x);
  ndgrad::Tensor<T> out = x;
  for (auto& v : out.values()) v += static_cast<T>(rng.uniform() - 0.5);
  return out;
}

template ndgrad::Tensor<float> quantize(const ndgrad::Tensor<float>&, QuantMode, Rng&);
template ndgrad::Tensor<double> quantize(const ndgrad::Tensor<double>&, QuantMode, Rng&);
template ndgrad::Tensor<float> round_half_even(const ndgrad::Tensor<float>&);
template ndgrad::Tensor<double> round_half_even(const ndgrad::Tensor<double>&);

}  // namespace mmfc::entropy
