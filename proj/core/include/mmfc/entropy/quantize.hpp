#pragma once

#include "mmfc/ndgrad/tensor.hpp"
#include "mmfc/rng.hpp"

namespace mmfc::entropy {

enum class QuantMode { kNoise, kRound };

/// Additive Uniform(-1/2, 1/2) noise of the given shape.
ndgrad::Tensor<float> uniform_noise(const ndgrad::Shape& shape, Rng& rng);

/// kRound: nearest integer, ties to even. kNoise: x + U(-1/2, 1/2), drawn from rng.
template <typename T>
ndgrad::Tensor<T> quantize(const ndgrad::Tensor<T>& x, QuantMode mode, Rng& rng);

/// Rounding without a generator (kRound only).
template <typename T>
ndgrad::Tensor<T> round_half_even(const ndgrad::Tensor<T>& x);

}  // namespace mmfc::entropy
