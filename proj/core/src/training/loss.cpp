#include "mmfc/training/loss.hpp"

namespace mmfc::training {

double rd_loss(const FeatureMap& x, const FeatureMap& x_hat, double rate_bits, double lambda) {
  return rate_bits + lambda * ndgrad::mean_squared_error(x.values, x_hat.values);
}

}  // namespace mmfc::training
