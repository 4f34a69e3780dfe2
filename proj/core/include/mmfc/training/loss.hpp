#pragma once

#include <optional>

#include "mmfc/codec/anf_transform.hpp"
#include "mmfc/feature_map.hpp"

namespace mmfc::training {

/// L = rate_bits + lambda * MSE(x, x_hat), MSE averaged over all elements.
double rd_loss(const FeatureMap& x, const FeatureMap& x_hat, double rate_bits, double lambda);

/// Where the latent prior comes from: shared per-column parameters, or a
/// prior net applied to the condition rows.
template <typename T>
struct PriorSource {
  ndgrad::Parameter<T>* loc = nullptr;
  ndgrad::Parameter<T>* raw_scale = nullptr;
  const ndgrad::Mlp<T>* net = nullptr;
};

template <typename T>
struct RdGraph {
  ndgrad::NodeId loss;
  ndgrad::NodeId bits;      // total -log2 likelihood of the noisy latent
  ndgrad::NodeId mse;
  ndgrad::NodeId x_hat;
};

/// Training graph of a (conditional) ANF codec on inputs "x" (N x D),
/// "noise" (N x latent) and optionally "cond" (N x D):
///   z~ = forward(x).z + noise,  x^ = inverse(z~, 0)
///   loss = (latent / D) * mean bits per latent element + lambda_eff * MSE(x, x^)
/// i.e. the rate term is in bits per feature element.
template <typename T>
RdGraph<T> build_rd_graph(ndgrad::Graph<T>& g, const codec::AnfTransform<T>& transform, const PriorSource<T>& prior,
                          double lambda_eff) {
  const auto& shape = transform.shape();
  const auto x = g.input("x", {0, shape.dim});
  const auto noise = g.input("noise", {0, shape.latent});
  std::optional<ndgrad::NodeId> cond;
  if (shape.cond_dim) cond = g.input("cond", {0, shape.cond_dim});

  const auto branches = transform.forward(g, x, cond);
  const auto z_noisy = g.add(branches.z, noise);
  const auto zero_r = g.scale(x, 0.0);
  const auto x_hat = transform.inverse(g, z_noisy, zero_r, cond);

  ndgrad::NodeId loc, scale;
  if (prior.net) {
    const auto p = prior.net->build(g, *cond);
    loc = g.slice_last(p, 0, shape.latent);
    scale = g.softplus(g.slice_last(p, shape.latent, 2 * shape.latent));
  } else {
    loc = g.parameter(*prior.loc);
    scale = g.softplus(g.parameter(*prior.raw_scale));
  }
  const auto elem_bits = g.logistic_bin_bits(z_noisy, loc, scale);
  const auto mse = g.reduce_mean(g.square(g.sub(x, x_hat)));
  const double per_feature = static_cast<double>(shape.latent) / static_cast<double>(shape.dim);
  const auto loss = g.add(g.scale(g.reduce_mean(elem_bits), per_feature), g.scale(mse, lambda_eff));
  RdGraph<T> out{loss, g.reduce_sum(elem_bits), mse, x_hat};
  g.output("loss", loss);
  g.output("bits", out.bits);
  g.output("mse", mse);
  return out;
}

}  // namespace mmfc::training
