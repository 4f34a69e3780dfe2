#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include "mmfc/ndgrad/layers.hpp"

namespace mmfc::codec {

struct AnfShape {
  std::size_t dim = 32;
  std::size_t latent = 8;
  std::size_t hidden = 32;
  std::size_t cond_dim = 0;  // 0: unconditional
};

/// Two-layer net whose first layer has `extra` zero-initialised input rows
/// appended after the first `in` rows. It draws the same random numbers as a
/// net without them, so a conditional net starts out equal to its
/// unconditional counterpart.
template <typename T>
ndgrad::Mlp<T> padded_mlp(ndgrad::ParameterStore<T>& store, const std::string& name, std::size_t in,
                          std::size_t extra, std::size_t width, std::size_t out, Rng& rng) {
  ndgrad::ParameterStore<T> scratch;
  const auto& drawn = scratch.add_glorot("w", in, width, rng).value;
  ndgrad::Tensor<T> w({in + extra, width}, T{0});
  std::copy(drawn.values().begin(), drawn.values().end(), w.values().begin());
  ndgrad::Mlp<T> m;
  m.hidden.weight = &store.add(name + ".hidden.w", std::move(w));
  m.hidden.bias = &store.add_zeros(name + ".hidden.b", ndgrad::Shape{width});
  m.out = ndgrad::Dense<T>::create(store, name + ".out", width, out, rng);
  return m;
}

/// Two-step augmented normalizing flow with additive couplings. The x branch
/// has `dim` columns, the augmented z branch `latent` columns. Forward:
///   z <- z + enc_k([x | cond]);  x <- x - dec_k([z | cond])   for k = 0, 1
/// starting from z = 0; the final x branch is the residual r.
template <typename T>
class AnfTransform {
 public:
  static constexpr std::size_t kSteps = 2;

  struct Step {
    ndgrad::Mlp<T> enc;
    ndgrad::Mlp<T> dec;
  };

  struct Branches {
    ndgrad::NodeId z;
    ndgrad::NodeId r;
  };

  static AnfTransform create(ndgrad::ParameterStore<T>& store, const std::string& prefix, const AnfShape& shape,
                             Rng& rng) {
    AnfTransform t;
    t.shape_ = shape;
    for (std::size_t k = 0; k < kSteps; ++k) {
      const std::string name = prefix + ".step" + std::to_string(k);
      t.steps_[k].enc = padded_mlp(store, name + ".enc", shape.dim, shape.cond_dim, shape.hidden, shape.latent, rng);
      t.steps_[k].dec = padded_mlp(store, name + ".dec", shape.latent, shape.cond_dim, shape.hidden, shape.dim, rng);
    }
    return t;
  }

  static AnfTransform bind(ndgrad::ParameterStore<T>& store, const std::string& prefix, const AnfShape& shape) {
    AnfTransform t;
    t.shape_ = shape;
    for (std::size_t k = 0; k < kSteps; ++k) {
      const std::string name = prefix + ".step" + std::to_string(k);
      t.steps_[k].enc = ndgrad::Mlp<T>::bind(store, name + ".enc");
      t.steps_[k].dec = ndgrad::Mlp<T>::bind(store, name + ".dec");
    }
    return t;
  }

  [[nodiscard]] const AnfShape& shape() const { return shape_; }
  [[nodiscard]] const Step& step(std::size_t k) const { return steps_[k]; }

  Branches forward(ndgrad::Graph<T>& g, ndgrad::NodeId x, std::optional<ndgrad::NodeId> cond = {}) const {
    std::optional<ndgrad::NodeId> z;
    for (const auto& s : steps_) {
      const auto update = s.enc.build(g, with_cond(g, x, cond));
      z = z ? g.add(*z, update) : update;
      x = g.sub(x, s.dec.build(g, with_cond(g, *z, cond)));
    }
    return {*z, x};
  }

  /// Exact algebraic inverse of forward() given both branches; returns x.
  ndgrad::NodeId inverse(ndgrad::Graph<T>& g, ndgrad::NodeId z, ndgrad::NodeId r,
                         std::optional<ndgrad::NodeId> cond = {}) const {
    ndgrad::NodeId x = r;
    for (std::size_t k = kSteps; k-- > 0;) {
      x = g.add(x, steps_[k].dec.build(g, with_cond(g, z, cond)));
      if (k > 0) z = g.sub(z, steps_[k].enc.build(g, with_cond(g, x, cond)));
    }
    return x;
  }

 private:
  static ndgrad::NodeId with_cond(ndgrad::Graph<T>& g, ndgrad::NodeId branch, std::optional<ndgrad::NodeId> cond) {
    return cond ? g.concat_last(branch, *cond) : branch;
  }

  AnfShape shape_;
  Step steps_[kSteps];
};

}  // namespace mmfc::codec
