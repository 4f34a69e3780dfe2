#pragma once

#include <string>

#include "mmfc/ndgrad/graph.hpp"
#include "mmfc/ndgrad/parameter.hpp"

namespace mmfc::ndgrad {

/// Fully connected layer acting on the rows of its input: y = x W + b.
template <typename T>
struct Dense {
  Parameter<T>* weight = nullptr;  // {in, out}
  Parameter<T>* bias = nullptr;    // {out}

  static Dense create(ParameterStore<T>& store, const std::string& name, std::size_t in,
                      std::size_t out, Rng& rng) {
    Dense d;
    d.weight = &store.add_glorot(name + ".w", in, out, rng);
    d.bias = &store.add_zeros(name + ".b", Shape{out});
    return d;
  }

  static Dense bind(ParameterStore<T>& store, const std::string& name) {
    return Dense{&store.get(name + ".w"), &store.get(name + ".b")};
  }

  NodeId build(Graph<T>& g, NodeId x) const {
    return g.add(g.matmul(x, g.parameter(*weight)), g.parameter(*bias));
  }

  [[nodiscard]] std::size_t in_dim() const { return weight->value.shape()[0]; }
  [[nodiscard]] std::size_t out_dim() const { return weight->value.shape()[1]; }
};

/// Two dense layers with a leaky-relu between them.
template <typename T>
struct Mlp {
  Dense<T> hidden;
  Dense<T> out;

  static Mlp create(ParameterStore<T>& store, const std::string& name, std::size_t in,
                    std::size_t width, std::size_t out_dim, Rng& rng) {
    Mlp m;
    m.hidden = Dense<T>::create(store, name + ".hidden", in, width, rng);
    m.out = Dense<T>::create(store, name + ".out", width, out_dim, rng);
    return m;
  }

  static Mlp bind(ParameterStore<T>& store, const std::string& name) {
    return Mlp{Dense<T>::bind(store, name + ".hidden"), Dense<T>::bind(store, name + ".out")};
  }

  NodeId build(Graph<T>& g, NodeId x) const {
    return out.build(g, g.leaky_relu(hidden.build(g, x)));
  }
};

}  // namespace mmfc::ndgrad
