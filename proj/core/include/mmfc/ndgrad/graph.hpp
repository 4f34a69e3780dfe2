#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmfc/ndgrad/parameter.hpp"
#include "mmfc/ndgrad/tensor.hpp"

namespace mmfc::ndgrad {

enum class OpKind : std::uint8_t {
  kInput,
  kParameter,
  kConstant,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kScale,
  kLeakyRelu,
  kTanh,
  kSoftplus,
  kSquare,
  kConcatLast,
  kSliceLast,
  kReshape,
  kReduceSum,
  kReduceMean,
  kLogisticBinBits,
  kSoftmaxCrossEntropy,
};

std::string_view op_name(OpKind kind);

struct NodeId {
  std::uint32_t index = 0;
  friend bool operator==(NodeId, NodeId) = default;
};

inline constexpr double kLeakySlope = 0.1;
/// Likelihood floor inside logistic_bin_bits; below it the gradient is zero.
inline constexpr double kLikelihoodFloor = 1e-9;

template <typename T>
using Bindings = std::map<std::string, Tensor<T>, std::less<>>;

/// Static computation graph. Nodes are appended in topological order, so the
/// graph is acyclic by construction. Binary element-wise ops accept equal
/// shapes, or a rank-1 right operand broadcast across the rows of the left.
template <typename T>
class Graph {
 public:
  struct Node {
    OpKind kind = OpKind::kInput;
    std::vector<NodeId> in;
    double scalar = 0.0;       // Scale factor / leaky slope
    std::size_t begin = 0;     // SliceLast
    std::size_t end = 0;
    Shape shape;               // Reshape target / Input declared shape (0 = any)
    std::string name;          // Input slot name
    Parameter<T>* param = nullptr;
    Tensor<T> constant;
  };

  /// Declares a named input; dims given as 0 are unconstrained.
  NodeId input(std::string name, Shape declared = {});
  NodeId parameter(Parameter<T>& p);
  NodeId constant(Tensor<T> value);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId leaky_relu(NodeId a, double slope = kLeakySlope);
  NodeId tanh(NodeId a);
  NodeId softplus(NodeId a);
  NodeId square(NodeId a);
  NodeId concat_last(NodeId a, NodeId b);
  NodeId slice_last(NodeId a, std::size_t begin, std::size_t end);
  NodeId reshape(NodeId a, Shape shape);
  NodeId reduce_sum(NodeId a);
  NodeId reduce_mean(NodeId a);
  /// Element-wise -log2 of the mass a logistic(loc, scale) puts on
  /// [value - 1/2, value + 1/2]. loc/scale broadcast like add().
  NodeId logistic_bin_bits(NodeId value, NodeId loc, NodeId scale);
  /// Per-row softmax cross-entropy (nats) of logits against target
  /// distributions; targets receive no gradient. Output shape {rows}.
  NodeId softmax_cross_entropy(NodeId logits, NodeId targets);

  void output(std::string name, NodeId node);

  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<std::pair<std::string, NodeId>>& inputs() const { return inputs_; }
  [[nodiscard]] const std::vector<std::pair<std::string, NodeId>>& outputs() const { return outputs_; }
  [[nodiscard]] std::optional<NodeId> find_output(std::string_view name) const;
  /// Parameters referenced by the graph, in first-use order.
  [[nodiscard]] std::vector<Parameter<T>*> parameters() const;
  [[nodiscard]] std::string describe(NodeId id) const;

 private:
  static Node make(OpKind kind, std::vector<NodeId> in = {});
  NodeId push(Node node);
  void check_id(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<std::pair<std::string, NodeId>> inputs_;
  std::vector<std::pair<std::string, NodeId>> outputs_;
};

/// Runs the graph forward. Pure: neither inputs nor parameters are touched, and
/// identical inputs give bit-identical outputs. Throws ShapeError naming the
/// offending node if the bound shapes are inconsistent.
template <typename T>
Bindings<T> evaluate(const Graph<T>& graph, const Bindings<T>& inputs);

template <typename T>
struct GradientResult {
  Bindings<T> outputs;
  /// d(output)/d(input) for every input slot.
  Bindings<T> input_grads;
};

/// Reverse-mode differentiation of the scalar output `output` (the first
/// declared output when empty). Overwrites the grad of each parameter in
/// `wrt`; parameters not listed are left untouched.
template <typename T>
GradientResult<T> gradient(const Graph<T>& graph, const Bindings<T>& inputs,
                           std::span<Parameter<T>* const> wrt, std::string_view output = {});

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace mmfc::ndgrad
