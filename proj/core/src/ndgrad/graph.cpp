#include "mmfc/ndgrad/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mmfc::ndgrad {

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kInput: return "input";
    case OpKind::kParameter: return "parameter";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kLeakyRelu: return "leaky_relu";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSoftplus: return "softplus";
    case OpKind::kSquare: return "square";
    case OpKind::kConcatLast: return "concat_last";
    case OpKind::kSliceLast: return "slice_last";
    case OpKind::kReshape: return "reshape";
    case OpKind::kReduceSum: return "reduce_sum";
    case OpKind::kReduceMean: return "reduce_mean";
    case OpKind::kLogisticBinBits: return "logistic_bin_bits";
    case OpKind::kSoftmaxCrossEntropy: return "softmax_cross_entropy";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Graph construction

template <typename T>
typename Graph<T>::Node Graph<T>::make(OpKind kind, std::vector<NodeId> in) {
  Node n;
  n.kind = kind;
  n.in = std::move(in);
  return n;
}

template <typename T>
NodeId Graph<T>::push(Node node) {
  for (NodeId id : node.in) check_id(id);
  nodes_.push_back(std::move(node));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
void Graph<T>::check_id(NodeId id) const {
  if (id.index >= nodes_.size()) throw Error("graph: dangling node id " + std::to_string(id.index));
}

template <typename T>
NodeId Graph<T>::input(std::string name, Shape declared) {
  for (const auto& [existing, id] : inputs_) {
    if (existing == name) throw Error("graph: duplicate input slot '" + name + "'");
  }
  Node n = make(OpKind::kInput, {});
  n.name = name;
  n.shape = std::move(declared);
  const NodeId id = push(std::move(n));
  inputs_.emplace_back(std::move(name), id);
  return id;
}

template <typename T>
NodeId Graph<T>::parameter(Parameter<T>& p) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == OpKind::kParameter && nodes_[i].param == &p) {
      return NodeId{static_cast<std::uint32_t>(i)};
    }
  }
  Node n = make(OpKind::kParameter, {});
  n.param = &p;
  n.name = p.name;
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::constant(Tensor<T> value) {
  Node n = make(OpKind::kConstant, {});
  n.constant = std::move(value);
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::matmul(NodeId a, NodeId b) { return push(make(OpKind::kMatMul, {a, b})); }
template <typename T>
NodeId Graph<T>::add(NodeId a, NodeId b) { return push(make(OpKind::kAdd, {a, b})); }
template <typename T>
NodeId Graph<T>::sub(NodeId a, NodeId b) { return push(make(OpKind::kSub, {a, b})); }
template <typename T>
NodeId Graph<T>::mul(NodeId a, NodeId b) { return push(make(OpKind::kMul, {a, b})); }

template <typename T>
NodeId Graph<T>::scale(NodeId a, double factor) {
  Node n = make(OpKind::kScale, {a});
  n.scalar = factor;
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::leaky_relu(NodeId a, double slope) {
  Node n = make(OpKind::kLeakyRelu, {a});
  n.scalar = slope;
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::tanh(NodeId a) { return push(make(OpKind::kTanh, {a})); }
template <typename T>
NodeId Graph<T>::softplus(NodeId a) { return push(make(OpKind::kSoftplus, {a})); }
template <typename T>
NodeId Graph<T>::square(NodeId a) { return push(make(OpKind::kSquare, {a})); }
template <typename T>
NodeId Graph<T>::concat_last(NodeId a, NodeId b) { return push(make(OpKind::kConcatLast, {a, b})); }

template <typename T>
NodeId Graph<T>::slice_last(NodeId a, std::size_t begin, std::size_t end) {
  if (begin >= end) throw ShapeError("slice_last: empty range");
  Node n = make(OpKind::kSliceLast, {a});
  n.begin = begin;
  n.end = end;
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::reshape(NodeId a, Shape shape) {
  Node n = make(OpKind::kReshape, {a});
  n.shape = std::move(shape);
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::reduce_sum(NodeId a) { return push(make(OpKind::kReduceSum, {a})); }
template <typename T>
NodeId Graph<T>::reduce_mean(NodeId a) { return push(make(OpKind::kReduceMean, {a})); }

template <typename T>
NodeId Graph<T>::logistic_bin_bits(NodeId value, NodeId loc, NodeId scale) {
  return push(make(OpKind::kLogisticBinBits, {value, loc, scale}));
}

template <typename T>
NodeId Graph<T>::softmax_cross_entropy(NodeId logits, NodeId targets) {
  return push(make(OpKind::kSoftmaxCrossEntropy, {logits, targets}));
}

template <typename T>
void Graph<T>::output(std::string name, NodeId node) {
  check_id(node);
  for (auto& [existing, id] : outputs_) {
    if (existing == name) {
      id = node;
      return;
    }
  }
  outputs_.emplace_back(std::move(name), node);
}

template <typename T>
std::optional<NodeId> Graph<T>::find_output(std::string_view name) const {
  for (const auto& [existing, id] : outputs_) {
    if (existing == name) return id;
  }
  return std::nullopt;
}

template <typename T>
std::vector<Parameter<T>*> Graph<T>::parameters() const {
  std::vector<Parameter<T>*> out;
  for (const Node& n : nodes_) {
    if (n.kind == OpKind::kParameter) out.push_back(n.param);
  }
  return out;
}

template <typename T>
std::string Graph<T>::describe(NodeId id) const {
  check_id(id);
  const Node& n = nodes_[id.index];
  std::string s = "node #" + std::to_string(id.index) + " (" + std::string(op_name(n.kind));
  if (!n.name.empty()) s += " '" + n.name + "'";
  return s + ")";
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

enum class Broadcast { kSame, kRow };

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_d(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// Mass of logistic(0,1) on [lo, hi], computed on the tail that keeps precision.
double logistic_interval(double lo, double hi) {
  if (lo + hi > 0) return sigmoid(-lo) - sigmoid(-hi);
  return sigmoid(hi) - sigmoid(lo);
}

template <typename T>
class Evaluator {
 public:
  explicit Evaluator(const Graph<T>& g) : g_(g) {}

  void run(const Bindings<T>& inputs) {
    const auto& nodes = g_.nodes();
    shapes_.resize(nodes.size());
    values_.assign(nodes.size(), nullptr);
    owned_.assign(nodes.size(), Tensor<T>{});
    broadcast_.assign(nodes.size(), Broadcast::kSame);
    infer_shapes(inputs);
    for (std::size_t i = 0; i < nodes.size(); ++i) forward(i, inputs);
  }

  const Tensor<T>& value(NodeId id) const { return *values_[id.index]; }
  const Shape& shape(NodeId id) const { return shapes_[id.index]; }

  void backward(NodeId out, std::vector<Tensor<T>>& grads) const;

 private:
  [[noreturn]] void fail(std::size_t i, const std::string& why) const {
    throw ShapeError(g_.describe(NodeId{static_cast<std::uint32_t>(i)}) + ": " + why);
  }

  Broadcast binary_rule(std::size_t i, const Shape& a, const Shape& b) const {
    if (a == b) return Broadcast::kSame;
    if (b.size() == 1 && !a.empty() && b[0] == a.back()) return Broadcast::kRow;
    fail(i, "incompatible operand shapes " + to_string(a) + " and " + to_string(b));
  }

  void infer_shapes(const Bindings<T>& inputs);
  void forward(std::size_t i, const Bindings<T>& inputs);

  const Graph<T>& g_;
  std::vector<Shape> shapes_;
  std::vector<const Tensor<T>*> values_;
  std::vector<Tensor<T>> owned_;
  std::vector<Broadcast> broadcast_;
};

template <typename T>
void Evaluator<T>::infer_shapes(const Bindings<T>& inputs) {
  const auto& nodes = g_.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    auto in_shape = [&](std::size_t k) -> const Shape& { return shapes_[n.in[k].index]; };
    Shape& out = shapes_[i];
    switch (n.kind) {
      case OpKind::kInput: {
        auto it = inputs.find(n.name);
        if (it == inputs.end()) fail(i, "input slot not bound");
        out = it->second.shape();
        if (!n.shape.empty()) {
          bool ok = n.shape.size() == out.size();
          for (std::size_t d = 0; ok && d < out.size(); ++d) {
            ok = n.shape[d] == 0 || n.shape[d] == out[d];
          }
          if (!ok) fail(i, "bound shape " + to_string(out) + " violates declared " + to_string(n.shape));
        }
        break;
      }
      case OpKind::kParameter:
        out = n.param->value.shape();
        break;
      case OpKind::kConstant:
        out = n.constant.shape();
        break;
      case OpKind::kMatMul: {
        const Shape& a = in_shape(0);
        const Shape& b = in_shape(1);
        if (a.size() != 2 || b.size() != 2 || a[1] != b[0]) {
          fail(i, "cannot multiply " + to_string(a) + " by " + to_string(b));
        }
        out = {a[0], b[1]};
        break;
      }
      case OpKind::kAdd:
      case OpKind::kSub:
      case OpKind::kMul:
        broadcast_[i] = binary_rule(i, in_shape(0), in_shape(1));
        out = in_shape(0);
        break;
      case OpKind::kScale:
      case OpKind::kLeakyRelu:
      case OpKind::kTanh:
      case OpKind::kSoftplus:
      case OpKind::kSquare:
        out = in_shape(0);
        break;
      case OpKind::kConcatLast: {
        const Shape& a = in_shape(0);
        const Shape& b = in_shape(1);
        if (a.size() != b.size() || !std::equal(a.begin(), a.end() - 1, b.begin())) {
          fail(i, "leading dims differ: " + to_string(a) + " vs " + to_string(b));
        }
        out = a;
        out.back() += b.back();
        break;
      }
      case OpKind::kSliceLast: {
        out = in_shape(0);
        if (n.end > out.back()) fail(i, "slice end beyond last dim of " + to_string(out));
        out.back() = n.end - n.begin;
        break;
      }
      case OpKind::kReshape:
        if (shape_size(n.shape) != shape_size(in_shape(0))) {
          fail(i, "cannot reshape " + to_string(in_shape(0)) + " to " + to_string(n.shape));
        }
        out = n.shape;
        break;
      case OpKind::kReduceSum:
      case OpKind::kReduceMean:
        out = {1};
        break;
      case OpKind::kLogisticBinBits: {
        const Shape& v = in_shape(0);
        const Broadcast b1 = binary_rule(i, v, in_shape(1));
        const Broadcast b2 = binary_rule(i, v, in_shape(2));
        if (b1 != b2) fail(i, "loc and scale must broadcast the same way");
        broadcast_[i] = b1;
        out = v;
        break;
      }
      case OpKind::kSoftmaxCrossEntropy: {
        const Shape& a = in_shape(0);
        if (a.size() != 2 || in_shape(1) != a) {
          fail(i, "logits " + to_string(a) + " and targets " + to_string(in_shape(1)) +
                      " must be equal rank-2 shapes");
        }
        out = {a[0]};
        break;
      }
    }
  }
}

template <typename T>
void Evaluator<T>::forward(std::size_t i, const Bindings<T>& inputs) {
  const auto& n = g_.nodes()[i];
  auto in = [&](std::size_t k) -> const Tensor<T>& { return *values_[n.in[k].index]; };
  switch (n.kind) {
    case OpKind::kInput:
      values_[i] = &inputs.find(n.name)->second;
      return;
    case OpKind::kParameter:
      values_[i] = &n.param->value;
      return;
    case OpKind::kConstant:
      values_[i] = &n.constant;
      return;
    default:
      break;
  }
  Tensor<T>& out = owned_[i];
  out = Tensor<T>(shapes_[i]);
  values_[i] = &out;
  auto* o = out.values().data();
  switch (n.kind) {
    case OpKind::kMatMul: {
      const Tensor<T>& a = in(0);
      const Tensor<T>& b = in(1);
      const std::size_t m = a.shape()[0], k = a.shape()[1], cols = b.shape()[1];
      for (std::size_t r = 0; r < m; ++r) {
        T* orow = o + r * cols;
        for (std::size_t p = 0; p < k; ++p) {
          const T av = a[r * k + p];
          const T* brow = b.values().data() + p * cols;
          for (std::size_t c = 0; c < cols; ++c) orow[c] += av * brow[c];
        }
      }
      break;
    }
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul: {
      const Tensor<T>& a = in(0);
      const Tensor<T>& b = in(1);
      const bool row = broadcast_[i] == Broadcast::kRow;
      const std::size_t cols = a.cols();
      for (std::size_t e = 0; e < a.size(); ++e) {
        const T bv = row ? b[e % cols] : b[e];
        o[e] = n.kind == OpKind::kAdd ? a[e] + bv : n.kind == OpKind::kSub ? a[e] - bv : a[e] * bv;
      }
      break;
    }
    case OpKind::kScale: {
      const T f = static_cast<T>(n.scalar);
      const Tensor<T>& a = in(0);
      for (std::size_t e = 0; e < a.size(); ++e) o[e] = a[e] * f;
      break;
    }
    case OpKind::kLeakyRelu: {
      const T slope = static_cast<T>(n.scalar);
      const Tensor<T>& a = in(0);
      for (std::size_t e = 0; e < a.size(); ++e) o[e] = a[e] > T{0} ? a[e] : slope * a[e];
      break;
    }
    case OpKind::kTanh: {
      const Tensor<T>& a = in(0);
      for (std::size_t e = 0; e < a.size(); ++e) o[e] = std::tanh(a[e]);
      break;
    }
    case OpKind::kSoftplus: {
      const Tensor<T>& a = in(0);
      for (std::size_t e = 0; e < a.size(); ++e) o[e] = static_cast<T>(softplus_d(a[e]));
      break;
    }
    case OpKind::kSquare: {
      const Tensor<T>& a = in(0);
      for (std::size_t e = 0; e < a.size(); ++e) o[e] = a[e] * a[e];
      break;
    }
    case OpKind::kConcatLast: {
      const Tensor<T>& a = in(0);
      const Tensor<T>& b = in(1);
      const std::size_t ca = a.cols(), cb = b.cols();
      for (std::size_t r = 0; r < a.rows(); ++r) {
        std::copy_n(a.values().data() + r * ca, ca, o + r * (ca + cb));
        std::copy_n(b.values().data() + r * cb, cb, o + r * (ca + cb) + ca);
      }
      break;
    }
    case OpKind::kSliceLast: {
      const Tensor<T>& a = in(0);
      const std::size_t ca = a.cols(), w = n.end - n.begin;
      for (std::size_t r = 0; r < a.rows(); ++r) {
        std::copy_n(a.values().data() + r * ca + n.begin, w, o + r * w);
      }
      break;
    }
    case OpKind::kReshape:
      std::copy(in(0).values().begin(), in(0).values().end(), o);
      break;
    case OpKind::kReduceSum:
    case OpKind::kReduceMean: {
      const Tensor<T>& a = in(0);
      T acc{0};
      for (T v : a.values()) acc += v;
      o[0] = n.kind == OpKind::kReduceSum ? acc : acc / static_cast<T>(a.size());
      break;
    }
    case OpKind::kLogisticBinBits: {
      const Tensor<T>& v = in(0);
      const Tensor<T>& loc = in(1);
      const Tensor<T>& sc = in(2);
      const bool row = broadcast_[i] == Broadcast::kRow;
      const std::size_t cols = v.cols();
      for (std::size_t e = 0; e < v.size(); ++e) {
        const std::size_t pe = row ? e % cols : e;
        const double s = sc[pe];
        const double centered = static_cast<double>(v[e]) - static_cast<double>(loc[pe]);
        const double p = logistic_interval((centered - 0.5) / s, (centered + 0.5) / s);
        o[e] = static_cast<T>(-std::log2(std::max(p, kLikelihoodFloor)));
      }
      break;
    }
    case OpKind::kSoftmaxCrossEntropy: {
      const Tensor<T>& logits = in(0);
      const Tensor<T>& targets = in(1);
      const std::size_t cols = logits.cols();
      for (std::size_t r = 0; r < logits.rows(); ++r) {
        const T* l = logits.values().data() + r * cols;
        const T* t = targets.values().data() + r * cols;
        double mx = l[0];
        for (std::size_t c = 1; c < cols; ++c) mx = std::max<double>(mx, l[c]);
        double z = 0.0;
        for (std::size_t c = 0; c < cols; ++c) z += std::exp(l[c] - mx);
        const double log_z = mx + std::log(z);
        double loss = 0.0;
        for (std::size_t c = 0; c < cols; ++c) loss -= t[c] * (l[c] - log_z);
        o[r] = static_cast<T>(loss);
      }
      break;
    }
    default:
      break;
  }
}

template <typename T>
void accumulate(Tensor<T>& grad, const Shape& shape, auto&& fn) {
  if (grad.empty()) grad = Tensor<T>(shape);
  fn(grad.values().data());
}

template <typename T>
void Evaluator<T>::backward(NodeId out_id, std::vector<Tensor<T>>& grads) const {
  const auto& nodes = g_.nodes();
  grads.assign(nodes.size(), Tensor<T>{});
  grads[out_id.index] = Tensor<T>(shapes_[out_id.index], T{1});

  for (std::size_t idx = out_id.index + 1; idx-- > 0;) {
    if (grads[idx].empty()) continue;
    const auto& n = nodes[idx];
    const T* go = grads[idx].values().data();
    auto in = [&](std::size_t k) -> const Tensor<T>& { return *values_[n.in[k].index]; };
    auto gin = [&](std::size_t k, auto&& fn) {
      accumulate<T>(grads[n.in[k].index], shapes_[n.in[k].index], fn);
    };
    const Tensor<T>& self = *values_[idx];

    switch (n.kind) {
      case OpKind::kInput:
      case OpKind::kParameter:
      case OpKind::kConstant:
        break;
      case OpKind::kMatMul: {
        const Tensor<T>& a = in(0);
        const Tensor<T>& b = in(1);
        const std::size_t m = a.shape()[0], k = a.shape()[1], cols = b.shape()[1];
        gin(0, [&](T* ga) {
          for (std::size_t r = 0; r < m; ++r) {
            const T* grow = go + r * cols;
            for (std::size_t p = 0; p < k; ++p) {
              const T* brow = b.values().data() + p * cols;
              T acc{0};
              for (std::size_t c = 0; c < cols; ++c) acc += grow[c] * brow[c];
              ga[r * k + p] += acc;
            }
          }
        });
        gin(1, [&](T* gb) {
          for (std::size_t r = 0; r < m; ++r) {
            const T* grow = go + r * cols;
            for (std::size_t p = 0; p < k; ++p) {
              const T av = a[r * k + p];
              T* gbrow = gb + p * cols;
              for (std::size_t c = 0; c < cols; ++c) gbrow[c] += av * grow[c];
            }
          }
        });
        break;
      }
      case OpKind::kAdd:
      case OpKind::kSub:
      case OpKind::kMul: {
        const Tensor<T>& a = in(0);
        const Tensor<T>& b = in(1);
        const bool row = broadcast_[idx] == Broadcast::kRow;
        const std::size_t cols = a.cols();
        const std::size_t count = a.size();
        gin(0, [&](T* ga) {
          for (std::size_t e = 0; e < count; ++e) {
            ga[e] += n.kind == OpKind::kMul ? go[e] * (row ? b[e % cols] : b[e]) : go[e];
          }
        });
        gin(1, [&](T* gb) {
          for (std::size_t e = 0; e < count; ++e) {
            const T g = n.kind == OpKind::kAdd ? go[e] : n.kind == OpKind::kSub ? -go[e] : go[e] * a[e];
            gb[row ? e % cols : e] += g;
          }
        });
        break;
      }
      case OpKind::kScale: {
        const T f = static_cast<T>(n.scalar);
        gin(0, [&](T* ga) {
          for (std::size_t e = 0; e < self.size(); ++e) ga[e] += f * go[e];
        });
        break;
      }
      case OpKind::kLeakyRelu: {
        const T slope = static_cast<T>(n.scalar);
        const Tensor<T>& a = in(0);
        gin(0, [&](T* ga) {
          for (std::size_t e = 0; e < a.size(); ++e) ga[e] += a[e] > T{0} ? go[e] : slope * go[e];
        });
        break;
      }
      case OpKind::kTanh:
        gin(0, [&](T* ga) {
          for (std::size_t e = 0; e < self.size(); ++e) ga[e] += go[e] * (T{1} - self[e] * self[e]);
        });
        break;
      case OpKind::kSoftplus: {
        const Tensor<T>& a = in(0);
        gin(0, [&](T* ga) {
          for (std::size_t e = 0; e < a.size(); ++e) ga[e] += go[e] * static_cast<T>(sigmoid(a[e]));
        });
        break;
      }
      case OpKind::kSquare: {
        const Tensor<T>& a = in(0);
        gin(0, [&](T* ga) {
          for (std::size_t e = 0; e < a.size(); ++e) ga[e] += T{2} * a[e] * go[e];
        });
        break;
      }
      case OpKind::kConcatLast: {
        const std::size_t ca = in(0).cols(), cb = in(1).cols(), rows = in(0).rows();
        gin(0, [&](T* ga) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < ca; ++c) ga[r * ca + c] += go[r * (ca + cb) + c];
          }
        });
        gin(1, [&](T* gb) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cb; ++c) gb[r * cb + c] += go[r * (ca + cb) + ca + c];
          }
        });
        break;
      }
      case OpKind::kSliceLast: {
        const std::size_t ca = in(0).cols(), w = n.end - n.begin, rows = in(0).rows();
        gin(0, [&](T* ga) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < w; ++c) ga[r * ca + n.begin + c] += go[r * w + c];
          }
        });
        break;
      }
      case OpKind::kReshape:
        gin(0, [&](T* ga) {
          for (std::size_t e = 0; e < self.size(); ++e) ga[e] += go[e];
        });
        break;
      case OpKind::kReduceSum:
      case OpKind::kReduceMean: {
        const std::size_t count = in(0).size();
        const T g = n.kind == OpKind::kReduceSum ? go[0] : go[0] / static_cast<T>(count);
        gin(0, [&](T* ga) {
          for (std::size_t e = 0; e < count; ++e) ga[e] += g;
        });
        break;
      }
      case OpKind::kLogisticBinBits: {
        const Tensor<T>& v = in(0);
        const Tensor<T>& loc = in(1);
        const Tensor<T>& sc = in(2);
        const bool row = broadcast_[idx] == Broadcast::kRow;
        const std::size_t cols = v.cols();
        std::vector<double> dv(v.size()), dloc(v.size()), dscale(v.size());
        for (std::size_t e = 0; e < v.size(); ++e) {
          const std::size_t pe = row ? e % cols : e;
          const double s = sc[pe];
          const double centered = static_cast<double>(v[e]) - static_cast<double>(loc[pe]);
          const double hi = (centered + 0.5) / s;
          const double lo = (centered - 0.5) / s;
          const double p = logistic_interval(lo, hi);
          if (p <= kLikelihoodFloor) continue;
          const double sh = sigmoid(hi), sl = sigmoid(lo);
          const double dens_hi = sh * (1.0 - sh);
          const double dens_lo = sl * (1.0 - sl);
          const double dbits_dp = -1.0 / (p * std::numbers::ln2);
          const double g = static_cast<double>(go[e]) * dbits_dp;
          dv[e] = g * (dens_hi - dens_lo) / s;
          dloc[e] = -dv[e];
          dscale[e] = g * (-dens_hi * hi + dens_lo * lo) / s;
        }
        gin(0, [&](T* gv) {
          for (std::size_t e = 0; e < v.size(); ++e) gv[e] += static_cast<T>(dv[e]);
        });
        gin(1, [&](T* gl) {
          for (std::size_t e = 0; e < v.size(); ++e) gl[row ? e % cols : e] += static_cast<T>(dloc[e]);
        });
        gin(2, [&](T* gs) {
          for (std::size_t e = 0; e < v.size(); ++e) gs[row ? e % cols : e] += static_cast<T>(dscale[e]);
        });
        break;
      }
      case OpKind::kSoftmaxCrossEntropy: {
        const Tensor<T>& logits = in(0);
        const Tensor<T>& targets = in(1);
        const std::size_t cols = logits.cols();
        gin(0, [&](T* gl) {
          for (std::size_t r = 0; r < logits.rows(); ++r) {
            const T* l = logits.values().data() + r * cols;
            const T* t = targets.values().data() + r * cols;
            double mx = l[0];
            for (std::size_t c = 1; c < cols; ++c) mx = std::max<double>(mx, l[c]);
            double z = 0.0, tsum = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
              z += std::exp(l[c] - mx);
              tsum += t[c];
            }
            for (std::size_t c = 0; c < cols; ++c) {
              const double soft = std::exp(l[c] - mx) / z;
              gl[r * cols + c] += static_cast<T>(go[r] * (tsum * soft - t[c]));
            }
          }
        });
        break;
      }
    }
  }
}

template <typename T>
Bindings<T> collect_outputs(const Graph<T>& graph, const Evaluator<T>& ev) {
  Bindings<T> out;
  for (const auto& [name, id] : graph.outputs()) out.emplace(name, ev.value(id));
  return out;
}

}  // namespace

template <typename T>
Bindings<T> evaluate(const Graph<T>& graph, const Bindings<T>& inputs) {
  Evaluator<T> ev(graph);
  ev.run(inputs);
  return collect_outputs(graph, ev);
}

template <typename T>
GradientResult<T> gradient(const Graph<T>& graph, const Bindings<T>& inputs,
                           std::span<Parameter<T>* const> wrt, std::string_view output) {
  if (graph.outputs().empty()) throw Error("gradient: graph has no outputs");
  const NodeId out_id = output.empty() ? graph.outputs().front().second : [&] {
    auto id = graph.find_output(output);
    if (!id) throw Error("gradient: no output named '" + std::string(output) + "'");
    return *id;
  }();

  Evaluator<T> ev(graph);
  ev.run(inputs);
  if (shape_size(ev.shape(out_id)) != 1) {
    throw ShapeError("gradient: output " + graph.describe(out_id) + " is not scalar, shape " +
                     to_string(ev.shape(out_id)));
  }

  std::vector<Tensor<T>> grads;
  ev.backward(out_id, grads);

  GradientResult<T> result;
  result.outputs = collect_outputs(graph, ev);
  const auto& nodes = graph.nodes();
  for (const auto& [name, id] : graph.inputs()) {
    Tensor<T> g = grads[id.index];
    if (g.empty()) g = Tensor<T>(ev.shape(id));
    result.input_grads.emplace(name, std::move(g));
  }
  for (Parameter<T>* p : wrt) {
    p->zero_grad();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].kind == OpKind::kParameter && nodes[i].param == p && !grads[i].empty()) {
        p->grad = grads[i];
      }
    }
  }
  return result;
}

template class Graph<float>;
template class Graph<double>;
template Bindings<float> evaluate(const Graph<float>&, const Bindings<float>&);
template Bindings<double> evaluate(const Graph<double>&, const Bindings<double>&);
template GradientResult<float> gradient(const Graph<float>&, const Bindings<float>&,
                                        std::span<Parameter<float>* const>, std::string_view);
template GradientResult<double> gradient(const Graph<double>&, const Bindings<double>&,
                                         std::span<Parameter<double>* const>, std::string_view);

}  // namespace mmfc::ndgrad
