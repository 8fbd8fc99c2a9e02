#pragma once

// Define-by-run reverse-mode differentiation.
//
// A Graph is an append-only tape of primitive applications. Nodes are
// created in topological order, so backward() is a single reverse sweep.
// One Graph is built per document and consumed by backward().

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "a2net/tensor.hpp"

namespace a2net {

enum class Primitive {
  kLeaf,
  kLinear,      // x (..., in), W (out, in), optional b (out) -> (..., out)
  kSigmoid,
  kTanh,
  kSoftmax,     // over the last axis
  kCumsum,      // over the last axis
  kAdd,
  kSub,
  kMul,
  kScale,       // attrs.scalar * x
  kAddScalar,   // x + attrs.scalar
  kConcat,      // along the last axis
  kSqrt,        // sqrt(max(x, 0)); zero gradient below GraphOptions::clamp_floor
  kLog,         // clamped below by GraphOptions::clamp_floor
  kSum,         // all elements -> rank-0
  kDropout,     // inverted dropout, attrs.scalar = keep probability
  kMatmul,      // (m, k) x (k, n)
  kTranspose,   // rank 2
  kGatherRows,  // rows attrs.indices of a rank>=1 tensor
  kReshape,     // attrs.shape, same element count
  kCummax,      // cumsum(softmax(x)) over the last axis, scaled so the last entry is exactly 1
};

std::string_view primitive_name(Primitive kind);

using NodeId = std::uint32_t;

class Graph;

// Handle to a tensor recorded on a Graph.
struct Var {
  Graph* graph = nullptr;
  NodeId id = 0;

  bool valid() const { return graph != nullptr; }
  // The reference is invalidated by the next node recorded on the graph.
  const Tensor& value() const;
  const Shape& shape() const { return value().shape; }
  // Convenience for rank-0 / single-element results.
  double item() const;
};

struct OpAttrs {
  double scalar = 0.0;
  std::vector<std::size_t> indices;
  Shape shape;
};

struct GraphOptions {
  bool training = false;
  std::uint64_t seed = 0;
  // log inputs are clamped to >= clamp_floor and sqrt inputs to >= 0; the
  // gradient of both is zero below the floor. With no floor, inputs outside
  // the domain raise DomainError.
  std::optional<double> clamp_floor = 1e-12;
  // Fault injection for validating the gradient checker: the backward rule of
  // this primitive is scaled by 1.05.
  std::optional<Primitive> corrupt_backward;
};

// Per-parameter gradient accumulators kept outside the Parameters, used by
// data-parallel workers before a serialized reduction.
class GradientBuffer {
 public:
  Tensor& slot(const Parameter& p);
  const Tensor* find(const Parameter& p) const;
  void clear() { slots_.clear(); }
  std::size_t size() const { return slots_.size(); }

 private:
  std::unordered_map<const Parameter*, Tensor> slots_;
};

class Graph {
 public:
  explicit Graph(GraphOptions options = {});

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  const GraphOptions& options() const { return options_; }
  bool training() const { return options_.training; }

  // Starts a new forward pass; all previously issued Vars become invalid.
  void reset();
  void reset(GraphOptions options);

  Var constant(Tensor value);
  // One leaf per Parameter per pass; repeated calls return the same node.
  Var param(Parameter& p);

  Var apply(Primitive kind, std::span<const Var> inputs, const OpAttrs& attrs = {});

  // Accumulates d(loss)/d(param) into every Parameter reached from `loss`
  // (or into `into` when given) and consumes the graph.
  void backward(Var loss, GradientBuffer* into = nullptr);

  bool consumed() const { return consumed_; }
  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(NodeId id) const { return nodes_.at(id).value; }

 private:
  struct Node {
    Primitive kind = Primitive::kLeaf;
    std::vector<NodeId> inputs;
    Tensor value;
    Tensor saved;  // dropout mask
    OpAttrs attrs;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  Tensor forward(Primitive kind, std::span<const Var> inputs, const OpAttrs& attrs,
                 Tensor& saved);
  void backward_node(const Node& node, const Tensor& grad, std::vector<Tensor>& grads);
  Tensor& grad_slot(std::vector<Tensor>& grads, NodeId id);
  const Tensor& input_value(const Node& node, std::size_t k) const {
    return nodes_[node.inputs[k]].value;
  }

  GraphOptions options_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, NodeId> param_nodes_;
  std::mt19937_64 rng_;
  bool consumed_ = false;
};

// Typed wrappers over Graph::apply.
namespace ops {

Var linear(Var x, Var weight, Var bias);
Var linear(Var x, Var weight);
Var sigmoid(Var x);
Var tanh(Var x);
Var softmax(Var x);
Var cumsum(Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
Var add_scalar(Var x, double offset);
Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);
Var sqrt(Var x);
Var log(Var x);
Var sum(Var x);
Var dropout(Var x, double keep_prob);
Var matmul(Var a, Var b);
Var transpose(Var x);
Var gather_rows(Var x, std::vector<std::size_t> rows);
Var reshape(Var x, Shape shape);

// cumsum(softmax(x)) over the last axis.
Var cummax(Var x);
// 1 - x
Var one_minus(Var x);
// Same value with no gradient flowing back.
Var detach(Var x);

}  // namespace ops

}  // namespace a2net
