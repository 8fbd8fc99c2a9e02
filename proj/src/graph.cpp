#include "a2net/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "a2net/kernels.hpp"

namespace a2net {
namespace {

std::string describe(Primitive kind, std::span<const Var> inputs) {
  std::string s = std::string(primitive_name(kind)) + " on shapes";
  for (const auto& v : inputs) s += " " + shape_to_string(v.shape());
  return s;
}

[[noreturn]] void shape_fail(Primitive kind, std::span<const Var> inputs,
                             const std::string& why) {
  throw ShapeError(describe(kind, inputs) + ": " + why);
}

void require_arity(Primitive kind, std::span<const Var> inputs, std::size_t lo,
                   std::size_t hi) {
  if (inputs.size() < lo || inputs.size() > hi) {
    shape_fail(kind, inputs, "wrong number of inputs (" + std::to_string(inputs.size()) + ")");
  }
}

void require_same_shape(Primitive kind, std::span<const Var> inputs) {
  for (std::size_t k = 1; k < inputs.size(); ++k) {
    if (inputs[k].shape() != inputs[0].shape()) shape_fail(kind, inputs, "shapes differ");
  }
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view primitive_name(Primitive kind) {
  switch (kind) {
    case Primitive::kLeaf: return "leaf";
    case Primitive::kLinear: return "linear";
    case Primitive::kSigmoid: return "sigmoid";
    case Primitive::kTanh: return "tanh";
    case Primitive::kSoftmax: return "softmax";
    case Primitive::kCumsum: return "cumsum";
    case Primitive::kAdd: return "add";
    case Primitive::kSub: return "sub";
    case Primitive::kMul: return "mul";
    case Primitive::kScale: return "scale";
    case Primitive::kAddScalar: return "add_scalar";
    case Primitive::kConcat: return "concat";
    case Primitive::kSqrt: return "sqrt";
    case Primitive::kLog: return "log";
    case Primitive::kSum: return "sum";
    case Primitive::kDropout: return "dropout";
    case Primitive::kMatmul: return "matmul";
    case Primitive::kTranspose: return "transpose";
    case Primitive::kGatherRows: return "gather_rows";
    case Primitive::kReshape: return "reshape";
    case Primitive::kCummax: return "cummax";
  }
  return "unknown";
}

const Tensor& Var::value() const { return graph->value(id); }

double Var::item() const {
  const auto& v = value();
  if (v.size() != 1) throw ShapeError("item() on tensor of shape " + shape_to_string(v.shape));
  return v[0];
}

Tensor& GradientBuffer::slot(const Parameter& p) {
  auto it = slots_.find(&p);
  if (it == slots_.end()) it = slots_.emplace(&p, Tensor::zeros(p.value.shape)).first;
  return it->second;
}

const Tensor* GradientBuffer::find(const Parameter& p) const {
  auto it = slots_.find(&p);
  return it == slots_.end() ? nullptr : &it->second;
}

Graph::Graph(GraphOptions options) : options_(std::move(options)), rng_(options_.seed) {}

void Graph::reset() {
  nodes_.clear();
  param_nodes_.clear();
  rng_.seed(options_.seed);
  consumed_ = false;
}

void Graph::reset(GraphOptions options) {
  options_ = std::move(options);
  reset();
}

Var Graph::constant(Tensor value) {
  if (consumed_) throw GraphError("graph consumed by backward(); call reset() first");
  if (value.values.size() != shape_numel(value.shape)) {
    throw ShapeError("constant: shape " + shape_to_string(value.shape) + " needs " +
                     std::to_string(shape_numel(value.shape)) + " values, got " + std::to_string(value.values.size()));
  }
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<NodeId>(nodes_.size() - 1)};
}

Var Graph::param(Parameter& p) {
  if (consumed_) throw GraphError("graph consumed by backward(); call reset() first");
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{this, it->second};
  Node n;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  const auto id = static_cast<NodeId>(nodes_.size() - 1);
  param_nodes_.emplace(&p, id);
  return Var{this, id};
}

Var Graph::apply(Primitive kind, std::span<const Var> inputs, const OpAttrs& attrs) {
  if (consumed_) throw GraphError("graph consumed by backward(); call reset() first");
  if (kind == Primitive::kLeaf) throw GraphError("apply: leaf is not an operation");
  for (const auto& v : inputs) {
    if (v.graph != this) throw GraphError(std::string(primitive_name(kind)) + ": input from another graph");
  }
  Node n;
  n.kind = kind;
  n.value = forward(kind, inputs, attrs, n.saved);
  n.attrs = attrs;
  n.inputs.reserve(inputs.size());
  for (const auto& v : inputs) {
    n.inputs.push_back(v.id);
    n.requires_grad = n.requires_grad || nodes_[v.id].requires_grad;
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<NodeId>(nodes_.size() - 1)};
}

Tensor Graph::forward(Primitive kind, std::span<const Var> in, const OpAttrs& attrs,
                      Tensor& saved) {
  switch (kind) {
    case Primitive::kLinear: {
      require_arity(kind, in, 2, 3);
      const auto& x = in[0].value();
      const auto& w = in[1].value();
      if (x.rank() < 1 || w.rank() != 2 || x.cols() != w.shape[1]) {
        shape_fail(kind, in, "expected x (..., in) and W (out, in)");
      }
      std::span<const double> b;
      if (in.size() == 3) {
        const auto& bt = in[2].value();
        if (bt.rank() != 1 || bt.shape[0] != w.shape[0]) shape_fail(kind, in, "bias must be (out)");
        b = bt.values;
      }
      Shape out_shape = x.shape;
      out_shape.back() = w.shape[0];
      Tensor y = Tensor::zeros(out_shape);
      kernels::affine_forward(x.values, w.values, b, y.values,
                              {x.rows(), w.shape[1], w.shape[0]});
      return y;
    }
    case Primitive::kSigmoid:
    case Primitive::kTanh: {
      require_arity(kind, in, 1, 1);
      Tensor y = in[0].value();
      for (double& v : y.values) v = kind == Primitive::kSigmoid ? sigmoid_scalar(v) : std::tanh(v);
      return y;
    }
    case Primitive::kSoftmax: {
      require_arity(kind, in, 1, 1);
      Tensor y = in[0].value();
      if (y.rank() == 0) shape_fail(kind, in, "needs rank >= 1");
      const auto c = y.cols();
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double* row = y.values.data() + r * c;
        const double m = *std::max_element(row, row + c);
        double z = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
          row[k] = std::exp(row[k] - m);
          z += row[k];
        }
        for (std::size_t k = 0; k < c; ++k) row[k] /= z;
      }
      return y;
    }
    case Primitive::kCummax: {
      require_arity(kind, in, 1, 1);
      if (in[0].value().rank() == 0) shape_fail(kind, in, "needs rank >= 1");
      std::array<Var, 1> arg{in[0]};
      Tensor unused;
      saved = forward(Primitive::kSoftmax, arg, attrs, unused);
      Tensor y = saved;
      const auto c = y.cols();
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double* row = y.values.data() + r * c;
        for (std::size_t k = 1; k < c; ++k) row[k] += row[k - 1];
        // Rounding can push the running sum past 1; dividing by the total keeps
        // every entry in [0, 1] with an exact 1 at the end.
        const double total = row[c - 1];
        for (std::size_t k = 0; k < c; ++k) row[k] /= total;
      }
      return y;
    }
    case Primitive::kCumsum: {
      require_arity(kind, in, 1, 1);
      Tensor y = in[0].value();
      if (y.rank() == 0) shape_fail(kind, in, "needs rank >= 1");
      const auto c = y.cols();
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double* row = y.values.data() + r * c;
        for (std::size_t k = 1; k < c; ++k) row[k] += row[k - 1];
      }
      return y;
    }
    case Primitive::kAdd:
    case Primitive::kSub:
    case Primitive::kMul: {
      require_arity(kind, in, 2, 2);
      require_same_shape(kind, in);
      Tensor y = in[0].value();
      const auto& b = in[1].value().values;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (kind == Primitive::kAdd) y[i] += b[i];
        else if (kind == Primitive::kSub) y[i] -= b[i];
        else y[i] *= b[i];
      }
      return y;
    }
    case Primitive::kScale:
    case Primitive::kAddScalar: {
      require_arity(kind, in, 1, 1);
      Tensor y = in[0].value();
      for (double& v : y.values) v = kind == Primitive::kScale ? v * attrs.scalar : v + attrs.scalar;
      return y;
    }
    case Primitive::kConcat: {
      require_arity(kind, in, 1, SIZE_MAX);
      const auto& first = in[0].value();
      if (first.rank() == 0) shape_fail(kind, in, "needs rank >= 1");
      std::size_t total = 0;
      for (const auto& v : in) {
        const auto& t = v.value();
        if (t.rank() != first.rank() ||
            !std::equal(t.shape.begin(), t.shape.end() - 1, first.shape.begin())) {
          shape_fail(kind, in, "leading dimensions differ");
        }
        total += t.cols();
      }
      Shape out_shape = first.shape;
      out_shape.back() = total;
      Tensor y = Tensor::zeros(out_shape);
      const auto rows = first.rows();
      std::size_t offset = 0;
      for (const auto& v : in) {
        const auto& t = v.value();
        const auto c = t.cols();
        for (std::size_t r = 0; r < rows; ++r) {
          std::copy_n(t.values.data() + r * c, c, y.values.data() + r * total + offset);
        }
        offset += c;
      }
      return y;
    }
    case Primitive::kSqrt:
    case Primitive::kLog: {
      require_arity(kind, in, 1, 1);
      Tensor y = in[0].value();
      const bool is_sqrt = kind == Primitive::kSqrt;
      for (double& v : y.values) {
        if (options_.clamp_floor) {
          // sqrt only needs the floor for its gradient; its value at 0 stays exact.
          v = is_sqrt ? std::max(v, 0.0) : std::max(v, *options_.clamp_floor);
        } else if (is_sqrt ? v < 0.0 : v <= 0.0) {
          throw DomainError(std::string(primitive_name(kind)) + ": input " + std::to_string(v) +
                            " outside the domain with clamping disabled");
        }
        v = is_sqrt ? std::sqrt(v) : std::log(v);
      }
      return y;
    }
    case Primitive::kSum: {
      require_arity(kind, in, 1, 1);
      double s = 0.0;
      for (double v : in[0].value().values) s += v;
      return Tensor::scalar(s);
    }
    case Primitive::kDropout: {
      require_arity(kind, in, 1, 1);
      const double keep = attrs.scalar;
      if (!(keep > 0.0 && keep <= 1.0)) {
        throw DomainError("dropout: keep probability must be in (0, 1], got " + std::to_string(keep));
      }
      Tensor y = in[0].value();
      if (!options_.training || keep == 1.0) {
        saved = Tensor::filled(y.shape, 1.0);
        return y;
      }
      saved = Tensor::zeros(y.shape);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::size_t i = 0; i < y.size(); ++i) {
        saved[i] = u(rng_) < keep ? 1.0 / keep : 0.0;
        y[i] *= saved[i];
      }
      return y;
    }
    case Primitive::kMatmul: {
      require_arity(kind, in, 2, 2);
      const auto& a = in[0].value();
      const auto& b = in[1].value();
      if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[0]) {
        shape_fail(kind, in, "expected (m, k) x (k, n)");
      }
      Tensor y = Tensor::zeros({a.shape[0], b.shape[1]});
      kernels::matmul(a.values, b.values, y.values, {a.shape[0], a.shape[1], b.shape[1]});
      return y;
    }
    case Primitive::kTranspose: {
      require_arity(kind, in, 1, 1);
      const auto& a = in[0].value();
      if (a.rank() != 2) shape_fail(kind, in, "expected rank 2");
      Tensor y = Tensor::zeros({a.shape[1], a.shape[0]});
      for (std::size_t i = 0; i < a.shape[0]; ++i) {
        for (std::size_t j = 0; j < a.shape[1]; ++j) y.at(j, i) = a.at(i, j);
      }
      return y;
    }
    case Primitive::kGatherRows: {
      require_arity(kind, in, 1, 1);
      const auto& a = in[0].value();
      if (a.rank() == 0) shape_fail(kind, in, "needs rank >= 1");
      const std::size_t n = a.shape[0];
      const std::size_t stride = a.size() / std::max<std::size_t>(n, 1);
      Shape out_shape = a.shape;
      out_shape[0] = attrs.indices.size();
      Tensor y = Tensor::zeros(out_shape);
      for (std::size_t r = 0; r < attrs.indices.size(); ++r) {
        const auto src = attrs.indices[r];
        if (src >= n) shape_fail(kind, in, "row index " + std::to_string(src) + " out of range");
        std::copy_n(a.values.data() + src * stride, stride, y.values.data() + r * stride);
      }
      return y;
    }
    case Primitive::kReshape: {
      require_arity(kind, in, 1, 1);
      if (shape_numel(attrs.shape) != in[0].value().size()) {
        shape_fail(kind, in, "cannot reshape to " + shape_to_string(attrs.shape));
      }
      return Tensor(attrs.shape, in[0].value().values);
    }
    case Primitive::kLeaf:
      break;
  }
  throw GraphError("forward: unhandled primitive");
}

Tensor& Graph::grad_slot(std::vector<Tensor>& grads, NodeId id) {
  auto& g = grads[id];
  if (g.values.empty()) g = Tensor::zeros(nodes_[id].value.shape);
  return g;
}

void Graph::backward(Var loss, GradientBuffer* into) {
  if (consumed_) throw GraphError("backward: graph already consumed; run a new forward pass");
  if (loss.graph != this) throw GraphError("backward: loss belongs to another graph");
  if (loss.value().size() != 1) {
    throw GraphError("backward: loss must be scalar, got shape " + shape_to_string(loss.shape()));
  }
  consumed_ = true;

  std::vector<Tensor> grads(nodes_.size());
  grads[loss.id] = Tensor::filled(loss.value().shape, 1.0);

  for (std::size_t k = loss.id + 1; k-- > 0;) {
    const auto& node = nodes_[k];
    if (!node.requires_grad || grads[k].values.empty()) continue;
    if (node.kind == Primitive::kLeaf) {
      if (node.param == nullptr) continue;
      Tensor& target = into ? into->slot(*node.param) : node.param->grad;
      for (std::size_t i = 0; i < target.size(); ++i) target[i] += grads[k][i];
      continue;
    }
    backward_node(node, grads[k], grads);
    if (options_.corrupt_backward == node.kind) {
      for (auto id : node.inputs) {
        if (!grads[id].values.empty()) {
          for (double& g : grads[id].values) g *= 1.05;
        }
      }
    }
    grads[k] = Tensor{};
  }
}

void Graph::backward_node(const Node& node, const Tensor& g, std::vector<Tensor>& grads) {
  auto wants = [&](std::size_t k) { return nodes_[node.inputs[k]].requires_grad; };
  const Tensor& y = node.value;

  switch (node.kind) {
    case Primitive::kLinear: {
      const auto& x = input_value(node, 0);
      const auto& w = input_value(node, 1);
      const kernels::MatDims d{x.rows(), w.shape[1], w.shape[0]};
      if (wants(0)) kernels::affine_backward_input(g.values, w.values, grad_slot(grads, node.inputs[0]).values, d);
      const bool want_w = wants(1);
      const bool want_b = node.inputs.size() == 3 && wants(2);
      if (want_w || want_b) {
        Tensor scratch_w;
        std::span<double> dw;
        if (want_w) {
          dw = grad_slot(grads, node.inputs[1]).values;
        } else {
          scratch_w = Tensor::zeros(w.shape);
          dw = scratch_w.values;
        }
        std::span<double> db;
        if (want_b) db = grad_slot(grads, node.inputs[2]).values;
        kernels::affine_backward_params(g.values, x.values, dw, db, d);
      }
      return;
    }
    case Primitive::kSigmoid: {
      auto& dx = grad_slot(grads, node.inputs[0]);
      for (std::size_t i = 0; i < y.size(); ++i) dx[i] += g[i] * y[i] * (1.0 - y[i]);
      return;
    }
    case Primitive::kTanh: {
      auto& dx = grad_slot(grads, node.inputs[0]);
      for (std::size_t i = 0; i < y.size(); ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
      return;
    }
    case Primitive::kSoftmax: {
      auto& dx = grad_slot(grads, node.inputs[0]);
      const auto c = y.cols();
      for (std::size_t r = 0; r < y.rows(); ++r) {
        const double* yr = y.values.data() + r * c;
        const double* gr = g.values.data() + r * c;
        double dot = 0.0;
        for (std::size_t k = 0; k < c; ++k) dot += gr[k] * yr[k];
        for (std::size_t k = 0; k < c; ++k) dx[r * c + k] += yr[k] * (gr[k] - dot);
      }
      return;
    }
    case Primitive::kCummax: {
      auto& dx = grad_slot(grads, node.inputs[0]);
      const Tensor& p = node.saved;
      const auto c = p.cols();
      std::vector<double> gp(c);
      for (std::size_t r = 0; r < p.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t k = c; k-- > 0;) {
          acc += g[r * c + k];
          gp[k] = acc;
        }
        double dot = 0.0;
        for (std::size_t k = 0; k < c; ++k) dot += gp[k] * p[r * c + k];
        for (std::size_t k = 0; k < c; ++k) dx[r * c + k] += p[r * c + k] * (gp[k] - dot);
      }
      return;
    }
    case Primitive::kCumsum: {
      auto& dx = grad_slot(grads, node.inputs[0]);
      const auto c = y.cols();
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t k = c; k-- > 0;) {
          acc += g[r * c + k];
          dx[r * c + k] += acc;
        }
      }
      return;
    }
    case Primitive::kAdd:
    case Primitive::kSub: {
      const double sign = node.kind == Primitive::kAdd ? 1.0 : -1.0;
      if (wants(0)) {
        auto& da = grad_slot(grads, node.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
      }
      if (wants(1)) {
        auto& db = grad_slot(grads, node.inputs[1]);
        for (std::size_t i = 0; i < g.size(); ++i) db[i] += sign * g[i];
      }
      return;
    }
    case Primitive::kMul: {
      const auto& a = input_value(node, 0);
      const auto& b = input_value(node, 1);
      if (wants(0)) {
        auto& da = grad_slot(grads, node.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * b[i];
      }
      if (wants(1)) {
        auto& db = grad_slot(grads, node.inputs[1]);
        for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * a[i];
      }
      return;
    }
    case Primitive::kScale: {
      auto& dx = grad_slot(grads, node.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * node.attrs.scalar;
      return;
    }
    case Primitive::kAddScalar: {
      auto& dx = grad_slot(grads, node.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
      return;
    }
    case Primitive::kConcat: {
      const auto total = y.cols();
      const auto rows = y.rows();
      std::size_t offset = 0;
      for (std::size_t k = 0; k < node.inputs.size(); ++k) {
        const auto c = input_value(node, k).cols();
        if (wants(k)) {
          auto& dx = grad_slot(grads, node.inputs[k]);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < c; ++j) dx[r * c + j] += g[r * total + offset + j];
          }
        }
        offset += c;
      }
      return;
    }
    case Primitive::kSqrt:
    case Primitive::kLog: {
      const auto& x = input_value(node, 0);
      auto& dx = grad_slot(grads, node.inputs[0]);
      const double floor = options_.clamp_floor.value_or(0.0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (options_.clamp_floor && x[i] < floor) continue;
        dx[i] += node.kind == Primitive::kSqrt ? g[i] * 0.5 / y[i] : g[i] / x[i];
      }
      return;
    }
    case Primitive::kSum: {
      auto& dx = grad_slot(grads, node.inputs[0]);
      for (double& v : dx.values) v += g[0];
      return;
    }
    case Primitive::kDropout: {
      auto& dx = grad_slot(grads, node.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * node.saved[i];
      return;
    }
    case Primitive::kMatmul: {
      const auto& a = input_value(node, 0);
      const auto& b = input_value(node, 1);
      std::span<double> da, db;
      if (wants(0)) da = grad_slot(grads, node.inputs[0]).values;
      if (wants(1)) db = grad_slot(grads, node.inputs[1]).values;
      kernels::matmul_backward(g.values, a.values, b.values, da, db,
                               {a.shape[0], a.shape[1], b.shape[1]});
      return;
    }
    case Primitive::kTranspose: {
      auto& dx = grad_slot(grads, node.inputs[0]);
      const auto& a = input_value(node, 0);
      for (std::size_t i = 0; i < a.shape[0]; ++i) {
        for (std::size_t j = 0; j < a.shape[1]; ++j) dx.at(i, j) += g.at(j, i);
      }
      return;
    }
    case Primitive::kGatherRows: {
      auto& dx = grad_slot(grads, node.inputs[0]);
      const auto& a = input_value(node, 0);
      const std::size_t stride = a.size() / std::max<std::size_t>(a.shape[0], 1);
      const auto& idx = node.attrs.indices;
      for (std::size_t r = 0; r < idx.size(); ++r) {
        for (std::size_t j = 0; j < stride; ++j) dx[idx[r] * stride + j] += g[r * stride + j];
      }
      return;
    }
    case Primitive::kReshape: {
      auto& dx = grad_slot(grads, node.inputs[0]);
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
      return;
    }
    case Primitive::kLeaf:
      return;
  }
}

namespace ops {
namespace {

Var unary(Primitive kind, Var x, OpAttrs attrs = {}) {
  const Var in[] = {x};
  return x.graph->apply(kind, in, attrs);
}

Var binary(Primitive kind, Var a, Var b) {
  const Var in[] = {a, b};
  return a.graph->apply(kind, in);
}

}  // namespace

Var linear(Var x, Var weight, Var bias) {
  const Var in[] = {x, weight, bias};
  return x.graph->apply(Primitive::kLinear, in);
}

Var linear(Var x, Var weight) { return binary(Primitive::kLinear, x, weight); }
Var sigmoid(Var x) { return unary(Primitive::kSigmoid, x); }
Var tanh(Var x) { return unary(Primitive::kTanh, x); }
Var softmax(Var x) { return unary(Primitive::kSoftmax, x); }
Var cumsum(Var x) { return unary(Primitive::kCumsum, x); }
Var add(Var a, Var b) { return binary(Primitive::kAdd, a, b); }
Var sub(Var a, Var b) { return binary(Primitive::kSub, a, b); }
Var mul(Var a, Var b) { return binary(Primitive::kMul, a, b); }

Var scale(Var x, double factor) {
  OpAttrs a;
  a.scalar = factor;
  return unary(Primitive::kScale, x, a);
}

Var add_scalar(Var x, double offset) {
  OpAttrs a;
  a.scalar = offset;
  return unary(Primitive::kAddScalar, x, a);
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  return parts[0].graph->apply(Primitive::kConcat, parts);
}

Var concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var sqrt(Var x) { return unary(Primitive::kSqrt, x); }
Var log(Var x) { return unary(Primitive::kLog, x); }
Var sum(Var x) { return unary(Primitive::kSum, x); }

Var dropout(Var x, double keep_prob) {
  OpAttrs a;
  a.scalar = keep_prob;
  return unary(Primitive::kDropout, x, a);
}

Var matmul(Var a, Var b) { return binary(Primitive::kMatmul, a, b); }
Var transpose(Var x) { return unary(Primitive::kTranspose, x); }

Var gather_rows(Var x, std::vector<std::size_t> rows) {
  OpAttrs a;
  a.indices = std::move(rows);
  return unary(Primitive::kGatherRows, x, a);
}

Var reshape(Var x, Shape shape) {
  OpAttrs a;
  a.shape = std::move(shape);
  return unary(Primitive::kReshape, x, a);
}

Var cummax(Var x) { return unary(Primitive::kCummax, x); }
Var one_minus(Var x) { return add_scalar(scale(x, -1.0), 1.0); }
Var detach(Var x) { return x.graph->constant(x.value()); }

}  // namespace ops
}  // namespace a2net
