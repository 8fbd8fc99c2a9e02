#include "a2net/pfn.hpp"

namespace a2net {

PfnCell PfnCell::create(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
                        std::size_t hidden, bool share_gate_params, Rng& rng) {
  PfnCell cell;
  cell.input_dim_ = input_dim;
  cell.hidden_ = hidden;
  const auto in = input_dim + hidden;
  cell.forget_emotion_ = Affine::create(store, prefix + "/forget_emotion_gate", in, hidden, rng);
  cell.forget_cause_ = Affine::create(store, prefix + "/forget_cause_gate", in, hidden, rng);
  if (share_gate_params) {
    cell.input_emotion_ = cell.forget_emotion_;
    cell.input_cause_ = cell.forget_cause_;
  } else {
    cell.input_emotion_ = Affine::create(store, prefix + "/input_emotion_gate", in, hidden, rng);
    cell.input_cause_ = Affine::create(store, prefix + "/input_cause_gate", in, hidden, rng);
  }
  cell.candidate_ = Affine::create(store, prefix + "/candidate", in, hidden, rng);
  cell.state_ = Affine::create(store, prefix + "/cell_state", 3 * hidden, hidden, rng);
  return cell;
}

TaskGates PfnCell::gates_from(Graph& g, Var xh, GateFamily family) const {
  const auto& emotion_map = family == GateFamily::kForget ? forget_emotion_ : input_emotion_;
  const auto& cause_map = family == GateFamily::kForget ? forget_cause_ : input_cause_;
  return TaskGates{ops::cummax(emotion_map(g, xh)), ops::one_minus(ops::cummax(cause_map(g, xh)))};
}

TaskGates PfnCell::compute_gates(Graph& g, Var x, Var h_prev, GateFamily family) const {
  return gates_from(g, ops::concat({x, h_prev}), family);
}

Partitions PfnCell::partition(Var gate_emotion, Var gate_cause) {
  Var shared = ops::mul(gate_emotion, gate_cause);
  return Partitions{ops::sub(gate_emotion, shared), ops::sub(gate_cause, shared), shared};
}

PfnStepOutput PfnCell::step(Graph& g, Var x, Var h_prev, Var c_prev) const {
  Var xh = ops::concat({x, h_prev});
  const auto forget = gates_from(g, xh, GateFamily::kForget);
  const auto input = gates_from(g, xh, GateFamily::kInput);
  const auto f = partition(forget.emotion, forget.cause);
  const auto o = partition(input.emotion, input.cause);
  Var candidate = ops::tanh(candidate_(g, xh));

  auto mix = [&](Var f_part, Var o_part) {
    return ops::add(ops::mul(f_part, c_prev), ops::mul(o_part, candidate));
  };
  Var p_shared = mix(f.shared, o.shared);
  Var p_emotion = mix(f.emotion, o.emotion);
  Var p_cause = mix(f.cause, o.cause);

  PfnStepOutput out;
  out.h_shared = ops::tanh(p_shared);
  out.h_emotion = ops::tanh(p_emotion);
  out.h_cause = ops::tanh(p_cause);
  out.c_next = state_(g, ops::concat({p_emotion, p_shared, p_cause}));
  out.h_next = ops::tanh(out.c_next);
  return out;
}

SequenceFeatures PfnCell::run_sequence(Graph& g, Var inputs) const {
  const std::size_t n = inputs.shape().at(0);
  if (n == 0) throw ShapeError("pfn: empty sequence");
  Var h = g.constant(Tensor::zeros({1, hidden_}));
  Var c = g.constant(Tensor::zeros({1, hidden_}));
  std::vector<Var> emotion, cause, shared;
  for (std::size_t i = 0; i < n; ++i) {
    const auto out = step(g, ops::gather_rows(inputs, {i}), h, c);
    emotion.push_back(out.h_emotion);
    cause.push_back(out.h_cause);
    shared.push_back(out.h_shared);
    h = out.h_next;
    c = out.c_next;
  }
  return SequenceFeatures{stack_rows(emotion), stack_rows(cause), stack_rows(shared)};
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no rows");
  const auto width = rows[0].value().cols();
  if (rows.size() == 1) return rows[0];
  return ops::reshape(ops::concat(rows), {rows.size(), width});
}

}  // namespace a2net
