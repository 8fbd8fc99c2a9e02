#include "a2net/recurrent.hpp"

#include <stdexcept>

namespace a2net {

LstmCell LstmCell::create(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
                          std::size_t hidden, Rng& rng) {
  LstmCell cell;
  cell.hidden_ = hidden;
  const auto in = input_dim + hidden;
  cell.input_gate_ = Affine::create(store, prefix + "/input_gate", in, hidden, rng);
  cell.forget_gate_ = Affine::create(store, prefix + "/forget_gate", in, hidden, rng);
  cell.output_gate_ = Affine::create(store, prefix + "/output_gate", in, hidden, rng);
  cell.candidate_ = Affine::create(store, prefix + "/candidate", in, hidden, rng);
  return cell;
}

Var LstmCell::run_sequence(Graph& g, Var inputs) const {
  const std::size_t n = inputs.shape().at(0);
  if (n == 0) throw ShapeError("lstm: empty sequence");
  Var h = g.constant(Tensor::zeros({1, hidden_}));
  Var c = g.constant(Tensor::zeros({1, hidden_}));
  std::vector<Var> outputs;
  for (std::size_t i = 0; i < n; ++i) {
    Var xh = ops::concat({ops::gather_rows(inputs, {i}), h});
    Var in_gate = ops::sigmoid(input_gate_(g, xh));
    Var forget = ops::sigmoid(forget_gate_(g, xh));
    Var out_gate = ops::sigmoid(output_gate_(g, xh));
    Var candidate = ops::tanh(candidate_(g, xh));
    c = ops::add(ops::mul(forget, c), ops::mul(in_gate, candidate));
    h = ops::mul(out_gate, ops::tanh(c));
    outputs.push_back(h);
  }
  return stack_rows(outputs);
}

std::string_view to_string(Encoding e) {
  switch (e) {
    case Encoding::kPfn: return "pfn";
    case Encoding::kShared: return "shared";
    case Encoding::kParallel: return "parallel";
  }
  return "pfn";
}

Encoding parse_encoding(std::string_view s) {
  if (s == "pfn") return Encoding::kPfn;
  if (s == "shared") return Encoding::kShared;
  if (s == "parallel") return Encoding::kParallel;
  throw std::invalid_argument("unknown encoding '" + std::string(s) + "'");
}

FeatureEncoder FeatureEncoder::create(ParameterStore& store, Encoding encoding, std::size_t input_dim,
                                      std::size_t hidden, bool share_gate_params, Rng& rng) {
  FeatureEncoder enc;
  enc.encoding_ = encoding;
  enc.hidden_ = hidden;
  switch (encoding) {
    case Encoding::kPfn:
      enc.pfn_ = PfnCell::create(store, "pfn", input_dim, hidden, share_gate_params, rng);
      break;
    case Encoding::kShared:
      enc.first_ = LstmCell::create(store, "shared_lstm", input_dim, hidden, rng);
      break;
    case Encoding::kParallel:
      enc.first_ = LstmCell::create(store, "emotion_lstm", input_dim, hidden, rng);
      enc.second_ = LstmCell::create(store, "cause_lstm", input_dim, hidden, rng);
      break;
  }
  return enc;
}

SequenceFeatures FeatureEncoder::run(Graph& g, Var inputs) const {
  switch (encoding_) {
    case Encoding::kPfn:
      return pfn_->run_sequence(g, inputs);
    case Encoding::kShared: {
      Var h = first_->run_sequence(g, inputs);
      return SequenceFeatures{h, h, h};
    }
    case Encoding::kParallel: {
      Var emotion = first_->run_sequence(g, inputs);
      Var cause = second_->run_sequence(g, inputs);
      Var zeros = g.constant(Tensor::zeros(emotion.shape()));
      return SequenceFeatures{emotion, cause, zeros};
    }
  }
  throw std::logic_error("unhandled encoding");
}

}  // namespace a2net
