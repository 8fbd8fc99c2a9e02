#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "a2net/pfn.hpp"

namespace a2net {

// Plain LSTM cell; the recurrent encoder behind the shared/parallel ablations.
class LstmCell {
 public:
  static LstmCell create(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
                         std::size_t hidden, Rng& rng);
  std::size_t hidden() const { return hidden_; }
  // (N, input_dim) -> (N, hidden)
  Var run_sequence(Graph& g, Var inputs) const;

 private:
  std::size_t hidden_ = 0;
  Affine input_gate_;
  Affine forget_gate_;
  Affine output_gate_;
  Affine candidate_;
};

enum class Encoding { kPfn, kShared, kParallel };

std::string_view to_string(Encoding e);
Encoding parse_encoding(std::string_view s);

// pfn:      the partition filter cell
// shared:   one LSTM feeds every head, H_e = H_c = H_s = H
// parallel: two independent LSTMs for emotion and cause, H_s = 0
class FeatureEncoder {
 public:
  static FeatureEncoder create(ParameterStore& store, Encoding encoding, std::size_t input_dim,
                               std::size_t hidden, bool share_gate_params, Rng& rng);

  Encoding encoding() const { return encoding_; }
  std::size_t hidden() const { return hidden_; }
  const PfnCell& pfn() const { return *pfn_; }

  SequenceFeatures run(Graph& g, Var inputs) const;

 private:
  Encoding encoding_ = Encoding::kPfn;
  std::size_t hidden_ = 0;
  std::optional<PfnCell> pfn_;
  std::optional<LstmCell> first_;
  std::optional<LstmCell> second_;
};

}  // namespace a2net
