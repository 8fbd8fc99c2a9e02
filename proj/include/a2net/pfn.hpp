#pragma once

// Partition filter recurrent cell.
//
// Each step splits the candidate and history information into an emotion
// partition, a cause partition and a shared interaction partition using two
// task gates built from cummax (cumsum of softmax) activations.

#include <string>

#include "a2net/layers.hpp"

namespace a2net {

enum class GateFamily { kForget, kInput };

struct TaskGates {
  Var emotion;  // cummax(linear_e([x; h]))        nondecreasing, ends at 1
  Var cause;    // 1 - cummax(linear_c([x; h]))    nonincreasing, ends at 0
};

struct Partitions {
  Var emotion;  // g_e - g_e*g_c
  Var cause;    // g_c - g_e*g_c
  Var shared;   // g_e*g_c
};

struct PfnStepOutput {
  Var h_emotion;
  Var h_cause;
  Var h_shared;
  Var h_next;
  Var c_next;
};

// Row i of each matrix is the step-i feature, shape (N, hidden).
struct SequenceFeatures {
  Var emotion;
  Var cause;
  Var shared;
};

class PfnCell {
 public:
  // With share_gate_params the input gates reuse the forget-gate maps.
  static PfnCell create(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
                        std::size_t hidden, bool share_gate_params, Rng& rng);

  std::size_t hidden() const { return hidden_; }
  std::size_t input_dim() const { return input_dim_; }

  TaskGates compute_gates(Graph& g, Var x, Var h_prev, GateFamily family) const;
  static Partitions partition(Var gate_emotion, Var gate_cause);

  // x is (1, input_dim); h_prev and c_prev are (1, hidden).
  PfnStepOutput step(Graph& g, Var x, Var h_prev, Var c_prev) const;
  // Left-to-right recurrence from zero state over the rows of X (N, input_dim).
  SequenceFeatures run_sequence(Graph& g, Var inputs) const;

 private:
  TaskGates gates_from(Graph& g, Var xh, GateFamily family) const;

  std::size_t input_dim_ = 0;
  std::size_t hidden_ = 0;
  Affine forget_emotion_;
  Affine forget_cause_;
  Affine input_emotion_;
  Affine input_cause_;
  Affine candidate_;
  Affine state_;
};

// Stacks a list of (1, width) rows into (N, width).
Var stack_rows(std::span<const Var> rows);

}  // namespace a2net
