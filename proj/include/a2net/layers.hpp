#pragma once

#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "a2net/graph.hpp"

namespace a2net {

// Owns a model's Parameters; addresses are stable for the store's lifetime.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  // Throws std::invalid_argument on a duplicate name.
  Parameter& add(std::string name, Tensor init);
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;
  Parameter& get(std::string_view name);

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t size() const { return params_.size(); }
  std::size_t num_values() const;
  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

using Rng = std::mt19937_64;

Tensor uniform_tensor(Shape shape, double bound, Rng& rng);
Tensor normal_tensor(Shape shape, double stddev, Rng& rng);

// y = x W^T + b with W (out, in); initialized U(-1/sqrt(in), 1/sqrt(in)).
struct Affine {
  Parameter* weight = nullptr;
  Parameter* bias = nullptr;

  static Affine create(ParameterStore& store, const std::string& name, std::size_t in,
                       std::size_t out, Rng& rng);
  Var operator()(Graph& g, Var x) const;
  std::size_t in_features() const { return weight->value.shape[1]; }
  std::size_t out_features() const { return weight->value.shape[0]; }
};

// affine -> tanh -> affine
struct Ffn {
  Affine hidden;
  Affine output;

  static Ffn create(ParameterStore& store, const std::string& name, std::size_t in,
                    std::size_t hidden_width, std::size_t out, Rng& rng);
  Var operator()(Graph& g, Var x) const;
};

}  // namespace a2net
