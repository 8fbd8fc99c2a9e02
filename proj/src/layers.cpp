#include "a2net/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace a2net {

Parameter& ParameterStore::add(std::string name, Tensor init) {
  if (find(name) != nullptr) throw std::invalid_argument("duplicate parameter name " + name);
  params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(init)));
  return *params_.back();
}

Parameter* ParameterStore::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter* ParameterStore::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

Parameter& ParameterStore::get(std::string_view name) {
  auto* p = find(name);
  if (p == nullptr) throw std::out_of_range("no parameter named " + std::string(name));
  return *p;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::size_t ParameterStore::num_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& v : t.values) v = u(rng);
  return t;
}

Tensor normal_tensor(Shape shape, double stddev, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  std::normal_distribution<double> n(0.0, stddev);
  for (double& v : t.values) v = n(rng);
  return t;
}

Affine Affine::create(ParameterStore& store, const std::string& name, std::size_t in,
                      std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Affine a;
  a.weight = &store.add(name + "/weight", uniform_tensor({out, in}, bound, rng));
  a.bias = &store.add(name + "/bias", uniform_tensor({out}, bound, rng));
  return a;
}

Var Affine::operator()(Graph& g, Var x) const {
  return ops::linear(x, g.param(*weight), g.param(*bias));
}

Ffn Ffn::create(ParameterStore& store, const std::string& name, std::size_t in,
                std::size_t hidden_width, std::size_t out, Rng& rng) {
  return Ffn{Affine::create(store, name + "/hidden", in, hidden_width, rng),
             Affine::create(store, name + "/output", hidden_width, out, rng)};
}

Var Ffn::operator()(Graph& g, Var x) const { return output(g, ops::tanh(hidden(g, x))); }

}  // namespace a2net
