#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "a2net/graph.hpp"

namespace a2net::test {

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.values) v = u(rng);
  return t;
}

struct FdResult {
  double max_rel = 0.0;
  bool finite = true;
};

// Central differences against Graph::backward, with the same graph options on
// every evaluation so a seeded dropout mask is reused.
inline FdResult finite_difference(const std::function<Var(Graph&)>& build, const std::vector<Parameter*>& params,
                                  GraphOptions options = {}, double eps = 1e-6) {
  for (auto* p : params) p->zero_grad();
  {
    Graph g(options);
    g.backward(build(g));
  }
  auto eval = [&] {
    Graph g(options);
    return build(g).item();
  };
  FdResult r;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double keep = p->value[i];
      p->value[i] = keep + eps;
      const double up = eval();
      p->value[i] = keep - eps;
      const double down = eval();
      p->value[i] = keep;
      const double numeric = (up - down) / (2 * eps);
      const double analytic = p->grad[i];
      if (!std::isfinite(numeric) || !std::isfinite(analytic)) r.finite = false;
      const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      r.max_rel = std::max(r.max_rel, std::abs(numeric - analytic) / denom);
    }
  }
  return r;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("a2net_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace a2net::test
