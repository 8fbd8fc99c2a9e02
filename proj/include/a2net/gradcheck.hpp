#pragma once

#include <functional>
#include <string>
#include <vector>

#include "a2net/graph.hpp"

namespace a2net {

struct ParamCheck {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_index = 0;
  bool finite = true;
};

struct CheckReport {
  std::vector<ParamCheck> params;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  // Name of the first parameter with a non-finite analytic gradient, if any.
  std::string failure;
};

struct GradCheckOptions {
  double eps = 1e-5;
  double tol = 1e-4;
  // Relative error is |a - n| / max(|a|, |n|, denom_floor).
  double denom_floor = 1e-4;
  GraphOptions graph;  // training must be off for a deterministic loss
};

// Builds a scalar loss on a fresh Graph. Must be a deterministic function of
// the parameter values.
using LossBuilder = std::function<Var(Graph&)>;

// Compares the analytic gradient of `loss` w.r.t. each parameter against
// central finite differences.
CheckReport grad_check(const LossBuilder& loss, const std::vector<Parameter*>& params,
                       const GradCheckOptions& options = {});

}  // namespace a2net
