#include "a2net/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace a2net {

CheckReport grad_check(const LossBuilder& loss, const std::vector<Parameter*>& params,
                       const GradCheckOptions& options) {
  if (options.graph.training) throw GraphError("grad_check: graph must be in eval mode");
  CheckReport report;
  report.tolerance = options.tol;

  for (auto* p : params) p->zero_grad();
  {
    Graph g(options.graph);
    g.backward(loss(g));
  }

  auto evaluate = [&] {
    Graph g(options.graph);
    return loss(g).item();
  };

  bool ok = true;
  for (auto* p : params) {
    ParamCheck pc;
    pc.name = p->name;
    if (!p->grad.all_finite()) {
      pc.finite = false;
      ok = false;
      if (report.failure.empty()) report.failure = p->name;
      report.params.push_back(pc);
      continue;
    }
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + options.eps;
      const double up = evaluate();
      p->value[i] = saved - options.eps;
      const double down = evaluate();
      p->value[i] = saved;

      const double numeric = (up - down) / (2.0 * options.eps);
      const double analytic = p->grad[i];
      const double abs_err = std::abs(analytic - numeric);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), options.denom_floor});
      const double rel = abs_err / denom;
      if (!std::isfinite(numeric)) pc.finite = false;
      if (rel > pc.max_rel_error || !std::isfinite(rel)) {
        pc.max_rel_error = std::isfinite(rel) ? rel : INFINITY;
        pc.worst_index = i;
      }
      pc.max_abs_error = std::max(pc.max_abs_error, abs_err);
    }
    report.max_rel_error = std::max(report.max_rel_error, pc.max_rel_error);
    if (!pc.finite || pc.max_rel_error > options.tol) ok = false;
    report.params.push_back(std::move(pc));
  }
  report.passed = ok;
  return report;
}

}  // namespace a2net
