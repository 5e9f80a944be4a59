#include "wavegraph/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace wavegraph {

GradCheckReport grad_check(const std::function<Tensor()>& loss, const ParameterList& params,
                           const GradCheckOptions& options) {
  for (auto p : params) p.tensor.zero_grad();
  backward(loss());

  GradCheckReport report;
  for (auto p : params) {
    const std::vector<double> analytic(p.tensor.grad().begin(), p.tensor.grad().end());
    ParameterGradError entry{p.name};
    auto w = p.tensor.mutable_values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      double up, down;
      {
        NoGradGuard guard;
        w[i] = saved + options.step;
        up = loss().item();
        w[i] = saved - options.step;
        down = loss().item();
      }
      w[i] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic.empty() ? 0.0 : analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      const double rel = std::abs(a - numeric) / denom;
      if (rel >= entry.max_rel_error) {
        entry.max_rel_error = rel;
        entry.worst_index = i;
        entry.analytic = a;
        entry.numeric = numeric;
      }
    }
    p.tensor.zero_grad();
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

}  // namespace wavegraph
