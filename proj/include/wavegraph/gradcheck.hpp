#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wavegraph/layers.hpp"

namespace wavegraph {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Denominator floor for the relative error, so that gradients that are
  /// zero up to rounding compare on an absolute scale.
  double floor = 1e-6;
};

struct ParameterGradError {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  std::vector<ParameterGradError> entries;
  double max_rel_error = 0.0;
  bool passed = true;
};

/// Compare backward() against central differences for every element of
/// every parameter. `loss` must rebuild the forward computation from the
/// current parameter values on each call and be deterministic.
GradCheckReport grad_check(const std::function<Tensor()>& loss, const ParameterList& params,
                           const GradCheckOptions& options = {});

}  // namespace wavegraph
