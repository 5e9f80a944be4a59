#pragma once

#include <cstdint>
#include <vector>

#include "wavegraph/layers.hpp"

namespace wavegraph {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias-corrected moments. Parameters without a gradient are
/// treated as having a zero gradient.
class Adam {
 public:
  Adam(ParameterList params, AdamConfig config = {});

  /// Apply one update from the current gradients, then clear them. Throws
  /// NumericError naming the first non-finite gradient entry; nothing is
  /// modified in that case.
  void step();
  void zero_grad();

  std::uint64_t steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  const ParameterList& parameters() const { return params_; }

  // Moment buffers, exposed for checkpointing.
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  void restore(std::uint64_t steps, std::vector<std::vector<double>> m,
               std::vector<std::vector<double>> v);

 private:
  ParameterList params_;
  AdamConfig config_;
  std::uint64_t steps_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace wavegraph
