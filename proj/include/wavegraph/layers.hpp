#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wavegraph/ops.hpp"
#include "wavegraph/rng.hpp"
#include "wavegraph/tensor.hpp"

namespace wavegraph {

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

using ParameterList = std::vector<NamedParameter>;

std::size_t parameter_count(const ParameterList& params);

/// Uniform Glorot initialization, bound sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// act(x W + b) with W [in x out] and b [1 x out].
///
/// Copies share parameter storage (Tensor is a handle).
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Activation act, Rng& rng);
  DenseLayer(Tensor weight, Tensor bias, Activation act);

  Tensor forward(const Tensor& x) const;
  /// Pre-activation x W + b.
  Tensor affine(const Tensor& x) const;

  std::size_t in() const { return weight_.rows(); }
  std::size_t out() const { return weight_.cols(); }
  Activation activation() const { return act_; }
  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }
  std::size_t parameter_count() const { return weight_.size() + bias_.size(); }

  void collect(const std::string& prefix, ParameterList& out) const;

 private:
  Tensor weight_;
  Tensor bias_;
  Activation act_ = Activation::identity;
};

}  // namespace wavegraph
