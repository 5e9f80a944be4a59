#include "wavegraph/layers.hpp"

#include <cmath>

#include "wavegraph/error.hpp"

namespace wavegraph {

std::size_t parameter_count(const ParameterList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.size();
  return n;
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(1, fan_in + fan_out)));
  std::vector<double> w(fan_in * fan_out);
  for (auto& v : w) v = rng.uniform(-bound, bound);
  return Tensor({fan_in, fan_out}, std::move(w), true);
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation act, Rng& rng)
    : weight_(glorot_uniform(in, out, rng)), bias_(Tensor::zeros({1, out}, true)), act_(act) {}

DenseLayer::DenseLayer(Tensor weight, Tensor bias, Activation act)
    : weight_(std::move(weight)), bias_(std::move(bias)), act_(act) {
  if (bias_.rows() != 1 || bias_.cols() != weight_.cols()) {
    throw InvalidInput("dense layer bias must be [1 x out]");
  }
}

Tensor DenseLayer::affine(const Tensor& x) const {
  if (x.cols() != in()) {
    throw InvalidInput("dense layer expects " + std::to_string(in()) + " input columns, got " +
                       std::to_string(x.cols()));
  }
  return add_row(matmul(x, weight_), bias_);
}

Tensor DenseLayer::forward(const Tensor& x) const { return activate(affine(x), act_); }

void DenseLayer::collect(const std::string& prefix, ParameterList& out) const {
  out.push_back({prefix + ".weight", weight_});
  out.push_back({prefix + ".bias", bias_});
}

}  // namespace wavegraph
