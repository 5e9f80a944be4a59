#pragma once

// Dense 2-D tensors with tape-based reverse-mode differentiation.
//
// A Tensor is a shared handle to a node of the computation graph. Ops build
// new nodes that remember their parents and a backward closure; backward()
// walks the graph once in reverse topological order. Leaves created with
// requires_grad accumulate gradients across calls until zero_grad().

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace wavegraph {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  constexpr std::size_t size() const { return rows * cols; }
  friend constexpr bool operator==(Shape, Shape) = default;
};

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something flows into it
  bool requires_grad = false;
  bool leaf = true;
  bool consumed = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  std::span<double> grad_buffer();
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value);
  static Tensor row(std::vector<double> values);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  Shape shape() const { return node_->shape; }
  std::size_t rows() const { return node_->shape.rows; }
  std::size_t cols() const { return node_->shape.cols; }
  std::size_t size() const { return node_->shape.size(); }

  std::span<const double> values() const { return node_->value; }
  /// Writable storage; only leaves may be modified in place.
  std::span<double> mutable_values();
  double at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  /// Empty span when no gradient has reached this tensor.
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad_buffer(); }
  void zero_grad();

  /// Copy of the values with no tape history.
  Tensor detach() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  static Tensor from_node(std::shared_ptr<detail::Node> node);

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Populate gradients of every requires_grad leaf reachable from a 1x1 loss.
///
/// The tape is released afterwards; calling backward() a second time on the
/// same loss throws InvalidInput, as does a loss with no differentiable
/// ancestry.
void backward(const Tensor& loss);

/// While alive on the current thread, ops record no tape.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

}  // namespace wavegraph
