#include "wavegraph/tensor.hpp"

#include <string>

#include "wavegraph/error.hpp"

namespace wavegraph {
namespace {
thread_local bool g_grad_enabled = true;
}

std::span<double> detail::Node::grad_buffer() {
  if (grad.empty()) grad.assign(shape.size(), 0.0);
  return grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != shape.size()) {
    throw InvalidInput("tensor data length " + std::to_string(values.size()) +
                       " does not match shape " + std::to_string(shape.rows) + "x" +
                       std::to_string(shape.cols));
  }
  node_ = std::make_shared<detail::Node>();
  node_->shape = shape;
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return Tensor(shape, std::vector<double>(shape.size(), 0.0), requires_grad);
}

Tensor Tensor::filled(Shape shape, double value) {
  return Tensor(shape, std::vector<double>(shape.size(), value));
}

Tensor Tensor::row(std::vector<double> values) {
  const Shape s{1, values.size()};
  return Tensor(s, std::move(values));
}

Tensor Tensor::scalar(double value) { return Tensor({1, 1}, {value}); }

std::span<double> Tensor::mutable_values() {
  if (!node_->leaf) throw InvalidInput("only leaf tensors can be modified in place");
  return node_->value;
}

double Tensor::item() const {
  if (size() != 1) throw InvalidInput("item() needs a 1x1 tensor");
  return node_->value[0];
}

void Tensor::zero_grad() { node_->grad.clear(); }

Tensor Tensor::detach() const { return Tensor(shape(), node_->value); }

Tensor Tensor::from_node(std::shared_ptr<detail::Node> node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw InvalidInput("backward on an undefined tensor");
  if (loss.size() != 1) throw InvalidInput("backward needs a 1x1 loss");
  detail::Node* root = loss.node().get();
  if (root->consumed) throw InvalidInput("backward already ran on this tape");
  if (!root->requires_grad) throw InvalidInput("loss is detached from every parameter");

  // Iterative post-order DFS gives a topological order.
  std::vector<detail::Node*> order;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  // The consumed flag doubles as the DFS visit mark; leaves are unmarked at
  // the end so later tapes can reach them again.
  root->consumed = true;
  stack.emplace_back(root, 0);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && !parent->consumed) {
        parent->consumed = true;
        stack.emplace_back(parent, 0);
      }
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }

  root->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward_fn && !node->grad.empty()) node->backward_fn(*node);
  }
  for (detail::Node* node : order) {
    if (node->leaf) {
      node->consumed = false;
    } else {
      node->parents.clear();
      node->backward_fn = nullptr;
      if (node != root) node->grad.clear();
    }
  }
  root->consumed = !root->leaf;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_mode_enabled() { return g_grad_enabled; }

}  // namespace wavegraph
