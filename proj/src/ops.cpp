#include "wavegraph/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "wavegraph/error.hpp"
#include "wavegraph/kernels.hpp"

namespace wavegraph {
namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

std::string shape_str(Shape s) { return std::to_string(s.rows) + "x" + std::to_string(s.cols); }

[[noreturn]] void mismatch(std::string_view op, Shape a, Shape b) {
  throw InvalidInput(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

void require_defined(const Tensor& t, std::string_view op) {
  if (!t.defined()) throw InvalidInput(std::string(op) + ": undefined tensor");
}

/// Wraps a freshly computed value as a tape node. The backward closure is
/// dropped when nothing upstream needs a gradient.
Tensor record(Shape shape, std::vector<double> value, std::initializer_list<Tensor> inputs,
              std::function<void(Node&)> fn) {
  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->value = std::move(value);
  node->leaf = false;
  bool needs = false;
  if (grad_mode_enabled()) {
    for (const auto& t : inputs) needs = needs || t.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    for (const auto& t : inputs) node->parents.push_back(t.node());
    node->backward_fn = std::move(fn);
  }
  return Tensor::from_node(std::move(node));
}

Tensor record_many(Shape shape, std::vector<double> value, std::span<const Tensor> inputs,
                   std::function<void(Node&)> fn) {
  auto node = std::make_shared<Node>();
  node->shape = shape;
  node->value = std::move(value);
  node->leaf = false;
  bool needs = false;
  if (grad_mode_enabled()) {
    for (const auto& t : inputs) needs = needs || t.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    for (const auto& t : inputs) node->parents.push_back(t.node());
    node->backward_fn = std::move(fn);
  }
  return Tensor::from_node(std::move(node));
}

/// Gradient slot of parent i, or empty when it needs none.
std::span<double> pgrad(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  if (!p.requires_grad) return {};
  return p.grad_buffer();
}

const std::vector<double>& pval(Node& self, std::size_t i) { return self.parents[i]->value; }

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, Fwd fwd, Deriv deriv) {
  require_defined(a, "activation");
  std::vector<double> out(a.size());
  const auto in = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(in[i]);
  return record(a.shape(), std::move(out), {a}, [deriv](Node& self) {
    auto g = pgrad(self, 0);
    const auto& x = pval(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * deriv(x[i], self.value[i]);
  });
}

void check_index(const Index& index, std::size_t bound, std::string_view op) {
  for (auto i : index) {
    if (i >= bound) {
      throw InvalidInput(std::string(op) + ": row index " + std::to_string(i) +
                         " out of range " + std::to_string(bound));
    }
  }
}

}  // namespace

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::elu: return "elu";
    case Activation::softsign: return "softsign";
    case Activation::exp: return "exp";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  for (auto a : {Activation::identity, Activation::sigmoid, Activation::tanh, Activation::elu,
                 Activation::softsign, Activation::exp}) {
    if (activation_name(a) == name) return a;
  }
  throw InvalidInput("unknown activation '" + std::string(name) + "'");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.cols() != b.rows()) mismatch("matmul", a.shape(), b.shape());
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  kernels::active().gemm(m, k, n, a.values().data(), b.values().data(), out.data(), false);
  return record({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const auto& kt = kernels::active();
    if (auto ga = pgrad(self, 0); !ga.empty()) {
      kt.gemm_nt(m, k, n, self.grad.data(), pval(self, 1).data(), ga.data());
    }
    if (auto gb = pgrad(self, 1); !gb.empty()) {
      kt.gemm_tn(m, k, n, pval(self, 0).data(), self.grad.data(), gb.data());
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("add", a.shape(), b.shape());
  std::vector<double> out(a.values().begin(), a.values().end());
  kernels::active().axpy(out.size(), 1.0, b.values().data(), out.data());
  return record(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& kt = kernels::active();
    for (std::size_t i = 0; i < 2; ++i) {
      if (auto g = pgrad(self, i); !g.empty()) kt.axpy(g.size(), 1.0, self.grad.data(), g.data());
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("sub", a.shape(), b.shape());
  std::vector<double> out(a.values().begin(), a.values().end());
  kernels::active().axpy(out.size(), -1.0, b.values().data(), out.data());
  return record(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& kt = kernels::active();
    if (auto g = pgrad(self, 0); !g.empty()) kt.axpy(g.size(), 1.0, self.grad.data(), g.data());
    if (auto g = pgrad(self, 1); !g.empty()) kt.axpy(g.size(), -1.0, self.grad.data(), g.data());
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("mul", a.shape(), b.shape());
  std::vector<double> out(a.size());
  kernels::active().mul(out.size(), a.values().data(), b.values().data(), out.data());
  return record(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& kt = kernels::active();
    if (auto g = pgrad(self, 0); !g.empty()) {
      kt.mul_acc(g.size(), self.grad.data(), pval(self, 1).data(), g.data());
    }
    if (auto g = pgrad(self, 1); !g.empty()) {
      kt.mul_acc(g.size(), self.grad.data(), pval(self, 0).data(), g.data());
    }
  });
}

Tensor div(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("div", a.shape(), b.shape());
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] / b.values()[i];
  return record(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& bv = pval(self, 1);
    if (auto g = pgrad(self, 0); !g.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] / bv[i];
    }
    if (auto g = pgrad(self, 1); !g.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i] * self.value[i] / bv[i];
    }
  });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) mismatch("add_row", a.shape(), row.shape());
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < r; ++i) kt.axpy(c, 1.0, row.values().data(), out.data() + i * c);
  return record(a.shape(), std::move(out), {a, row}, [r, c](Node& self) {
    const auto& kt = kernels::active();
    if (auto g = pgrad(self, 0); !g.empty()) kt.axpy(g.size(), 1.0, self.grad.data(), g.data());
    if (auto g = pgrad(self, 1); !g.empty()) {
      for (std::size_t i = 0; i < r; ++i) kt.axpy(c, 1.0, self.grad.data() + i * c, g.data());
    }
  });
}

Tensor mul_row(const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) mismatch("mul_row", a.shape(), row.shape());
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.size());
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < r; ++i) {
    kt.mul(c, a.values().data() + i * c, row.values().data(), out.data() + i * c);
  }
  return record(a.shape(), std::move(out), {a, row}, [r, c](Node& self) {
    const auto& kt = kernels::active();
    const auto& av = pval(self, 0);
    const auto& rv = pval(self, 1);
    if (auto g = pgrad(self, 0); !g.empty()) {
      for (std::size_t i = 0; i < r; ++i) {
        kt.mul_acc(c, self.grad.data() + i * c, rv.data(), g.data() + i * c);
      }
    }
    if (auto g = pgrad(self, 1); !g.empty()) {
      for (std::size_t i = 0; i < r; ++i) {
        kt.mul_acc(c, self.grad.data() + i * c, av.data() + i * c, g.data());
      }
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Tensor one_minus(const Tensor& a) {
  return unary(
      a, [](double x) { return 1.0 - x; }, [](double, double) { return -1.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor elu(const Tensor& a) {
  return unary(
      a, [](double x) { return x > 0 ? x : std::expm1(x); },
      [](double x, double y) { return x > 0 ? 1.0 : y + 1.0; });
}

Tensor softsign(const Tensor& a) {
  return unary(
      a, [](double x) { return x / (1.0 + std::abs(x)); },
      [](double x, double) {
        const double d = 1.0 + std::abs(x);
        return 1.0 / (d * d);
      });
}

Tensor exp(const Tensor& a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor activate(const Tensor& a, Activation act) {
  switch (act) {
    case Activation::identity: return a;
    case Activation::sigmoid: return sigmoid(a);
    case Activation::tanh: return tanh(a);
    case Activation::elu: return elu(a);
    case Activation::softsign: return softsign(a);
    case Activation::exp: return exp(a);
  }
  return a;
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw InvalidInput("concat_cols: no inputs");
  const std::size_t r = parts[0].rows();
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_defined(p, "concat_cols");
    if (p.rows() != r) mismatch("concat_cols", parts[0].shape(), p.shape());
    offsets.push_back(total);
    total += p.cols();
  }
  std::vector<double> out(r * total);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t c = parts[k].cols();
    const double* src = parts[k].values().data();
    for (std::size_t i = 0; i < r; ++i) {
      std::copy_n(src + i * c, c, out.data() + i * total + offsets[k]);
    }
  }
  return record_many({r, total}, std::move(out), parts, [r, total, offsets](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      auto g = pgrad(self, k);
      if (g.empty()) continue;
      const std::size_t c = self.parents[k]->shape.cols;
      for (std::size_t i = 0; i < r; ++i) {
        const double* src = self.grad.data() + i * total + offsets[k];
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += src[j];
      }
    }
  });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw InvalidInput("concat_rows: no inputs");
  const std::size_t c = parts[0].cols();
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_defined(p, "concat_rows");
    if (p.cols() != c) mismatch("concat_rows", parts[0].shape(), p.shape());
    total += p.rows();
  }
  std::vector<double> out;
  out.reserve(total * c);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return record_many({total, c}, std::move(out), parts, [](Node& self) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      const std::size_t n = self.parents[k]->shape.size();
      if (auto g = pgrad(self, k); !g.empty()) {
        kernels::active().axpy(n, 1.0, self.grad.data() + offset, g.data());
      }
      offset += n;
    }
  });
}

Tensor gather_rows(const Tensor& a, const Index& index) {
  require_defined(a, "gather_rows");
  check_index(index, a.rows(), "gather_rows");
  const std::size_t c = a.cols();
  std::vector<double> out(index.size() * c);
  for (std::size_t i = 0; i < index.size(); ++i) {
    std::copy_n(a.values().data() + index[i] * c, c, out.data() + i * c);
  }
  auto idx = std::make_shared<const Index>(index);
  return record({index.size(), c}, std::move(out), {a}, [idx, c](Node& self) {
    auto g = pgrad(self, 0);
    const auto& kt = kernels::active();
    for (std::size_t i = 0; i < idx->size(); ++i) {
      kt.axpy(c, 1.0, self.grad.data() + i * c, g.data() + (*idx)[i] * c);
    }
  });
}

Tensor scatter_add_rows(const Tensor& a, const Index& index, std::size_t out_rows) {
  require_defined(a, "scatter_add_rows");
  if (index.size() != a.rows()) {
    throw InvalidInput("scatter_add_rows: index length does not match rows");
  }
  check_index(index, out_rows, "scatter_add_rows");
  const std::size_t c = a.cols();
  std::vector<double> out(out_rows * c, 0.0);
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < index.size(); ++i) {
    kt.axpy(c, 1.0, a.values().data() + i * c, out.data() + index[i] * c);
  }
  auto idx = std::make_shared<const Index>(index);
  return record({out_rows, c}, std::move(out), {a}, [idx, c](Node& self) {
    auto g = pgrad(self, 0);
    const auto& kt = kernels::active();
    for (std::size_t i = 0; i < idx->size(); ++i) {
      kt.axpy(c, 1.0, self.grad.data() + (*idx)[i] * c, g.data() + i * c);
    }
  });
}

Tensor replace_rows(const Tensor& base, const Index& index, const Tensor& replacement) {
  require_defined(base, "replace_rows");
  require_defined(replacement, "replace_rows");
  if (replacement.cols() != base.cols() || replacement.rows() != index.size()) {
    mismatch("replace_rows", base.shape(), replacement.shape());
  }
  check_index(index, base.rows(), "replace_rows");
  const std::size_t c = base.cols();
  std::vector<double> out(base.values().begin(), base.values().end());
  std::vector<char> replaced(base.rows(), 0);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (replaced[index[i]]) throw InvalidInput("replace_rows: duplicate row index");
    replaced[index[i]] = 1;
    std::copy_n(replacement.values().data() + i * c, c, out.data() + index[i] * c);
  }
  auto idx = std::make_shared<const Index>(index);
  auto mask = std::make_shared<const std::vector<char>>(std::move(replaced));
  return record(base.shape(), std::move(out), {base, replacement}, [idx, mask, c](Node& self) {
    const auto& kt = kernels::active();
    if (auto g = pgrad(self, 0); !g.empty()) {
      for (std::size_t r = 0; r < mask->size(); ++r) {
        if (!(*mask)[r]) kt.axpy(c, 1.0, self.grad.data() + r * c, g.data() + r * c);
      }
    }
    if (auto g = pgrad(self, 1); !g.empty()) {
      for (std::size_t i = 0; i < idx->size(); ++i) {
        kt.axpy(c, 1.0, self.grad.data() + (*idx)[i] * c, g.data() + i * c);
      }
    }
  });
}

Tensor segment_softmax(const Tensor& z, const Index& segment, std::size_t segments) {
  require_defined(z, "segment_softmax");
  if (segment.size() != z.rows()) throw InvalidInput("segment_softmax: segment length mismatch");
  check_index(segment, segments, "segment_softmax");
  const std::size_t c = z.cols();
  const auto zv = z.values();
  std::vector<double> peak(segments * c, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < segment.size(); ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      auto& m = peak[segment[i] * c + j];
      m = std::max(m, zv[i * c + j]);
    }
  }
  std::vector<double> out(z.size());
  std::vector<double> total(segments * c, 0.0);
  for (std::size_t i = 0; i < segment.size(); ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double e = std::exp(zv[i * c + j] - peak[segment[i] * c + j]);
      out[i * c + j] = e;
      total[segment[i] * c + j] += e;
    }
  }
  for (std::size_t i = 0; i < segment.size(); ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= total[segment[i] * c + j];
  }
  auto seg = std::make_shared<const Index>(segment);
  return record(z.shape(), std::move(out), {z}, [seg, segments, c](Node& self) {
    // dz_i = a_i * (g_i - sum_{j in seg(i)} g_j a_j), column by column.
    std::vector<double> inner(segments * c, 0.0);
    for (std::size_t i = 0; i < seg->size(); ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        inner[(*seg)[i] * c + j] += self.grad[i * c + j] * self.value[i * c + j];
      }
    }
    auto g = pgrad(self, 0);
    for (std::size_t i = 0; i < seg->size(); ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        const std::size_t k = i * c + j;
        g[k] += self.value[k] * (self.grad[k] - inner[(*seg)[i] * c + j]);
      }
    }
  });
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  double s = 0.0;
  for (double v : a.values()) s += v;
  return record({1, 1}, {s}, {a}, [](Node& self) {
    auto g = pgrad(self, 0);
    for (auto& x : g) x += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw InvalidInput("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor bce_loss(const Tensor& p, const Tensor& target, const Tensor& mask) {
  if (p.shape() != target.shape()) mismatch("bce_loss", p.shape(), target.shape());
  if (p.shape() != mask.shape()) mismatch("bce_loss", p.shape(), mask.shape());
  const auto pv = p.values(), tv = target.values(), mv = mask.values();
  double count = 0.0;
  double total = 0.0;
  constexpr double eps = kProbabilityClamp;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (mv[i] == 0.0) continue;
    const double q = std::clamp(pv[i], eps, 1.0 - eps);
    total -= tv[i] * std::log(q) + (1.0 - tv[i]) * std::log(1.0 - q);
    count += 1.0;
  }
  if (count == 0.0) throw InvalidInput("bce_loss: mask selects no elements");
  auto t = std::make_shared<const std::vector<double>>(tv.begin(), tv.end());
  auto m = std::make_shared<const std::vector<double>>(mv.begin(), mv.end());
  return record({1, 1}, {total / count}, {p}, [t, m, count](Node& self) {
    auto g = pgrad(self, 0);
    const auto& pv = pval(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if ((*m)[i] == 0.0) continue;
      const double q = pv[i];
      // Zero gradient where the clamp is active.
      if (q < eps || q > 1.0 - eps) continue;
      g[i] += self.grad[0] * (-(*t)[i] / q + (1.0 - (*t)[i]) / (1.0 - q)) / count;
    }
  });
}

Tensor mse_loss(const Tensor& y, const Tensor& target, const Tensor& mask) {
  if (y.shape() != target.shape()) mismatch("mse_loss", y.shape(), target.shape());
  if (y.shape() != mask.shape()) mismatch("mse_loss", y.shape(), mask.shape());
  const auto yv = y.values(), tv = target.values(), mv = mask.values();
  double count = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < yv.size(); ++i) {
    if (mv[i] == 0.0) continue;
    const double d = yv[i] - tv[i];
    total += d * d;
    count += 1.0;
  }
  if (count == 0.0) throw InvalidInput("mse_loss: mask selects no elements");
  auto t = std::make_shared<const std::vector<double>>(tv.begin(), tv.end());
  auto m = std::make_shared<const std::vector<double>>(mv.begin(), mv.end());
  return record({1, 1}, {total / count}, {y}, [t, m, count](Node& self) {
    auto g = pgrad(self, 0);
    const auto& yv = pval(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if ((*m)[i] == 0.0) continue;
      g[i] += self.grad[0] * 2.0 * (yv[i] - (*t)[i]) / count;
    }
  });
}

}  // namespace wavegraph
