#pragma once

// Differentiable tensor operations. Every op validates shapes and throws
// InvalidInput on mismatch; results record the tape only when some input
// requires a gradient and grad mode is on.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "wavegraph/tensor.hpp"

namespace wavegraph {

using Index = std::vector<std::size_t>;

enum class Activation { identity, sigmoid, tanh, elu, softsign, exp };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
/// a + row, with row [1 x cols] broadcast down the rows of a.
Tensor add_row(const Tensor& a, const Tensor& row);
/// a * row elementwise, row broadcast as in add_row.
Tensor mul_row(const Tensor& a, const Tensor& row);
Tensor scale(const Tensor& a, double factor);
Tensor one_minus(const Tensor& a);

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor elu(const Tensor& a);
Tensor softsign(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor activate(const Tensor& a, Activation act);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);

/// out[i] = a[index[i]]
Tensor gather_rows(const Tensor& a, const Index& index);
/// out[index[i]] += a[i], out has `out_rows` rows.
Tensor scatter_add_rows(const Tensor& a, const Index& index, std::size_t out_rows);
/// Copy of base with rows index[i] replaced by replacement[i]. Indices must be distinct.
Tensor replace_rows(const Tensor& base, const Index& index, const Tensor& replacement);

/// Column-wise softmax within groups of rows: out[i][c] = exp(z[i][c]) /
/// sum over rows j with segment[j] == segment[i] of exp(z[j][c]).
/// Max-shifted, so it never overflows.
Tensor segment_softmax(const Tensor& z, const Index& segment, std::size_t segments);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// Binary cross entropy averaged over rows with mask != 0. p is clamped to
/// [1e-12, 1 - 1e-12]. target and mask carry no gradient.
Tensor bce_loss(const Tensor& p, const Tensor& target, const Tensor& mask);
/// Mean squared error over elements with mask != 0.
Tensor mse_loss(const Tensor& y, const Tensor& target, const Tensor& mask);

inline constexpr double kProbabilityClamp = 1e-12;

}  // namespace wavegraph
