#pragma once

// Differentiable tensor operations. Each op computes its value through the
// kernel layer and, when a GradTape is active and some input requires a
// gradient, records the matching backward rule.

#include "braintune/tensor.hpp"

#include <span>
#include <vector>

namespace braintune {

/// Floor applied inside log(); keeps the contrastive loss finite when a
/// probability underflows.
inline constexpr double kLogFloor = 1e-12;

/// Standard matrix product a (m x k) * b (k x n).
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor transpose(const Tensor& a);

/// Elementwise ops over identically shaped tensors.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor mul_scalar(const Tensor& a, double c);

/// x (m x n) plus a length-n vector broadcast over rows (the bias pattern).
Tensor add_rowvec(const Tensor& x, const Tensor& v);

Tensor relu(const Tensor& a);
Tensor square(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor exp(const Tensor& a);
/// log(max(x, kLogFloor)).
Tensor log(const Tensor& a);

/// Scalar sum of all elements.
Tensor sum(const Tensor& a);

/// Column means of an m x n matrix, returned as 1 x n.
Tensor mean_rows(const Tensor& a);

/// Numerically guarded softmax applied to each row of a 2-d tensor.
Tensor softmax_rows(const Tensor& a);

/// Concatenate 2-d tensors with equal row counts along the column axis.
Tensor concat_lastdim(std::span<const Tensor> parts);

/// Same data, new shape (element count preserved).
Tensor reshape(const Tensor& a, std::vector<std::size_t> shape);

/// One element by flat index, as a scalar tensor.
Tensor select(const Tensor& a, std::size_t flat_index);

/// Length-n vector from n scalar tensors.
Tensor stack_scalars(std::span<const Tensor> xs);

/// Cosine similarity of two equally sized tensors viewed as flat vectors.
/// Throws DegenerateInputError on a zero-norm input.
Tensor cosine_similarity(const Tensor& a, const Tensor& b);

/// x / ||x||_2 over the whole tensor. Throws DegenerateInputError at zero.
Tensor l2_normalize(const Tensor& a);

/// Row-wise layer normalization with learned gain/shift (both length n).
Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& shift,
                       double eps = 1e-5);

} // namespace braintune
