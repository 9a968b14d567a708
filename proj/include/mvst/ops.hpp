#pragma once

#include "mvst/tensor.hpp"

#include <cstdint>
#include <vector>

namespace mvst {

// Differentiable primitives. Matrices are rank-2 row-major tensors; "rows"
// always means the leading extent of a rank-2 tensor.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise (Hadamard) product.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

/// x[..., p] + b[p], broadcast over every leading extent.
Tensor add_bias(const Tensor& x, const Tensor& b);
/// x·w + b for x of shape [n] or [r x n], w [n x p], b [p].
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

Tensor softmax(const Tensor& x, std::size_t axis);
/// Max-subtracted log-sum-exp form; never overflows for large logits.
Tensor log_softmax(const Tensor& x, std::size_t axis);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
/// Half-open range [begin, end) along axis.
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
Tensor reshape(const Tensor& x, Shape shape);

inline constexpr double layer_norm_epsilon = 1e-5;

/// Normalizes over the trailing extent, then applies gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);

/// Inverted dropout. The keep mask is drawn from a generator seeded with
/// `seed`; survivors are scaled by 1/(1-rate). Identity when not training.
Tensor dropout(const Tensor& x, double rate, std::uint64_t seed, bool training);

/// Scalar sum of all entries (shape []).
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// Mean over consecutive groups of `group` rows: [g*n x c] -> [n x c].
Tensor group_mean_rows(const Tensor& x, std::size_t group);
/// x[r x c] with row i multiplied by s[i] (s has shape [r x 1] or [r]).
Tensor scale_rows(const Tensor& x, const Tensor& s);
/// Repeats a [1 x c] (or [c]) tensor into [rows x c].
Tensor broadcast_rows(const Tensor& x, std::size_t rows);

} // namespace mvst
