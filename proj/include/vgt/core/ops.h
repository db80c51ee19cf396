#pragma once

#include <cstddef>
#include <vector>

#include "vgt/core/tensor.h"

// Differentiable operations. Every op records a backward closure on the
// active tape when at least one input requires grad.
//
// Layout conventions: matrices are [rows, cols]; feature maps are [C, H, W];
// images and grids handed to patchify are [H, W, C].
namespace vgt::ops {

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T s);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& a, T s);

template <typename T> Tensor<T> exp(const Tensor<T>& a);
template <typename T> Tensor<T> log(const Tensor<T>& a);
template <typename T> Tensor<T> sigmoid(const Tensor<T>& a);
template <typename T> Tensor<T> relu(const Tensor<T>& a);
// Exact (erf) GELU.
template <typename T> Tensor<T> gelu(const Tensor<T>& a);

template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);
// [M, N] -> [M], mean over the last axis.
template <typename T> Tensor<T> mean_rows(const Tensor<T>& a);

template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> transpose(const Tensor<T>& a);
template <typename T> Tensor<T> add_row_bias(const Tensor<T>& x, const Tensor<T>& bias);
// x[M, in] * w[in, out] + b[out]; bias may be undefined.
template <typename T> Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

template <typename T> Tensor<T> reshape(const Tensor<T>& a, Shape shape);
template <typename T> Tensor<T> slice_rows(const Tensor<T>& a, std::size_t start, std::size_t count);
template <typename T> Tensor<T> slice_cols(const Tensor<T>& a, std::size_t start, std::size_t count);
template <typename T> Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts);
template <typename T> Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts);
// out[i] = a[i, index[i]]
template <typename T> Tensor<T> pick(const Tensor<T>& a, const std::vector<std::size_t>& index);
// out[i, :] = table[ids[i], :]
template <typename T> Tensor<T> gather_rows(const Tensor<T>& table, const std::vector<std::size_t>& ids);

template <typename T> Tensor<T> softmax(const Tensor<T>& x, std::size_t axis);
template <typename T> Tensor<T> log_softmax(const Tensor<T>& x, std::size_t axis);
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps);
// Row-wise x / max(||x||, eps).
template <typename T> Tensor<T> normalize_rows(const Tensor<T>& x, T eps = T(1e-12));

// x[C, H, W], w[O, C, kh, kw], bias[O] (may be undefined).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 std::size_t stride, std::size_t padding);
// x[C, H, W], w[C, O, kh, kw], no padding.
template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                           std::size_t stride);
template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& x, std::size_t kernel, std::size_t stride);
template <typename T> Tensor<T> upsample_nearest2x(const Tensor<T>& x);

// x[H, W, C] -> [N, P*P*C], patches and their contents both row-major.
template <typename T> Tensor<T> patchify(const Tensor<T>& x, std::size_t patch);
// Inverse of patchify; not recorded on the tape.
template <typename T>
Tensor<T> unpatchify(const Tensor<T>& patches, std::size_t height, std::size_t width,
                     std::size_t channels, std::size_t patch);
// Token rows [h*w, D] (row-major positions) -> map [D, h, w].
template <typename T> Tensor<T> tokens_to_map(const Tensor<T>& tokens, std::size_t h, std::size_t w);

namespace detail {
// Dense kernels shared by ops and layers. All accumulate into c.
template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
}  // namespace detail

}  // namespace vgt::ops
