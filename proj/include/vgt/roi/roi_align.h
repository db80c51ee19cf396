#pragma once

#include <vector>

#include "vgt/core/tensor.h"
#include "vgt/doc/types.h"

namespace vgt::roi {

using RoIBox = doc::BoxF;

/// RoIAlign with pixel-aligned box mapping (feature coordinate =
/// image coordinate / stride - 0.5) and 2x2 regularly spaced samples per bin.
/// Samples beyond one cell outside the map read zero; samples inside that
/// margin are clamped to the edge, so a constant map stays constant.
///
/// featmap [C, H, W] -> [K, C, n, n]. Differentiable with respect to featmap.
template <typename T>
Tensor<T> roi_align(const Tensor<T>& featmap, const std::vector<RoIBox>& boxes, double stride, std::size_t out);

/// roi_align followed by a mean over the n x n bins: [K, C].
template <typename T>
Tensor<T> roi_align_pooled(const Tensor<T>& featmap, const std::vector<RoIBox>& boxes, double stride,
                           std::size_t out);

/// Bilinear read at a continuous feature coordinate with the border rules above.
template <typename T>
T bilinear_sample(const T* plane, std::size_t height, std::size_t width, double y, double x);

/// Pyramid level (2..5) for a box: floor(4 + log2(sqrt(area) / (image_size / 4))), clamped.
int assign_fpn_level(const RoIBox& box, double image_size);

}  // namespace vgt::roi
