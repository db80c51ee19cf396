#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "vgt/core/param_store.h"
#include "vgt/core/tensor.h"

namespace vgt {

/// Zeroes every trainable gradient in the store, then replays the tape from
/// the scalar loss. Parameters the loss does not reach keep a zero gradient.
template <typename T>
void backward(Tape<T>& tape, const Tensor<T>& loss, ParamStore<T>& store);

struct GradCheckOptions {
  double eps = 1e-5;
  // Coordinates probed per parameter; tensors at or below this size are
  // checked exhaustively, larger ones at a seeded random subset.
  std::size_t max_coords_per_param = 64;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

/// |a - b| / max(|a|, |b|, 1e-12)
double relative_error(double a, double b);

/// Central differences of f against reverse-mode gradients, over every
/// trainable parameter in the store. f must rebuild its graph from the
/// store on each call. Throws if f is not deterministic or eps is outside
/// [1e-7, 1e-3].
template <typename T>
GradCheckReport finite_difference_check(const std::function<Tensor<T>()>& f, ParamStore<T>& params,
                                        const GradCheckOptions& options = {});

}  // namespace vgt
