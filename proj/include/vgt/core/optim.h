#pragma once

#include <cstdint>

#include "vgt/core/param_store.h"

namespace vgt {

struct AdamWHyper {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
};

/// One decoupled-weight-decay Adam update over every trainable parameter.
/// Throws if a trainable parameter has no gradient buffer.
template <typename T>
void optimizer_step(ParamStore<T>& store, const AdamWHyper& hyper);

/// Linear warmup: lr * min(1, (step + 1) / warmup_steps).
double warmup_lr(double base_lr, std::uint64_t step, std::uint64_t warmup_steps);

}  // namespace vgt
