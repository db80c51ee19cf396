#include "vgt/core/optim.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vgt {

template <typename T>
void optimizer_step(ParamStore<T>& store, const AdamWHyper& hyper) {
  for (auto& [name, p] : store) {
    Tensor<T>& t = p.tensor;
    if (!t.requires_grad()) continue;
    if (!t.has_grad()) throw std::logic_error("optimizer_step: parameter " + name + " has no gradient");
    const std::size_t n = t.numel();
    if (p.first_moment.size() != n) {
      p.first_moment.assign(n, T(0));
      p.second_moment.assign(n, T(0));
    }
    ++p.step;
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(p.step));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(p.step));
    const T b1 = static_cast<T>(hyper.beta1), b2 = static_cast<T>(hyper.beta2);
    const T lr = static_cast<T>(hyper.lr);
    const T decay = static_cast<T>(1.0 - hyper.lr * hyper.weight_decay);
    const T inv_bc1 = static_cast<T>(1.0 / bc1), inv_bc2 = static_cast<T>(1.0 / bc2);
    const T eps = static_cast<T>(hyper.eps);
    auto value = t.mutable_values();
    auto grad = t.grad();
    for (std::size_t i = 0; i < n; ++i) {
      const T g = grad[i];
      p.first_moment[i] = b1 * p.first_moment[i] + (T(1) - b1) * g;
      p.second_moment[i] = b2 * p.second_moment[i] + (T(1) - b2) * g * g;
      const T m_hat = p.first_moment[i] * inv_bc1;
      const T v_hat = p.second_moment[i] * inv_bc2;
      value[i] = value[i] * decay - lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

double warmup_lr(double base_lr, std::uint64_t step, std::uint64_t warmup_steps) {
  if (warmup_steps == 0) return base_lr;
  return base_lr * std::min(1.0, static_cast<double>(step + 1) / static_cast<double>(warmup_steps));
}

template void optimizer_step<float>(ParamStore<float>&, const AdamWHyper&);
template void optimizer_step<double>(ParamStore<double>&, const AdamWHyper&);

}  // namespace vgt
