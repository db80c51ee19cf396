#include "vgt/core/param_store.h"

#include <stdexcept>

namespace vgt {

template <typename T>
Tensor<T>& ParamStore<T>::add(const std::string& name, Tensor<T> init) {
  if (name.empty()) throw std::invalid_argument("parameter name must not be empty");
  if (params_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  init.set_requires_grad(true);
  auto& p = params_[name];
  p.tensor = std::move(init);
  return p.tensor;
}

template <typename T>
Tensor<T>& ParamStore<T>::get(const std::string& name) {
  return entry(name).tensor;
}

template <typename T>
const Tensor<T>& ParamStore<T>::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second.tensor;
}

template <typename T>
Param<T>& ParamStore<T>::entry(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& [name, p] : params_) {
    if (p.tensor.requires_grad()) p.tensor.zero_grad();
  }
}

template <typename T>
void ParamStore<T>::set_trainable(const std::string& prefix, bool trainable) {
  for (auto& [name, p] : params_) {
    if (name.rfind(prefix, 0) == 0) p.tensor.set_requires_grad(trainable);
  }
}

template <typename T>
std::size_t ParamStore<T>::numel() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.tensor.numel();
  return n;
}

template <typename T>
std::vector<std::string> ParamStore<T>::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, p] : params_) out.push_back(name);
  return out;
}

template <typename T>
Tensor<T> Initializer<T>::normal(Shape shape, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<T> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<T>(dist(rng_));
  return Tensor<T>::from(std::move(shape), std::move(v), true);
}

template <typename T>
Tensor<T> Initializer<T>::uniform(Shape shape, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<T> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<T>(dist(rng_));
  return Tensor<T>::from(std::move(shape), std::move(v), true);
}

template class ParamStore<float>;
template class ParamStore<double>;
template class Initializer<float>;
template class Initializer<double>;

}  // namespace vgt
