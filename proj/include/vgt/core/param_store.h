#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "vgt/core/tensor.h"

namespace vgt {

template <typename T>
struct Param {
  Tensor<T> tensor;
  // AdamW state.
  std::vector<T> first_moment;
  std::vector<T> second_moment;
  std::uint64_t step = 0;
};

/// Named learnable tensors addressed by dotted path ("git.block1.attn.wq").
/// Iteration is sorted by name.
template <typename T>
class ParamStore {
 public:
  using Map = std::map<std::string, Param<T>>;

  Tensor<T>& add(const std::string& name, Tensor<T> init);
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  Tensor<T>& get(const std::string& name);
  const Tensor<T>& get(const std::string& name) const;
  Param<T>& entry(const std::string& name);

  void zero_grad();
  void set_trainable(const std::string& prefix, bool trainable);
  std::size_t size() const { return params_.size(); }
  std::size_t numel() const;
  std::vector<std::string> names() const;

  typename Map::iterator begin() { return params_.begin(); }
  typename Map::iterator end() { return params_.end(); }
  typename Map::const_iterator begin() const { return params_.begin(); }
  typename Map::const_iterator end() const { return params_.end(); }

 private:
  Map params_;
};

/// Deterministic parameter initializers.
template <typename T>
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  Tensor<T> normal(Shape shape, double stddev);
  Tensor<T> uniform(Shape shape, double bound);
  Tensor<T> zeros(Shape shape) { return Tensor<T>::zeros(std::move(shape), true); }
  Tensor<T> ones(Shape shape) { return Tensor<T>::full(std::move(shape), T(1), true); }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace vgt
