#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vgt {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename T>
struct TensorStorage {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until first accumulation
  bool requires_grad = false;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
  }
};

/// Shared handle to a dense row-major array. Copies alias the same storage;
/// use clone() for a deep copy.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T fill, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false);
  static Tensor scalar(T v, bool requires_grad = false);

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const { return storage_->shape; }
  std::size_t dim(std::size_t i) const { return storage_->shape.at(i); }
  std::size_t rank() const { return storage_->shape.size(); }
  std::size_t numel() const { return storage_->value.size(); }

  std::span<const T> values() const { return storage_->value; }
  std::span<T> mutable_values() { return storage_->value; }
  const T* data() const { return storage_->value.data(); }
  T* data() { return storage_->value.data(); }
  T item() const;
  T at(std::size_t flat) const { return storage_->value.at(flat); }

  bool has_grad() const { return storage_->grad.size() == storage_->value.size(); }
  std::span<const T> grad() const { return storage_->grad; }
  std::span<T> mutable_grad() {
    storage_->ensure_grad();
    return storage_->grad;
  }
  void zero_grad() { storage_->grad.assign(storage_->value.size(), T(0)); }

  bool requires_grad() const { return storage_->requires_grad; }
  void set_requires_grad(bool v) { storage_->requires_grad = v; }

  Tensor clone() const;
  const TensorStorage<T>* storage() const { return storage_.get(); }
  std::shared_ptr<TensorStorage<T>> shared_storage() const { return storage_; }

 private:
  explicit Tensor(std::shared_ptr<TensorStorage<T>> s) : storage_(std::move(s)) {}
  std::shared_ptr<TensorStorage<T>> storage_;
};

/// Records backward closures in forward order and replays them in reverse.
/// A tape is consumed by a single backward() call.
template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(const Tensor<T>& output, std::function<void()> backward_fn);
  void backward(const Tensor<T>& loss);
  std::size_t size() const { return entries_.size(); }
  bool consumed() const { return consumed_; }

 private:
  struct Entry {
    const TensorStorage<T>* output;
    std::function<void()> fn;
  };
  std::vector<Entry> entries_;
  bool consumed_ = false;
};

/// Makes a tape the recording target of the current thread for its lifetime.
template <typename T>
class TapeScope {
 public:
  explicit TapeScope(Tape<T>& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape<T>* previous_;
};

template <typename T>
Tape<T>* active_tape();

// Finite-value assertion on op outputs. On by default in debug builds.
void set_finite_check(bool enabled);
bool finite_check_enabled();

template <typename T>
void check_finite(const Tensor<T>& t, const char* op);

}  // namespace vgt
