#include "vgt/core/tensor.h"

#include <cassert>
#include <cmath>
#include <sstream>

namespace vgt {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T fill, bool requires_grad) {
  auto s = std::make_shared<TensorStorage<T>>();
  s->value.assign(shape_numel(shape), fill);
  s->shape = std::move(shape);
  s->requires_grad = requires_grad;
  return Tensor(std::move(s));
}

template <typename T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor shape " + shape_str(shape) + " does not hold " +
                     std::to_string(values.size()) + " values");
  }
  auto s = std::make_shared<TensorStorage<T>>();
  s->shape = std::move(shape);
  s->value = std::move(values);
  s->requires_grad = requires_grad;
  return Tensor(std::move(s));
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T v, bool requires_grad) {
  return from({}, {v}, requires_grad);
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  return storage_->value[0];
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  auto s = std::make_shared<TensorStorage<T>>(*storage_);
  return Tensor(std::move(s));
}

namespace {
template <typename T>
thread_local Tape<T>* g_active_tape = nullptr;

#ifdef NDEBUG
bool g_finite_check = false;
#else
bool g_finite_check = true;
#endif
}  // namespace

template <typename T>
Tape<T>* active_tape() {
  return g_active_tape<T>;
}

template <typename T>
TapeScope<T>::TapeScope(Tape<T>& tape) : previous_(g_active_tape<T>) {
  g_active_tape<T> = &tape;
}

template <typename T>
TapeScope<T>::~TapeScope() {
  g_active_tape<T> = previous_;
}

template <typename T>
void Tape<T>::record(const Tensor<T>& output, std::function<void()> backward_fn) {
  if (consumed_) throw std::logic_error("recording on a tape that already ran backward");
  entries_.push_back({output.storage(), std::move(backward_fn)});
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss) {
  if (consumed_) throw std::logic_error("tape already consumed by backward()");
  if (loss.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  consumed_ = true;
  if (!loss.requires_grad()) {
    entries_.clear();
    return;
  }
  // Entries are appended in creation order, so the loss must appear on the
  // tape and every input of an entry precedes it. Reverse replay is a valid
  // topological order.
  std::size_t last = entries_.size();
  while (last > 0 && entries_[last - 1].output != loss.storage()) --last;
  assert(last > 0 && "loss was not produced on this tape");
  if (last == 0) throw std::logic_error("loss was not recorded on this tape");

  auto storage = loss.shared_storage();
  storage->ensure_grad();
  storage->grad[0] += T(1);
  for (std::size_t i = last; i-- > 0;) {
    if (!entries_[i].output->grad.empty()) entries_[i].fn();
  }
  entries_.clear();
}

void set_finite_check(bool enabled) { g_finite_check = enabled; }
bool finite_check_enabled() { return g_finite_check; }

template <typename T>
void check_finite(const Tensor<T>& t, const char* op) {
  if (!g_finite_check) return;
  for (T v : t.values()) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value produced by ") + op);
  }
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template class TapeScope<float>;
template class TapeScope<double>;
template Tape<float>* active_tape<float>();
template Tape<double>* active_tape<double>();
template void check_finite(const Tensor<float>&, const char*);
template void check_finite(const Tensor<double>&, const char*);

}  // namespace vgt
