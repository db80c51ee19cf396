#include "vgt/core/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace vgt::ops {
namespace {

template <typename T>
using Store = std::shared_ptr<TensorStorage<T>>;

template <typename T>
bool wants_grad(const Tensor<T>& t) {
  return t.defined() && t.requires_grad();
}

template <typename T, typename... Rest>
bool tracking(const Tensor<T>& first, const Rest&... rest) {
  if (active_tape<T>() == nullptr) return false;
  return (wants_grad(first) || ... || wants_grad(rest));
}

// Returns the gradient buffer of an input, or nullptr when it needs none.
template <typename T>
T* grad_of(const Store<T>& s) {
  if (!s || !s->requires_grad) return nullptr;
  s->ensure_grad();
  return s->grad.data();
}

template <typename T, typename MakeBackward>
Tensor<T> emit(Shape shape, std::vector<T> values, bool track, const char* name,
               MakeBackward&& make_backward) {
  auto out = Tensor<T>::from(std::move(shape), std::move(values), track);
  check_finite(out, name);
  if (track) active_tape<T>()->record(out, make_backward(out.shared_storage()));
  return out;
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

template <typename T>
void require_rank(const Tensor<T>& a, std::size_t rank, const char* op) {
  if (a.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_str(a.shape()));
  }
}

template <typename T, typename F, typename DF>
Tensor<T> unary(const Tensor<T>& a, const char* name, F f, DF df) {
  std::vector<T> v(a.numel());
  const T* x = a.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(x[i]);
  return emit<T>(a.shape(), std::move(v), tracking(a), name, [A = a.shared_storage(), df](Store<T> O) {
    return [A, O, df]() {
      T* ga = grad_of(A);
      if (!ga) return;
      const T* go = O->grad.data();
      const T* x = A->value.data();
      const T* y = O->value.data();
      for (std::size_t i = 0; i < A->value.size(); ++i) ga[i] += go[i] * df(x[i], y[i]);
    };
  });
}

struct ConvGeometry {
  std::size_t channels, height, width, kernel_h, kernel_w, stride, padding, out_h, out_w;
};

template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* col) {
  const std::size_t plane = g.out_h * g.out_w;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
        T* row = col + ((c * g.kernel_h + ky) * g.kernel_w + kx) * plane;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                          static_cast<std::ptrdiff_t>(g.padding);
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                            static_cast<std::ptrdiff_t>(g.padding);
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(g.height) &&
                                ix < static_cast<std::ptrdiff_t>(g.width);
            row[oy * g.out_w + ox] = inside ? x[(c * g.height + iy) * g.width + ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, const ConvGeometry& g, T* x) {
  const std::size_t plane = g.out_h * g.out_w;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
        const T* row = col + ((c * g.kernel_h + ky) * g.kernel_w + kx) * plane;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                          static_cast<std::ptrdiff_t>(g.padding);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                            static_cast<std::ptrdiff_t>(g.padding);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
            x[(c * g.height + iy) * g.width + ix] += row[oy * g.out_w + ox];
          }
        }
      }
    }
  }
}

}  // namespace

namespace detail {

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  // Four rows of c share each streamed row of b; per-element accumulation
  // order over p is unchanged.
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    T* __restrict c0 = c + i * n;
    T* __restrict c1 = c0 + n;
    T* __restrict c2 = c1 + n;
    T* __restrict c3 = c2 + n;
    const T* a0 = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T v0 = a0[p], v1 = a0[k + p], v2 = a0[2 * k + p], v3 = a0[3 * k + p];
      if (v0 == T(0) && v1 == T(0) && v2 == T(0) && v3 == T(0)) continue;
      const T* __restrict bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        const T bv = bp[j];
        c0[j] += v0 * bv;
        c1[j] += v1 * bv;
        c2[j] += v2 * bv;
        c3[j] += v3 * bv;
      }
    }
  }
  for (; i < m; ++i) {
    T* __restrict ci = c + i * n;
    const T* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ai[p];
      if (av == T(0)) continue;
      const T* __restrict bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  // b is [n, k]; transpose once so the inner loop streams contiguously.
  std::vector<T> bt(k * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
  gemm_nn(m, n, k, a, bt.data(), c);
}

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  // a is [k, m]
  for (std::size_t p = 0; p < k; ++p) {
    const T* ap = a + p * m;
    const T* __restrict bp = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const T av = ap[i];
      if (av == T(0)) continue;
      T* __restrict ci = c + i * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

template void gemm_nn<float>(std::size_t, std::size_t, std::size_t, const float*, const float*, float*);
template void gemm_nn<double>(std::size_t, std::size_t, std::size_t, const double*, const double*, double*);
template void gemm_nt<float>(std::size_t, std::size_t, std::size_t, const float*, const float*, float*);
template void gemm_nt<double>(std::size_t, std::size_t, std::size_t, const double*, const double*, double*);
template void gemm_tn<float>(std::size_t, std::size_t, std::size_t, const float*, const float*, float*);
template void gemm_tn<double>(std::size_t, std::size_t, std::size_t, const double*, const double*, double*);

}  // namespace detail

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  std::vector<T> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] + b.data()[i];
  return emit<T>(a.shape(), std::move(v), tracking(a, b), "add",
                 [A = a.shared_storage(), B = b.shared_storage()](Store<T> O) {
                   return [A, B, O]() {
                     const T* go = O->grad.data();
                     const std::size_t n = O->value.size();
                     if (T* ga = grad_of(A))
                       for (std::size_t i = 0; i < n; ++i) ga[i] += go[i];
                     if (T* gb = grad_of(B))
                       for (std::size_t i = 0; i < n; ++i) gb[i] += go[i];
                   };
                 });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  std::vector<T> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] - b.data()[i];
  return emit<T>(a.shape(), std::move(v), tracking(a, b), "sub",
                 [A = a.shared_storage(), B = b.shared_storage()](Store<T> O) {
                   return [A, B, O]() {
                     const T* go = O->grad.data();
                     const std::size_t n = O->value.size();
                     if (T* ga = grad_of(A))
                       for (std::size_t i = 0; i < n; ++i) ga[i] += go[i];
                     if (T* gb = grad_of(B))
                       for (std::size_t i = 0; i < n; ++i) gb[i] -= go[i];
                   };
                 });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  std::vector<T> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] * b.data()[i];
  return emit<T>(a.shape(), std::move(v), tracking(a, b), "mul",
                 [A = a.shared_storage(), B = b.shared_storage()](Store<T> O) {
                   return [A, B, O]() {
                     const T* go = O->grad.data();
                     const std::size_t n = O->value.size();
                     if (T* ga = grad_of(A))
                       for (std::size_t i = 0; i < n; ++i) ga[i] += go[i] * B->value[i];
                     if (T* gb = grad_of(B))
                       for (std::size_t i = 0; i < n; ++i) gb[i] += go[i] * A->value[i];
                   };
                 });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  return unary<T>(a, "scale", [s](T x) { return x * s; }, [s](T, T) { return s; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T s) {
  return unary<T>(a, "add_scalar", [s](T x) { return x + s; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> exp(const Tensor<T>& a) {
  return unary<T>(a, "exp", [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> log(const Tensor<T>& a) {
  return unary<T>(a, "log", [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  return unary<T>(
      a, "sigmoid", [](T x) { return T(1) / (T(1) + std::exp(-x)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return unary<T>(
      a, "relu", [](T x) { return x > T(0) ? x : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& a) {
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  const T inv_sqrt2pi = std::numbers::inv_sqrtpi_v<T> * inv_sqrt2;
  return unary<T>(
      a, "gelu", [=](T x) { return T(0.5) * x * (T(1) + std::erf(x * inv_sqrt2)); },
      [=](T x, T) {
        const T cdf = T(0.5) * (T(1) + std::erf(x * inv_sqrt2));
        return cdf + x * inv_sqrt2pi * std::exp(T(-0.5) * x * x);
      });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  T s = 0;
  for (T x : a.values()) s += x;
  return emit<T>({}, {s}, tracking(a), "sum", [A = a.shared_storage()](Store<T> O) {
    return [A, O]() {
      if (T* ga = grad_of(A)) {
        const T g = O->grad[0];
        for (std::size_t i = 0; i < A->value.size(); ++i) ga[i] += g;
      }
    };
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  if (a.numel() == 0) throw ShapeError("mean of empty tensor");
  return scale(sum(a), T(1) / static_cast<T>(a.numel()));
}

template <typename T>
Tensor<T> mean_rows(const Tensor<T>& a) {
  require_rank(a, 2, "mean_rows");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<T> v(m, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    T s = 0;
    for (std::size_t j = 0; j < n; ++j) s += a.data()[i * n + j];
    v[i] = s / static_cast<T>(n);
  }
  return emit<T>({m}, std::move(v), tracking(a), "mean_rows", [A = a.shared_storage(), m, n](Store<T> O) {
    return [A, O, m, n]() {
      if (T* ga = grad_of(A)) {
        for (std::size_t i = 0; i < m; ++i) {
          const T g = O->grad[i] / static_cast<T>(n);
          for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g;
        }
      }
    };
  });
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  if (a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: inner extents differ, " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<T> v(m * n, T(0));
  detail::gemm_nn(m, n, k, a.data(), b.data(), v.data());
  return emit<T>({m, n}, std::move(v), tracking(a, b), "matmul",
                 [A = a.shared_storage(), B = b.shared_storage(), m, n, k](Store<T> O) {
                   return [A, B, O, m, n, k]() {
                     const T* go = O->grad.data();
                     if (T* ga = grad_of(A)) detail::gemm_nt(m, k, n, go, B->value.data(), ga);
                     if (T* gb = grad_of(B)) detail::gemm_tn(k, n, m, A->value.data(), go, gb);
                   };
                 });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<T> v(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) v[j * m + i] = a.data()[i * n + j];
  return emit<T>({n, m}, std::move(v), tracking(a), "transpose", [A = a.shared_storage(), m, n](Store<T> O) {
    return [A, O, m, n]() {
      if (T* ga = grad_of(A))
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += O->grad[j * m + i];
    };
  });
}

template <typename T>
Tensor<T> add_row_bias(const Tensor<T>& x, const Tensor<T>& bias) {
  require_rank(x, 2, "add_row_bias");
  const std::size_t m = x.dim(0), n = x.dim(1);
  if (bias.numel() != n) throw ShapeError("add_row_bias: bias size " + shape_str(bias.shape()));
  std::vector<T> v(x.values().begin(), x.values().end());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] += bias.data()[j];
  return emit<T>(x.shape(), std::move(v), tracking(x, bias), "add_row_bias",
                 [X = x.shared_storage(), B = bias.shared_storage(), m, n](Store<T> O) {
                   return [X, B, O, m, n]() {
                     const T* go = O->grad.data();
                     if (T* gx = grad_of(X))
                       for (std::size_t i = 0; i < m * n; ++i) gx[i] += go[i];
                     if (T* gb = grad_of(B))
                       for (std::size_t i = 0; i < m; ++i)
                         for (std::size_t j = 0; j < n; ++j) gb[j] += go[i * n + j];
                   };
                 });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  require_rank(x, 2, "linear");
  require_rank(w, 2, "linear");
  if (x.dim(1) != w.dim(0)) {
    throw ShapeError("linear: input " + shape_str(x.shape()) + " vs weight " + shape_str(w.shape()));
  }
  const std::size_t m = x.dim(0), k = x.dim(1), n = w.dim(1);
  const bool has_bias = b.defined();
  if (has_bias && b.numel() != n) throw ShapeError("linear: bias " + shape_str(b.shape()));
  std::vector<T> v(m * n, T(0));
  if (has_bias)
    for (std::size_t i = 0; i < m; ++i) std::copy(b.data(), b.data() + n, v.data() + i * n);
  detail::gemm_nn(m, n, k, x.data(), w.data(), v.data());
  Store<T> bias_store = has_bias ? b.shared_storage() : nullptr;
  return emit<T>({m, n}, std::move(v), tracking(x, w, b), "linear",
                 [X = x.shared_storage(), W = w.shared_storage(), bias_store, m, n, k](Store<T> O) {
                   return [X, W, bias_store, O, m, n, k]() {
                     const T* go = O->grad.data();
                     if (T* gx = grad_of(X)) detail::gemm_nt(m, k, n, go, W->value.data(), gx);
                     if (T* gw = grad_of(W)) detail::gemm_tn(k, n, m, X->value.data(), go, gw);
                     if (T* gb = grad_of(bias_store))
                       for (std::size_t i = 0; i < m; ++i)
                         for (std::size_t j = 0; j < n; ++j) gb[j] += go[i * n + j];
                   };
                 });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: " + shape_str(a.shape()) + " -> " + shape_str(shape));
  }
  std::vector<T> v(a.values().begin(), a.values().end());
  return emit<T>(std::move(shape), std::move(v), tracking(a), "reshape", [A = a.shared_storage()](Store<T> O) {
    return [A, O]() {
      if (T* ga = grad_of(A))
        for (std::size_t i = 0; i < A->value.size(); ++i) ga[i] += O->grad[i];
    };
  });
}

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& a, std::size_t start, std::size_t count) {
  require_rank(a, 2, "slice_rows");
  const std::size_t n = a.dim(1);
  if (start + count > a.dim(0)) throw ShapeError("slice_rows: range past " + shape_str(a.shape()));
  std::vector<T> v(a.data() + start * n, a.data() + (start + count) * n);
  return emit<T>({count, n}, std::move(v), tracking(a), "slice_rows",
                 [A = a.shared_storage(), start, n](Store<T> O) {
                   return [A, O, start, n]() {
                     if (T* ga = grad_of(A))
                       for (std::size_t i = 0; i < O->value.size(); ++i) ga[start * n + i] += O->grad[i];
                   };
                 });
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& a, std::size_t start, std::size_t count) {
  require_rank(a, 2, "slice_cols");
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (start + count > n) throw ShapeError("slice_cols: range past " + shape_str(a.shape()));
  std::vector<T> v(m * count);
  for (std::size_t i = 0; i < m; ++i)
    std::copy(a.data() + i * n + start, a.data() + i * n + start + count, v.data() + i * count);
  return emit<T>({m, count}, std::move(v), tracking(a), "slice_cols",
                 [A = a.shared_storage(), start, count, m, n](Store<T> O) {
                   return [A, O, start, count, m, n]() {
                     if (T* ga = grad_of(A))
                       for (std::size_t i = 0; i < m; ++i)
                         for (std::size_t j = 0; j < count; ++j)
                           ga[i * n + start + j] += O->grad[i * count + j];
                   };
                 });
}

template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t n = parts[0].dim(1);
  std::size_t rows = 0;
  bool track = false;
  for (const auto& p : parts) {
    require_rank(p, 2, "concat_rows");
    if (p.dim(1) != n) throw ShapeError("concat_rows: column mismatch " + shape_str(p.shape()));
    rows += p.dim(0);
    track = track || tracking(p);
  }
  std::vector<T> v;
  v.reserve(rows * n);
  std::vector<Store<T>> stores;
  for (const auto& p : parts) {
    v.insert(v.end(), p.values().begin(), p.values().end());
    stores.push_back(p.shared_storage());
  }
  return emit<T>({rows, n}, std::move(v), track, "concat_rows", [stores](Store<T> O) {
    return [stores, O]() {
      std::size_t offset = 0;
      for (const auto& s : stores) {
        if (T* g = grad_of(s))
          for (std::size_t i = 0; i < s->value.size(); ++i) g[i] += O->grad[offset + i];
        offset += s->value.size();
      }
    };
  });
}

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t m = parts[0].dim(0);
  std::size_t cols = 0;
  bool track = false;
  for (const auto& p : parts) {
    require_rank(p, 2, "concat_cols");
    if (p.dim(0) != m) throw ShapeError("concat_cols: row mismatch " + shape_str(p.shape()));
    cols += p.dim(1);
    track = track || tracking(p);
  }
  std::vector<T> v(m * cols);
  std::vector<Store<T>> stores;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t c = p.dim(1);
    for (std::size_t i = 0; i < m; ++i)
      std::copy(p.data() + i * c, p.data() + (i + 1) * c, v.data() + i * cols + offset);
    offset += c;
    stores.push_back(p.shared_storage());
  }
  return emit<T>({m, cols}, std::move(v), track, "concat_cols", [stores, m, cols](Store<T> O) {
    return [stores, O, m, cols]() {
      std::size_t offset = 0;
      for (const auto& s : stores) {
        const std::size_t c = s->shape[1];
        if (T* g = grad_of(s))
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < c; ++j) g[i * c + j] += O->grad[i * cols + offset + j];
        offset += c;
      }
    };
  });
}

template <typename T>
Tensor<T> pick(const Tensor<T>& a, const std::vector<std::size_t>& index) {
  require_rank(a, 2, "pick");
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (index.size() != m) throw ShapeError("pick: index count differs from rows");
  std::vector<T> v(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (index[i] >= n) throw ShapeError("pick: column index out of range");
    v[i] = a.data()[i * n + index[i]];
  }
  return emit<T>({m}, std::move(v), tracking(a), "pick", [A = a.shared_storage(), index, n](Store<T> O) {
    return [A, O, index, n]() {
      if (T* ga = grad_of(A))
        for (std::size_t i = 0; i < index.size(); ++i) ga[i * n + index[i]] += O->grad[i];
    };
  });
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, const std::vector<std::size_t>& ids) {
  require_rank(table, 2, "gather_rows");
  const std::size_t rows = table.dim(0), c = table.dim(1);
  std::vector<T> v(ids.size() * c);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= rows) {
      throw ShapeError("gather_rows: id " + std::to_string(ids[i]) + " outside table of " +
                       std::to_string(rows) + " rows");
    }
    std::copy(table.data() + ids[i] * c, table.data() + (ids[i] + 1) * c, v.data() + i * c);
  }
  return emit<T>({ids.size(), c}, std::move(v), tracking(table), "gather_rows",
                 [A = table.shared_storage(), ids, c](Store<T> O) {
                   return [A, O, ids, c]() {
                     if (T* ga = grad_of(A))
                       for (std::size_t i = 0; i < ids.size(); ++i)
                         for (std::size_t j = 0; j < c; ++j) ga[ids[i] * c + j] += O->grad[i * c + j];
                   };
                 });
}

namespace {
struct AxisSplit {
  std::size_t outer, n, inner;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis, const char* op) {
  if (axis >= shape.size()) throw ShapeError(std::string(op) + ": axis out of range for " + shape_str(shape));
  AxisSplit s{1, shape[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}
}  // namespace

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis) {
  const auto s = split_axis(x.shape(), axis, "softmax");
  std::vector<T> v(x.numel());
  const T* in = x.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t r = 0; r < s.inner; ++r) {
      const std::size_t base = o * s.n * s.inner + r;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t i = 0; i < s.n; ++i) mx = std::max(mx, in[base + i * s.inner]);
      T z = 0;
      for (std::size_t i = 0; i < s.n; ++i) {
        const T e = std::exp(in[base + i * s.inner] - mx);
        v[base + i * s.inner] = e;
        z += e;
      }
      for (std::size_t i = 0; i < s.n; ++i) v[base + i * s.inner] /= z;
    }
  }
  return emit<T>(x.shape(), std::move(v), tracking(x), "softmax", [X = x.shared_storage(), s](Store<T> O) {
    return [X, O, s]() {
      T* gx = grad_of(X);
      if (!gx) return;
      const T* y = O->value.data();
      const T* gy = O->grad.data();
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t r = 0; r < s.inner; ++r) {
          const std::size_t base = o * s.n * s.inner + r;
          T dot = 0;
          for (std::size_t i = 0; i < s.n; ++i) dot += gy[base + i * s.inner] * y[base + i * s.inner];
          for (std::size_t i = 0; i < s.n; ++i) {
            const std::size_t k = base + i * s.inner;
            gx[k] += y[k] * (gy[k] - dot);
          }
        }
      }
    };
  });
}

template <typename T>
Tensor<T> log_softmax(const Tensor<T>& x, std::size_t axis) {
  const auto s = split_axis(x.shape(), axis, "log_softmax");
  std::vector<T> v(x.numel());
  const T* in = x.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t r = 0; r < s.inner; ++r) {
      const std::size_t base = o * s.n * s.inner + r;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t i = 0; i < s.n; ++i) mx = std::max(mx, in[base + i * s.inner]);
      T z = 0;
      for (std::size_t i = 0; i < s.n; ++i) z += std::exp(in[base + i * s.inner] - mx);
      const T lse = mx + std::log(z);
      for (std::size_t i = 0; i < s.n; ++i) v[base + i * s.inner] = in[base + i * s.inner] - lse;
    }
  }
  return emit<T>(x.shape(), std::move(v), tracking(x), "log_softmax", [X = x.shared_storage(), s](Store<T> O) {
    return [X, O, s]() {
      T* gx = grad_of(X);
      if (!gx) return;
      const T* y = O->value.data();
      const T* gy = O->grad.data();
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t r = 0; r < s.inner; ++r) {
          const std::size_t base = o * s.n * s.inner + r;
          T total = 0;
          for (std::size_t i = 0; i < s.n; ++i) total += gy[base + i * s.inner];
          for (std::size_t i = 0; i < s.n; ++i) {
            const std::size_t k = base + i * s.inner;
            gx[k] += gy[k] - std::exp(y[k]) * total;
          }
        }
      }
    };
  });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  if (x.rank() == 0) throw ShapeError("layer_norm: scalar input");
  const std::size_t d = x.shape().back();
  if (gamma.numel() != d || beta.numel() != d) {
    throw ShapeError("layer_norm: affine params do not match last extent of " + shape_str(x.shape()));
  }
  if (eps < T(0)) throw std::invalid_argument("layer_norm: eps must be non-negative");
  const std::size_t rows = x.numel() / d;
  std::vector<T> v(x.numel()), xhat(x.numel()), rstd(rows);
  const T* in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = in + r * d;
    T mu = 0;
    for (std::size_t i = 0; i < d; ++i) mu += row[i];
    mu /= static_cast<T>(d);
    T var = 0;
    for (std::size_t i = 0; i < d; ++i) var += (row[i] - mu) * (row[i] - mu);
    var /= static_cast<T>(d);
    rstd[r] = T(1) / std::sqrt(var + eps);
    for (std::size_t i = 0; i < d; ++i) {
      const T h = (row[i] - mu) * rstd[r];
      xhat[r * d + i] = h;
      v[r * d + i] = h * gamma.data()[i] + beta.data()[i];
    }
  }
  return emit<T>(x.shape(), std::move(v), tracking(x, gamma, beta), "layer_norm",
                 [X = x.shared_storage(), G = gamma.shared_storage(), B = beta.shared_storage(),
                  xhat = std::move(xhat), rstd = std::move(rstd), rows, d](Store<T> O) {
                   return [X, G, B, O, xhat, rstd, rows, d]() {
                     const T* gy = O->grad.data();
                     if (T* gg = grad_of(G))
                       for (std::size_t r = 0; r < rows; ++r)
                         for (std::size_t i = 0; i < d; ++i) gg[i] += gy[r * d + i] * xhat[r * d + i];
                     if (T* gb = grad_of(B))
                       for (std::size_t r = 0; r < rows; ++r)
                         for (std::size_t i = 0; i < d; ++i) gb[i] += gy[r * d + i];
                     T* gx = grad_of(X);
                     if (!gx) return;
                     const T* gamma = G->value.data();
                     for (std::size_t r = 0; r < rows; ++r) {
                       T mean_g = 0, mean_gx = 0;
                       for (std::size_t i = 0; i < d; ++i) {
                         const T g = gy[r * d + i] * gamma[i];
                         mean_g += g;
                         mean_gx += g * xhat[r * d + i];
                       }
                       mean_g /= static_cast<T>(d);
                       mean_gx /= static_cast<T>(d);
                       for (std::size_t i = 0; i < d; ++i) {
                         const T g = gy[r * d + i] * gamma[i];
                         gx[r * d + i] += rstd[r] * (g - mean_g - xhat[r * d + i] * mean_gx);
                       }
                     }
                   };
                 });
}

template <typename T>
Tensor<T> normalize_rows(const Tensor<T>& x, T eps) {
  require_rank(x, 2, "normalize_rows");
  const std::size_t m = x.dim(0), n = x.dim(1);
  std::vector<T> v(m * n), norm(m);
  for (std::size_t i = 0; i < m; ++i) {
    T s = 0;
    for (std::size_t j = 0; j < n; ++j) s += x.data()[i * n + j] * x.data()[i * n + j];
    norm[i] = std::max(std::sqrt(s), eps);
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] = x.data()[i * n + j] / norm[i];
  }
  return emit<T>({m, n}, std::move(v), tracking(x), "normalize_rows",
                 [X = x.shared_storage(), norm = std::move(norm), eps, m, n](Store<T> O) {
                   return [X, O, norm, eps, m, n]() {
                     T* gx = grad_of(X);
                     if (!gx) return;
                     const T* y = O->value.data();
                     const T* gy = O->grad.data();
                     for (std::size_t i = 0; i < m; ++i) {
                       // Below eps the op is a plain scaling by 1/eps.
                       T dot = 0;
                       if (norm[i] > eps)
                         for (std::size_t j = 0; j < n; ++j) dot += y[i * n + j] * gy[i * n + j];
                       for (std::size_t j = 0; j < n; ++j)
                         gx[i * n + j] += (gy[i * n + j] - y[i * n + j] * dot) / norm[i];
                     }
                   };
                 });
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, std::size_t stride,
                 std::size_t padding) {
  require_rank(x, 3, "conv2d");
  require_rank(w, 4, "conv2d");
  if (w.dim(1) != x.dim(0)) {
    throw ShapeError("conv2d: kernel " + shape_str(w.shape()) + " does not match input " + shape_str(x.shape()));
  }
  if (stride == 0) throw ShapeError("conv2d: zero stride");
  const std::size_t c = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t o = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (h + 2 * padding < kh || wd + 2 * padding < kw) {
    throw ShapeError("conv2d: kernel larger than padded input " + shape_str(x.shape()));
  }
  const bool has_bias = bias.defined();
  if (has_bias && bias.numel() != o) throw ShapeError("conv2d: bias " + shape_str(bias.shape()));
  ConvGeometry g{c, h, wd, kh, kw, stride, padding, (h + 2 * padding - kh) / stride + 1,
                 (wd + 2 * padding - kw) / stride + 1};
  const std::size_t plane = g.out_h * g.out_w, ckk = c * kh * kw;
  const bool pointwise = kh == 1 && kw == 1 && stride == 1 && padding == 0;
  std::vector<T> col;
  if (!pointwise) {
    col.resize(ckk * plane);
    im2col(x.data(), g, col.data());
  }
  const T* col_ptr = pointwise ? x.data() : col.data();
  std::vector<T> v(o * plane, T(0));
  if (has_bias)
    for (std::size_t oc = 0; oc < o; ++oc) std::fill_n(v.data() + oc * plane, plane, bias.data()[oc]);
  detail::gemm_nn(o, plane, ckk, w.data(), col_ptr, v.data());
  Store<T> bias_store = has_bias ? bias.shared_storage() : nullptr;
  return emit<T>({o, g.out_h, g.out_w}, std::move(v), tracking(x, w, bias), "conv2d",
                 [X = x.shared_storage(), W = w.shared_storage(), bias_store, g, col = std::move(col),
                  pointwise, o, plane, ckk](Store<T> O) {
                   return [X, W, bias_store, O, g, col, pointwise, o, plane, ckk]() {
                     const T* go = O->grad.data();
                     if (T* gb = grad_of(bias_store))
                       for (std::size_t oc = 0; oc < o; ++oc)
                         for (std::size_t p = 0; p < plane; ++p) gb[oc] += go[oc * plane + p];
                     const T* col_ptr = pointwise ? X->value.data() : col.data();
                     if (T* gw = grad_of(W)) detail::gemm_nt(o, ckk, plane, go, col_ptr, gw);
                     if (T* gx = grad_of(X)) {
                       if (pointwise) {
                         detail::gemm_tn(ckk, plane, o, W->value.data(), go, gx);
                       } else {
                         std::vector<T> dcol(ckk * plane, T(0));
                         detail::gemm_tn(ckk, plane, o, W->value.data(), go, dcol.data());
                         col2im(dcol.data(), g, gx);
                       }
                     }
                   };
                 });
}

template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, std::size_t stride) {
  require_rank(x, 3, "conv_transpose2d");
  require_rank(w, 4, "conv_transpose2d");
  if (w.dim(0) != x.dim(0)) {
    throw ShapeError("conv_transpose2d: kernel " + shape_str(w.shape()) + " does not match input " +
                     shape_str(x.shape()));
  }
  if (stride == 0) throw ShapeError("conv_transpose2d: zero stride");
  const std::size_t c = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t o = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  const std::size_t out_h = (h - 1) * stride + kh, out_w = (wd - 1) * stride + kw;
  const bool has_bias = bias.defined();
  if (has_bias && bias.numel() != o) throw ShapeError("conv_transpose2d: bias " + shape_str(bias.shape()));
  // Geometry of the output seen as an im2col source producing an h x w grid.
  ConvGeometry g{o, out_h, out_w, kh, kw, stride, 0, h, wd};
  const std::size_t plane = h * wd, okk = o * kh * kw;
  std::vector<T> col(okk * plane, T(0));
  detail::gemm_tn(okk, plane, c, w.data(), x.data(), col.data());
  std::vector<T> v(o * out_h * out_w, T(0));
  col2im(col.data(), g, v.data());
  if (has_bias)
    for (std::size_t oc = 0; oc < o; ++oc)
      for (std::size_t p = 0; p < out_h * out_w; ++p) v[oc * out_h * out_w + p] += bias.data()[oc];
  Store<T> bias_store = has_bias ? bias.shared_storage() : nullptr;
  return emit<T>({o, out_h, out_w}, std::move(v), tracking(x, w, bias), "conv_transpose2d",
                 [X = x.shared_storage(), W = w.shared_storage(), bias_store, g, c, o, plane, okk](Store<T> O) {
                   return [X, W, bias_store, O, g, c, o, plane, okk]() {
                     const T* go = O->grad.data();
                     const std::size_t out_plane = g.height * g.width;
                     if (T* gb = grad_of(bias_store))
                       for (std::size_t oc = 0; oc < o; ++oc)
                         for (std::size_t p = 0; p < out_plane; ++p) gb[oc] += go[oc * out_plane + p];
                     T* gx = grad_of(X);
                     T* gw = grad_of(W);
                     if (!gx && !gw) return;
                     std::vector<T> dcol(okk * plane);
                     im2col(go, g, dcol.data());
                     if (gx) detail::gemm_nn(c, plane, okk, W->value.data(), dcol.data(), gx);
                     if (gw) detail::gemm_nt(c, okk, plane, X->value.data(), dcol.data(), gw);
                   };
                 });
}

template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& x, std::size_t kernel, std::size_t stride) {
  require_rank(x, 3, "max_pool2d");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (kernel == 0 || stride == 0 || h < kernel || w < kernel) {
    throw ShapeError("max_pool2d: window does not fit " + shape_str(x.shape()));
  }
  const std::size_t oh = (h - kernel) / stride + 1, ow = (w - kernel) / stride + 1;
  std::vector<T> v(c * oh * ow);
  std::vector<std::size_t> argmax(v.size());
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (ch * h + oy * stride) * w + ox * stride;
        for (std::size_t ky = 0; ky < kernel; ++ky) {
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            const std::size_t idx = (ch * h + oy * stride + ky) * w + ox * stride + kx;
            if (x.data()[idx] > x.data()[best]) best = idx;
          }
        }
        const std::size_t k = (ch * oh + oy) * ow + ox;
        v[k] = x.data()[best];
        argmax[k] = best;
      }
    }
  }
  return emit<T>({c, oh, ow}, std::move(v), tracking(x), "max_pool2d",
                 [X = x.shared_storage(), argmax = std::move(argmax)](Store<T> O) {
                   return [X, O, argmax]() {
                     if (T* gx = grad_of(X))
                       for (std::size_t k = 0; k < argmax.size(); ++k) gx[argmax[k]] += O->grad[k];
                   };
                 });
}

template <typename T>
Tensor<T> upsample_nearest2x(const Tensor<T>& x) {
  require_rank(x, 3, "upsample_nearest2x");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  std::vector<T> v(c * 4 * h * w);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < 2 * h; ++y)
      for (std::size_t xx = 0; xx < 2 * w; ++xx)
        v[(ch * 2 * h + y) * 2 * w + xx] = x.data()[(ch * h + y / 2) * w + xx / 2];
  return emit<T>({c, 2 * h, 2 * w}, std::move(v), tracking(x), "upsample_nearest2x",
                 [X = x.shared_storage(), c, h, w](Store<T> O) {
                   return [X, O, c, h, w]() {
                     if (T* gx = grad_of(X))
                       for (std::size_t ch = 0; ch < c; ++ch)
                         for (std::size_t y = 0; y < 2 * h; ++y)
                           for (std::size_t xx = 0; xx < 2 * w; ++xx)
                             gx[(ch * h + y / 2) * w + xx / 2] += O->grad[(ch * 2 * h + y) * 2 * w + xx];
                   };
                 });
}

namespace {
// Maps patch-row element (k, e) to the flat [H, W, C] index.
inline std::size_t patch_source(std::size_t k, std::size_t e, std::size_t w, std::size_t c, std::size_t p) {
  const std::size_t per_row = w / p;
  const std::size_t py = k / per_row, px = k % per_row;
  const std::size_t dy = e / (p * c), rem = e % (p * c);
  const std::size_t dx = rem / c, ch = rem % c;
  return ((py * p + dy) * w + px * p + dx) * c + ch;
}
}  // namespace

template <typename T>
Tensor<T> patchify(const Tensor<T>& x, std::size_t patch) {
  require_rank(x, 3, "patchify");
  const std::size_t h = x.dim(0), w = x.dim(1), c = x.dim(2);
  if (patch == 0 || h % patch != 0 || w % patch != 0) {
    throw ShapeError("patchify: " + shape_str(x.shape()) + " not divisible by patch " + std::to_string(patch));
  }
  const std::size_t n = (h / patch) * (w / patch), dim = patch * patch * c;
  std::vector<T> v(n * dim);
  const std::size_t per_row = w / patch;
  // Rows of a patch are contiguous runs of patch*c values in the source.
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t py = k / per_row, px = k % per_row;
    for (std::size_t dy = 0; dy < patch; ++dy) {
      const T* src = x.data() + ((py * patch + dy) * w + px * patch) * c;
      std::copy(src, src + patch * c, v.data() + k * dim + dy * patch * c);
    }
  }
  return emit<T>({n, dim}, std::move(v), tracking(x), "patchify",
                 [X = x.shared_storage(), n, dim, w, c, patch](Store<T> O) {
                   return [X, O, n, dim, w, c, patch]() {
                     T* gx = grad_of(X);
                     if (!gx) return;
                     const std::size_t per_row = w / patch;
                     for (std::size_t k = 0; k < n; ++k) {
                       const std::size_t py = k / per_row, px = k % per_row;
                       for (std::size_t dy = 0; dy < patch; ++dy) {
                         T* dst = gx + ((py * patch + dy) * w + px * patch) * c;
                         const T* src = O->grad.data() + k * dim + dy * patch * c;
                         for (std::size_t i = 0; i < patch * c; ++i) dst[i] += src[i];
                       }
                     }
                   };
                 });
}

template <typename T>
Tensor<T> unpatchify(const Tensor<T>& patches, std::size_t height, std::size_t width, std::size_t channels,
                     std::size_t patch) {
  require_rank(patches, 2, "unpatchify");
  const std::size_t n = (height / patch) * (width / patch), dim = patch * patch * channels;
  if (patches.dim(0) != n || patches.dim(1) != dim) {
    throw ShapeError("unpatchify: " + shape_str(patches.shape()) + " does not match target geometry");
  }
  std::vector<T> v(height * width * channels);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t e = 0; e < dim; ++e) v[patch_source(k, e, width, channels, patch)] = patches.data()[k * dim + e];
  return Tensor<T>::from({height, width, channels}, std::move(v));
}

template <typename T>
Tensor<T> tokens_to_map(const Tensor<T>& tokens, std::size_t h, std::size_t w) {
  require_rank(tokens, 2, "tokens_to_map");
  if (tokens.dim(0) != h * w) {
    throw ShapeError("tokens_to_map: " + std::to_string(tokens.dim(0)) + " tokens do not form a " +
                     std::to_string(h) + "x" + std::to_string(w) + " grid");
  }
  return reshape(transpose(tokens), {tokens.dim(1), h, w});
}

#define VGT_INSTANTIATE_OPS(T)                                                                        \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                         \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                         \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                         \
  template Tensor<T> scale(const Tensor<T>&, T);                                                      \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                                                 \
  template Tensor<T> exp(const Tensor<T>&);                                                           \
  template Tensor<T> log(const Tensor<T>&);                                                           \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                       \
  template Tensor<T> relu(const Tensor<T>&);                                                          \
  template Tensor<T> gelu(const Tensor<T>&);                                                          \
  template Tensor<T> sum(const Tensor<T>&);                                                           \
  template Tensor<T> mean(const Tensor<T>&);                                                          \
  template Tensor<T> mean_rows(const Tensor<T>&);                                                     \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> transpose(const Tensor<T>&);                                                     \
  template Tensor<T> add_row_bias(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                    \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                                \
  template Tensor<T> slice_rows(const Tensor<T>&, std::size_t, std::size_t);                          \
  template Tensor<T> slice_cols(const Tensor<T>&, std::size_t, std::size_t);                          \
  template Tensor<T> concat_rows(const std::vector<Tensor<T>>&);                                      \
  template Tensor<T> concat_cols(const std::vector<Tensor<T>>&);                                      \
  template Tensor<T> pick(const Tensor<T>&, const std::vector<std::size_t>&);                         \
  template Tensor<T> gather_rows(const Tensor<T>&, const std::vector<std::size_t>&);                  \
  template Tensor<T> softmax(const Tensor<T>&, std::size_t);                                          \
  template Tensor<T> log_softmax(const Tensor<T>&, std::size_t);                                      \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);             \
  template Tensor<T> normalize_rows(const Tensor<T>&, T);                                             \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t,        \
                            std::size_t);                                                             \
  template Tensor<T> conv_transpose2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,           \
                                      std::size_t);                                                   \
  template Tensor<T> max_pool2d(const Tensor<T>&, std::size_t, std::size_t);                          \
  template Tensor<T> upsample_nearest2x(const Tensor<T>&);                                            \
  template Tensor<T> patchify(const Tensor<T>&, std::size_t);                                         \
  template Tensor<T> unpatchify(const Tensor<T>&, std::size_t, std::size_t, std::size_t, std::size_t); \
  template Tensor<T> tokens_to_map(const Tensor<T>&, std::size_t, std::size_t);

VGT_INSTANTIATE_OPS(float)
VGT_INSTANTIATE_OPS(double)

#undef VGT_INSTANTIATE_OPS

}  // namespace vgt::ops
