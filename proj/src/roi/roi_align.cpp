#include "vgt/roi/roi_align.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "vgt/core/ops.h"

namespace vgt::roi {

namespace {

struct Tap {
  std::size_t index;
  double weight;
};

/// Up to four (cell, weight) pairs of one bilinear read; empty when the
/// point falls outside the sampling margin.
std::size_t bilinear_taps(std::size_t height, std::size_t width, double y, double x, std::array<Tap, 4>& taps) {
  if (y < -1.0 || y > double(height) || x < -1.0 || x > double(width)) return 0;
  y = std::max(y, 0.0);
  x = std::max(x, 0.0);
  auto y0 = static_cast<std::size_t>(y);
  auto x0 = static_cast<std::size_t>(x);
  std::size_t y1, x1;
  if (y0 >= height - 1) {
    y0 = y1 = height - 1;
    y = double(y0);
  } else {
    y1 = y0 + 1;
  }
  if (x0 >= width - 1) {
    x0 = x1 = width - 1;
    x = double(x0);
  } else {
    x1 = x0 + 1;
  }
  const double ly = y - double(y0), lx = x - double(x0);
  const double hy = 1.0 - ly, hx = 1.0 - lx;
  taps[0] = {y0 * width + x0, hy * hx};
  taps[1] = {y0 * width + x1, hy * lx};
  taps[2] = {y1 * width + x0, ly * hx};
  taps[3] = {y1 * width + x1, ly * lx};
  return 4;
}

constexpr std::size_t kSamples = 2;

}  // namespace

template <typename T>
T bilinear_sample(const T* plane, std::size_t height, std::size_t width, double y, double x) {
  std::array<Tap, 4> taps;
  const std::size_t n = bilinear_taps(height, width, y, x, taps);
  double v = 0.0;
  for (std::size_t i = 0; i < n; ++i) v += taps[i].weight * double(plane[taps[i].index]);
  return T(v);
}

template <typename T>
Tensor<T> roi_align(const Tensor<T>& featmap, const std::vector<RoIBox>& boxes, double stride, std::size_t out) {
  if (featmap.rank() != 3) throw ShapeError("roi_align: featmap must be [C,H,W], got " + shape_str(featmap.shape()));
  if (out == 0 || stride <= 0) throw std::invalid_argument("roi_align: output size and stride must be positive");
  const std::size_t c = featmap.dim(0), h = featmap.dim(1), w = featmap.dim(2), plane = h * w;
  const std::size_t bins = out * out;

  // Per (box, bin): the taps of all its samples, weights already divided by
  // the sample count.
  std::vector<std::vector<Tap>> bin_taps(boxes.size() * bins);
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    const RoIBox& b = boxes[k];
    if (!(b.x1 > b.x0 && b.y1 > b.y0)) {
      throw std::invalid_argument("roi_align: degenerate box (" + std::to_string(b.x0) + "," + std::to_string(b.y0) +
                                  "," + std::to_string(b.x1) + "," + std::to_string(b.y1) + ")");
    }
    const double sx = b.x0 / stride - 0.5, sy = b.y0 / stride - 0.5;
    const double bw = (b.x1 - b.x0) / stride / double(out);
    const double bh = (b.y1 - b.y0) / stride / double(out);
    for (std::size_t py = 0; py < out; ++py) {
      for (std::size_t px = 0; px < out; ++px) {
        auto& list = bin_taps[k * bins + py * out + px];
        for (std::size_t iy = 0; iy < kSamples; ++iy) {
          const double y = sy + (double(py) + (double(iy) + 0.5) / kSamples) * bh;
          for (std::size_t ix = 0; ix < kSamples; ++ix) {
            const double x = sx + (double(px) + (double(ix) + 0.5) / kSamples) * bw;
            std::array<Tap, 4> taps;
            const std::size_t n = bilinear_taps(h, w, y, x, taps);
            for (std::size_t t = 0; t < n; ++t) {
              list.push_back({taps[t].index, taps[t].weight / double(kSamples * kSamples)});
            }
          }
        }
      }
    }
  }

  std::vector<T> values(boxes.size() * c * bins, T(0));
  const T* f = featmap.data();
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T* src = f + ch * plane;
      T* dst = values.data() + (k * c + ch) * bins;
      for (std::size_t bin = 0; bin < bins; ++bin) {
        double acc = 0.0;
        for (const Tap& t : bin_taps[k * bins + bin]) acc += t.weight * double(src[t.index]);
        dst[bin] = T(acc);
      }
    }
  }

  const bool track = active_tape<T>() != nullptr && featmap.requires_grad();
  auto result = Tensor<T>::from({boxes.size(), c, out, out}, std::move(values), track);
  check_finite(result, "roi_align");
  if (track) {
    active_tape<T>()->record(result, [F = featmap.shared_storage(), O = result.shared_storage(),
                                      taps = std::move(bin_taps), c, plane, bins]() {
      F->ensure_grad();
      const std::size_t boxes = O->shape[0];
      for (std::size_t k = 0; k < boxes; ++k) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          T* g = F->grad.data() + ch * plane;
          const T* go = O->grad.data() + (k * c + ch) * bins;
          for (std::size_t bin = 0; bin < bins; ++bin) {
            for (const Tap& t : taps[k * bins + bin]) g[t.index] += T(t.weight) * go[bin];
          }
        }
      }
    });
  }
  return result;
}

template <typename T>
Tensor<T> roi_align_pooled(const Tensor<T>& featmap, const std::vector<RoIBox>& boxes, double stride,
                           std::size_t out) {
  const std::size_t c = featmap.dim(0);
  const auto aligned = roi_align(featmap, boxes, stride, out);
  return ops::reshape(ops::mean_rows(ops::reshape(aligned, {boxes.size() * c, out * out})), {boxes.size(), c});
}

int assign_fpn_level(const RoIBox& box, double image_size) {
  const double canonical = image_size / 4.0;
  const double side = std::sqrt(std::max(box.area(), 1e-12));
  const int level = static_cast<int>(std::floor(4.0 + std::log2(side / canonical) + 1e-9));
  return std::clamp(level, 2, 5);
}

#define VGT_INSTANTIATE(T)                                                                                     \
  template T bilinear_sample(const T*, std::size_t, std::size_t, double, double);                              \
  template Tensor<T> roi_align(const Tensor<T>&, const std::vector<RoIBox>&, double, std::size_t);             \
  template Tensor<T> roi_align_pooled(const Tensor<T>&, const std::vector<RoIBox>&, double, std::size_t);

VGT_INSTANTIATE(float)
VGT_INSTANTIATE(double)

}  // namespace vgt::roi
