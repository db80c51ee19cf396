#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

// Independent RoIAlign reference: the feature plane is first expanded into a
// dense field sampled 100x finer than the map, each dense point evaluated with
// a tent-kernel formula; sample points are then read back from the dense field.

namespace vgt::testing {

class DenseField {
 public:
  static constexpr int kDensity = 100;

  DenseField(const std::vector<double>& plane, int height, int width) : h_(height), w_(width) {
    // Covers feature coordinates [-1, H] x [-1, W].
    rows_ = (h_ + 1) * kDensity + 1;
    cols_ = (w_ + 1) * kDensity + 1;
    field_.resize(std::size_t(rows_) * std::size_t(cols_));
    for (int r = 0; r < rows_; ++r) {
      const double y = std::clamp(-1.0 + double(r) / kDensity, 0.0, double(h_ - 1));
      for (int c = 0; c < cols_; ++c) {
        const double x = std::clamp(-1.0 + double(c) / kDensity, 0.0, double(w_ - 1));
        double v = 0.0;
        for (int i = 0; i < h_; ++i) {
          const double ty = std::max(0.0, 1.0 - std::abs(y - i));
          if (ty == 0.0) continue;
          for (int j = 0; j < w_; ++j) v += plane[std::size_t(i * w_ + j)] * ty * std::max(0.0, 1.0 - std::abs(x - j));
        }
        field_[std::size_t(r) * std::size_t(cols_) + std::size_t(c)] = v;
      }
    }
  }

  double read(double y, double x) const {
    if (y < -1.0 || y > double(h_) || x < -1.0 || x > double(w_)) return 0.0;
    const double fr = (y + 1.0) * kDensity, fc = (x + 1.0) * kDensity;
    const int r0 = std::min(int(std::floor(fr)), rows_ - 2), c0 = std::min(int(std::floor(fc)), cols_ - 2);
    const double ar = fr - r0, ac = fc - c0;
    auto at = [&](int r, int c) { return field_[std::size_t(r) * std::size_t(cols_) + std::size_t(c)]; };
    return (1 - ar) * ((1 - ac) * at(r0, c0) + ac * at(r0, c0 + 1)) + ar * ((1 - ac) * at(r0 + 1, c0) + ac * at(r0 + 1, c0 + 1));
  }

 private:
  int h_, w_, rows_ = 0, cols_ = 0;
  std::vector<double> field_;
};

/// n x n bin averages of 2x2 samples for one box in image pixels.
inline std::vector<double> dense_roi(const DenseField& field, double x0, double y0, double x1, double y1,
                                     double stride, int n) {
  std::vector<double> out(std::size_t(n * n));
  const double bw = (x1 - x0) / stride / n, bh = (y1 - y0) / stride / n;
  for (int py = 0; py < n; ++py) {
    for (int px = 0; px < n; ++px) {
      double acc = 0;
      for (double fy : {0.25, 0.75}) {
        for (double fx : {0.25, 0.75}) {
          acc += field.read(y0 / stride - 0.5 + (py + fy) * bh, x0 / stride - 0.5 + (px + fx) * bw);
        }
      }
      out[std::size_t(py * n + px)] = acc / 4.0;
    }
  }
  return out;
}

}  // namespace vgt::testing
