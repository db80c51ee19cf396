#include <gtest/gtest.h>

#include <random>

#include "roi_oracle.h"
#include "test_util.h"
#include "vgt/core/autodiff.h"
#include "vgt/core/ops.h"
#include "vgt/roi/roi_align.h"

namespace vgt::roi {
namespace {

using testing::random_tensor;
using T = Tensor<double>;

std::vector<double> plane_of(const T& map, std::size_t ch) {
  const std::size_t plane = map.dim(1) * map.dim(2);
  return {map.values().begin() + long(ch * plane), map.values().begin() + long((ch + 1) * plane)};
}

RoIBox random_box(std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> u(0.0, extent);
  double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
  if (std::abs(a - b) < 0.5) b = a + 0.5;
  if (std::abs(c - d) < 0.5) d = c + 0.5;
  return {std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)};
}

TEST(RoiAlignTest, ConstantMapGivesConstantBins) {
  auto map = T::full({3, 6, 7}, 5.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    auto out = roi_align(map, {random_box(rng, 24.0)}, 4.0, 3);
    for (double v : out.values()) EXPECT_NEAR(v, 5.0, 1e-12);
  }
}

TEST(RoiAlignTest, TwoByTwoFullBoxMatchesDenseOracle) {
  auto map = T::from({1, 2, 2}, {0, 1, 2, 3});
  auto out = roi_align(map, {{0, 0, 8, 8}}, 4.0, 1);
  testing::DenseField field({0, 1, 2, 3}, 2, 2);
  const auto ref = testing::dense_roi(field, 0, 0, 8, 8, 4.0, 1);
  EXPECT_NEAR(out.at(0), ref[0], 1e-3);
  EXPECT_NEAR(out.at(0), 1.5, 1e-12);
}

TEST(RoiAlignTest, RandomPairsMatchDenseOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t h = 3 + rng() % 6, w = 3 + rng() % 6;
    const double stride = double(1 << (rng() % 3 + 1));
    auto map = random_tensor({2, h, w}, rng);
    const auto box = random_box(rng, stride * double(std::max(h, w)));
    const std::size_t n = trial % 2 ? 3 : 7;
    auto out = roi_align(map, {box}, stride, n);
    for (std::size_t ch = 0; ch < 2; ++ch) {
      testing::DenseField field(plane_of(map, ch), int(h), int(w));
      const auto ref = testing::dense_roi(field, box.x0, box.y0, box.x1, box.y1, stride, int(n));
      for (std::size_t bin = 0; bin < n * n; ++bin) ASSERT_NEAR(out.at(ch * n * n + bin), ref[bin], 1e-3);
    }
  }
}

TEST(RoiAlignTest, FarOutsideBoxReadsZero) {
  auto map = T::full({1, 4, 4}, 2.0);
  auto out = roi_align(map, {{100, 100, 120, 120}}, 4.0, 2);
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(RoiAlignTest, DegenerateBoxIsAnError) {
  auto map = T::zeros({1, 4, 4});
  EXPECT_THROW(roi_align(map, {{3, 3, 3, 8}}, 4.0, 2), std::invalid_argument);
}

TEST(RoiAlignTest, GradientPassesFiniteDifferences) {
  set_finite_check(true);
  std::mt19937_64 rng(3);
  ParamStore<double> store;
  auto& map = store.add("map", random_tensor({2, 5, 6}, rng));
  std::vector<RoIBox> boxes;
  for (int i = 0; i < 4; ++i) boxes.push_back(random_box(rng, 22.0));
  auto weights = random_tensor({4, 2, 3, 3}, rng);
  auto f = [&]() { return ops::sum(ops::mul(roi_align(map, boxes, 4.0, 3), weights)); };
  GradCheckOptions opt;
  opt.max_coords_per_param = 1000;
  auto report = finite_difference_check<double>(f, store, opt);
  EXPECT_LT(report.max_rel_error, 1e-5) << report.worst_param << "[" << report.worst_index << "]";
  EXPECT_EQ(report.coords_checked, 60u);
}

TEST(RoiAlignTest, PooledIsBinMean) {
  std::mt19937_64 rng(4);
  auto map = random_tensor({3, 5, 5}, rng);
  std::vector<RoIBox> boxes = {{1, 2, 9, 7}, {0, 0, 20, 20}};
  auto full = roi_align(map, boxes, 4.0, 3);
  auto pooled = roi_align_pooled(map, boxes, 4.0, 3);
  EXPECT_EQ(pooled.shape(), (Shape{2, 3}));
  for (std::size_t k = 0; k < 6; ++k) {
    double m = 0;
    for (std::size_t b = 0; b < 9; ++b) m += full.at(k * 9 + b) / 9.0;
    EXPECT_NEAR(pooled.at(k), m, 1e-12);
  }
}

TEST(RoiAlignTest, Linearity) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = random_tensor({2, 6, 6}, rng);
    auto g = random_tensor({2, 6, 6}, rng);
    std::vector<RoIBox> boxes = {random_box(rng, 24.0), random_box(rng, 24.0)};
    const double a = 2.5;
    auto rf = roi_align(f, boxes, 4.0, 3);
    auto rg = roi_align(g, boxes, 4.0, 3);
    auto rsum = roi_align(ops::add(f, g), boxes, 4.0, 3);
    auto rscaled = roi_align(ops::scale(f, a), boxes, 4.0, 3);
    for (std::size_t i = 0; i < rf.numel(); ++i) {
      ASSERT_NEAR(rsum.at(i), rf.at(i) + rg.at(i), 1e-12);
      ASSERT_NEAR(rscaled.at(i), a * rf.at(i), 1e-12);
    }
  }
}

TEST(RoiAlignTest, TranslationEquivariance) {
  std::mt19937_64 rng(6);
  const double stride = 4.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto f = random_tensor({2, 10, 10}, rng);
    // Content moved one cell right and down; the vacated edge is irrelevant
    // because boxes stay well inside.
    auto shifted = T::zeros({2, 10, 10});
    for (std::size_t c = 0; c < 2; ++c) {
      for (std::size_t y = 1; y < 10; ++y) {
        for (std::size_t x = 1; x < 10; ++x) shifted.mutable_values()[c * 100 + y * 10 + x] = f.at(c * 100 + (y - 1) * 10 + x - 1);
      }
    }
    std::uniform_real_distribution<double> u(4.0, 14.0);
    const double x0 = u(rng), y0 = u(rng);
    const RoIBox box{x0, y0, x0 + u(rng), y0 + u(rng)};
    const RoIBox moved{box.x0 + stride, box.y0 + stride, box.x1 + stride, box.y1 + stride};
    auto a = roi_align(f, {box}, stride, 3);
    auto b = roi_align(shifted, {moved}, stride, 3);
    for (std::size_t i = 0; i < a.numel(); ++i) ASSERT_NEAR(a.at(i), b.at(i), 1e-12);
  }
}

TEST(AssignLevelTest, CanonicalTinyAndWhole) {
  const double img = 64.0;
  EXPECT_EQ(assign_fpn_level({0, 0, 16, 16}, img), 4);
  EXPECT_EQ(assign_fpn_level({0, 0, 1, 1}, img), 2);
  EXPECT_EQ(assign_fpn_level({0, 0, 64, 64}, img), 5);
  EXPECT_EQ(assign_fpn_level({0, 0, 8, 8}, img), 3);
  EXPECT_EQ(assign_fpn_level({0, 0, 224, 224}, 896.0), 4);
}

}  // namespace
}  // namespace vgt::roi
