#include <gtest/gtest.h>

#include <cmath>

#include "test_util.h"
#include "vgt/core/ops.h"

namespace vgt {
namespace {

using testing::max_abs_diff;
using testing::random_tensor;
using T = Tensor<double>;

TEST(MatmulTest, IdentityCases) {
  auto a = T::from({2, 2}, {1, 2, 3, 4});
  auto eye = T::from({2, 2}, {1, 0, 0, 1});
  auto c = ops::matmul(a, eye);
  EXPECT_EQ(std::vector<double>(c.values().begin(), c.values().end()), (std::vector<double>{1, 2, 3, 4}));

  auto col = T::from({2, 1}, {5, 7});
  auto d = ops::matmul(eye, col);
  EXPECT_EQ(d.shape(), (Shape{2, 1}));
  EXPECT_EQ(d.at(0), 5);
  EXPECT_EQ(d.at(1), 7);
}

TEST(MatmulTest, MatchesTripleLoopOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_tensor({3, 4}, rng);
    auto b = random_tensor({4, 2}, rng);
    auto c = ops::matmul(a, b);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        double s = 0;
        for (std::size_t k = 0; k < 4; ++k) s += a.at(i * 4 + k) * b.at(k * 2 + j);
        EXPECT_NEAR(c.at(i * 2 + j), s, 1e-12);
      }
    }
  }
}

TEST(MatmulTest, ShapeMismatchNamesBothShapes) {
  auto a = T::zeros({2, 3});
  auto b = T::zeros({2, 3});
  try {
    ops::matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2,3] x [2,3]"), std::string::npos) << msg;
  }
}

TEST(SoftmaxTest, SymmetricPair) {
  auto y = ops::softmax(T::from({2}, {0, 0}), 0);
  EXPECT_DOUBLE_EQ(y.at(0), 0.5);
  EXPECT_DOUBLE_EQ(y.at(1), 0.5);
}

TEST(SoftmaxTest, LargeLogitsDoNotOverflow) {
  auto y = ops::softmax(T::from({2}, {1000, 0}), 0);
  EXPECT_NEAR(y.at(0), 1.0, 1e-12);
  EXPECT_NEAR(y.at(1), 0.0, 1e-12);
  EXPECT_TRUE(std::isfinite(y.at(0)));
}

TEST(SoftmaxTest, MatchesDirectFormula) {
  auto y = ops::softmax(T::from({3}, {1, 2, 3}), 0);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(y.at(i), std::exp(i + 1.0) / z, 1e-12);
}

TEST(SoftmaxTest, RowsSumToOneOnEveryAxis) {
  std::mt19937_64 rng(3);
  auto x = random_tensor({3, 4, 5}, rng, -5, 5);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    auto y = ops::softmax(x, axis);
    const auto& s = x.shape();
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < 3; ++i) inner *= s[i];
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t r = 0; r < inner; ++r) {
        double total = 0;
        for (std::size_t i = 0; i < s[axis]; ++i) {
          const double v = y.at((o * s[axis] + i) * inner + r);
          EXPECT_GT(v, 0.0);
          EXPECT_LT(v, 1.0);
          total += v;
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
      }
    }
  }
}

TEST(LayerNormTest, ConstantRowGoesToZero) {
  auto y = ops::layer_norm(T::full({1, 4}, 3.0), T::full({4}, 1.0), T::zeros({4}), 1e-5);
  for (double v : y.values()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(LayerNormTest, TwoPointStandardization) {
  auto y = ops::layer_norm(T::from({1, 2}, {1, 3}), T::full({2}, 1.0), T::zeros({2}), 0.0);
  EXPECT_DOUBLE_EQ(y.at(0), -1.0);
  EXPECT_DOUBLE_EQ(y.at(1), 1.0);
}

TEST(LayerNormTest, MatchesMeanVarianceOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = random_tensor({3, 7}, rng, -4, 4);
    auto g = random_tensor({7}, rng);
    auto b = random_tensor({7}, rng);
    auto y = ops::layer_norm(x, g, b, 1e-5);
    for (std::size_t r = 0; r < 3; ++r) {
      double mu = 0, var = 0;
      for (std::size_t i = 0; i < 7; ++i) mu += x.at(r * 7 + i) / 7.0;
      for (std::size_t i = 0; i < 7; ++i) var += (x.at(r * 7 + i) - mu) * (x.at(r * 7 + i) - mu) / 7.0;
      for (std::size_t i = 0; i < 7; ++i) {
        const double expect = (x.at(r * 7 + i) - mu) / std::sqrt(var + 1e-5) * g.at(i) + b.at(i);
        EXPECT_NEAR(y.at(r * 7 + i), expect, 1e-10);
      }
    }
    // beta = 0: standardized rows are centered.
    auto z = ops::layer_norm(x, T::full({7}, 1.0), T::zeros({7}), 1e-5);
    for (std::size_t r = 0; r < 3; ++r) {
      double m = 0;
      for (std::size_t i = 0; i < 7; ++i) m += z.at(r * 7 + i);
      EXPECT_LT(std::abs(m / 7.0), 1e-7);
    }
  }
}

TEST(ConvTest, UnitPointwiseKernelIsIdentity) {
  std::mt19937_64 rng(1);
  auto x = random_tensor({1, 5, 6}, rng);
  auto w = T::full({1, 1, 1, 1}, 1.0);
  auto y = ops::conv2d(x, w, T(), 1, 0);
  EXPECT_EQ(y.shape(), x.shape());
  EXPECT_EQ(max_abs_diff(y.values(), x.values()), 0.0);
}

// Direct definition of strided, zero-padded cross-correlation.
T conv_loop_oracle(const T& x, const T& w, const T& b, std::size_t stride, std::size_t pad) {
  const std::size_t c = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t o = w.dim(0), k = w.dim(2);
  const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (wd + 2 * pad - k) / stride + 1;
  auto out = T::zeros({o, oh, ow});
  auto v = out.mutable_values();
  for (std::size_t oc = 0; oc < o; ++oc)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t xx = 0; xx < ow; ++xx) {
        double s = b.defined() ? b.at(oc) : 0.0;
        for (std::size_t ic = 0; ic < c; ++ic)
          for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
              const long iy = static_cast<long>(y * stride + ky) - static_cast<long>(pad);
              const long ix = static_cast<long>(xx * stride + kx) - static_cast<long>(pad);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(wd)) continue;
              s += x.at((ic * h + iy) * wd + ix) * w.at(((oc * c + ic) * k + ky) * k + kx);
            }
        v[(oc * oh + y) * ow + xx] = s;
      }
  return out;
}

TEST(ConvTest, MatchesLoopOracle) {
  std::mt19937_64 rng(7);
  auto x = random_tensor({1, 8, 8}, rng);
  auto w = random_tensor({1, 1, 3, 3}, rng);
  auto y = ops::conv2d(x, w, T(), 1, 0);
  EXPECT_LE(max_abs_diff(y.values(), conv_loop_oracle(x, w, T(), 1, 0).values()), 1e-10);

  for (std::size_t stride : {1, 2}) {
    for (std::size_t pad : {0, 1}) {
      auto xm = random_tensor({3, 8, 7}, rng);
      auto wm = random_tensor({4, 3, 3, 3}, rng);
      auto bm = random_tensor({4}, rng);
      auto ym = ops::conv2d(xm, wm, bm, stride, pad);
      auto ref = conv_loop_oracle(xm, wm, bm, stride, pad);
      ASSERT_EQ(ym.shape(), ref.shape());
      EXPECT_LE(max_abs_diff(ym.values(), ref.values()), 1e-10);
    }
  }
}

TEST(ConvTest, TransposedConvMatchesScatterOracle) {
  std::mt19937_64 rng(9);
  auto x = random_tensor({3, 4, 5}, rng);
  auto w = random_tensor({3, 2, 2, 2}, rng);
  auto b = random_tensor({2}, rng);
  auto y = ops::conv_transpose2d(x, w, b, 2);
  ASSERT_EQ(y.shape(), (Shape{2, 8, 10}));
  std::vector<double> ref(2 * 8 * 10);
  for (std::size_t o = 0; o < 2; ++o)
    for (std::size_t p = 0; p < 80; ++p) ref[o * 80 + p] = b.at(o);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t o = 0; o < 2; ++o)
          for (std::size_t ky = 0; ky < 2; ++ky)
            for (std::size_t kx = 0; kx < 2; ++kx)
              ref[(o * 8 + i * 2 + ky) * 10 + j * 2 + kx] +=
                  x.at((c * 4 + i) * 5 + j) * w.at(((c * 2 + o) * 2 + ky) * 2 + kx);
  EXPECT_LE(max_abs_diff(y.values(), ref), 1e-12);
}

TEST(PoolTest, MaxOfFour) {
  auto y = ops::max_pool2d(T::from({1, 2, 2}, {1, 2, 3, 4}), 2, 2);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 1}));
  EXPECT_EQ(y.at(0), 4);
}

TEST(PoolTest, UpsampleNearestRepeatsBlocks) {
  auto y = ops::upsample_nearest2x(T::from({1, 1, 2}, {1, 2}));
  EXPECT_EQ(y.shape(), (Shape{1, 2, 4}));
  EXPECT_EQ(std::vector<double>(y.values().begin(), y.values().end()),
            (std::vector<double>{1, 1, 2, 2, 1, 1, 2, 2}));
}

TEST(PatchifyTest, PatchCountsFollowImageArea) {
  auto small = ops::patchify(T::zeros({64, 64, 3}), 16);
  EXPECT_EQ(small.shape(), (Shape{16, 768}));
  auto large = ops::patchify(T::zeros({768, 768, 3}), 16);
  EXPECT_EQ(large.shape(), (Shape{2304, 768}));
}

TEST(PatchifyTest, RowMajorLayoutAndInverse) {
  std::mt19937_64 rng(2);
  auto x = random_tensor({8, 12, 2}, rng);
  auto p = ops::patchify(x, 4);
  ASSERT_EQ(p.shape(), (Shape{6, 32}));
  // patch 4 is row 1, column 1; element (dy=2, dx=3, c=1)
  EXPECT_EQ(p.at(4 * 32 + (2 * 4 + 3) * 2 + 1), x.at(((4 + 2) * 12 + 4 + 3) * 2 + 1));
  auto back = ops::unpatchify(p, 8, 12, 2, 4);
  EXPECT_EQ(max_abs_diff(back.values(), x.values()), 0.0);
  EXPECT_THROW(ops::patchify(x, 5), ShapeError);
}

TEST(TokensToMapTest, ChannelMajorLayout) {
  auto tok = T::from({4, 2}, {0, 10, 1, 11, 2, 12, 3, 13});
  auto m = ops::tokens_to_map(tok, 2, 2);
  EXPECT_EQ(m.shape(), (Shape{2, 2, 2}));
  EXPECT_EQ(std::vector<double>(m.values().begin(), m.values().end()),
            (std::vector<double>{0, 1, 2, 3, 10, 11, 12, 13}));
  EXPECT_THROW(ops::tokens_to_map(tok, 3, 2), ShapeError);
}

TEST(FiniteCheckTest, NonFiniteOutputIsReported) {
  set_finite_check(true);
  EXPECT_THROW(ops::log(T::from({1}, {-1.0})), NumericError);
}

}  // namespace
}  // namespace vgt
