#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.h"
#include "vgt/backbone/vgt.h"
#include "vgt/core/autodiff.h"
#include "vgt/core/ops.h"

namespace vgt::backbone {
namespace {

using testing::max_abs_diff;
using testing::random_tensor;
using T = Tensor<double>;
using Store = ParamStore<double>;

EncoderConfig tiny_encoder() {
  EncoderConfig cfg;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.hidden = 8;
  cfg.mlp = 12;
  cfg.patch = 4;
  cfg.channels = 3;
  cfg.height = cfg.width = 16;
  return cfg;
}

/// Randomizes every parameter so no block is close to the identity.
void perturb(Store& store, std::uint64_t seed, double scale = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, scale);
  for (auto& [name, p] : store) {
    for (auto& v : p.tensor.mutable_values()) v += noise(rng);
  }
}

TEST(EncoderConfigTest, Validation) {
  EncoderConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.patch = 15;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = EncoderConfig{};
  cfg.heads = 5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = EncoderConfig{};
  cfg.taps = {1, 2, 3, 3};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(EncoderConfigTest, DefaultTaps) {
  EncoderConfig cfg;
  cfg.layers = 12;
  EXPECT_EQ(cfg.tap_blocks(), (std::array<std::size_t, 4>{3, 6, 9, 12}));
  cfg.layers = 2;
  EXPECT_EQ(cfg.tap_blocks(), (std::array<std::size_t, 4>{1, 1, 2, 2}));
  cfg.layers = 5;
  EXPECT_EQ(cfg.tap_blocks(), (std::array<std::size_t, 4>{2, 3, 4, 5}));
}

TEST(EncoderTest, ZeroResidualBranchesKeepTheInput) {
  auto cfg = tiny_encoder();
  Store store;
  Initializer<double> init(1);
  init_encoder(store, "vit", cfg, init);
  for (auto& [name, p] : store) {
    if (name.find(".attn.o.") != std::string::npos || name.find(".mlp.fc2.") != std::string::npos) {
      for (auto& v : p.tensor.mutable_values()) v = 0;
    }
  }
  std::mt19937_64 rng(2);
  auto patches = random_tensor({cfg.num_patches(), cfg.patch_dim()}, rng);
  auto outs = encode_stream(patches, cfg, store, "vit");
  ASSERT_EQ(outs.size(), cfg.layers + 1);
  for (std::size_t b = 1; b < outs.size(); ++b) EXPECT_EQ(max_abs_diff(outs[b].values(), outs[0].values()), 0.0);
}

TEST(EncoderTest, PermutingPatchesAndPositionsPermutesOutputs) {
  auto cfg = tiny_encoder();
  Store store;
  Initializer<double> init(3);
  init_encoder(store, "vit", cfg, init);
  perturb(store, 4);
  std::mt19937_64 rng(5);
  auto patches = random_tensor({cfg.num_patches(), cfg.patch_dim()}, rng);
  const std::size_t i = 2, j = 9, d = cfg.patch_dim(), h = cfg.hidden;
  auto ref = encode_stream(patches, cfg, store, "vit").back();

  auto swapped = patches.clone();
  for (std::size_t c = 0; c < d; ++c) std::swap(swapped.mutable_values()[i * d + c], swapped.mutable_values()[j * d + c]);
  auto& pos = store.get("vit.pos_embed");
  for (std::size_t c = 0; c < h; ++c) std::swap(pos.mutable_values()[(i + 1) * h + c], pos.mutable_values()[(j + 1) * h + c]);
  auto out = encode_stream(swapped, cfg, store, "vit").back();
  for (std::size_t r = 0; r <= cfg.num_patches(); ++r) {
    const std::size_t src = r == i + 1 ? j + 1 : r == j + 1 ? i + 1 : r;
    for (std::size_t c = 0; c < h; ++c) EXPECT_NEAR(out.at(r * h + c), ref.at(src * h + c), 1e-12);
  }
}

// Plain-loop re-implementation of one encoder forward pass.
namespace oracle {

using Mat = std::vector<std::vector<double>>;

Mat from_tensor(const T& t) {
  Mat m(t.dim(0), std::vector<double>(t.dim(1)));
  for (std::size_t r = 0; r < t.dim(0); ++r) {
    for (std::size_t c = 0; c < t.dim(1); ++c) m[r][c] = t.at(r * t.dim(1) + c);
  }
  return m;
}

Mat affine(const Mat& x, const T& w, const T& b) {
  const std::size_t in = w.dim(0), out = w.dim(1);
  Mat y(x.size(), std::vector<double>(out));
  for (std::size_t r = 0; r < x.size(); ++r) {
    for (std::size_t o = 0; o < out; ++o) {
      double s = b.at(o);
      for (std::size_t i = 0; i < in; ++i) s += x[r][i] * w.at(i * out + o);
      y[r][o] = s;
    }
  }
  return y;
}

Mat norm(const Mat& x, const T& g, const T& b) {
  Mat y = x;
  for (std::size_t r = 0; r < x.size(); ++r) {
    const double n = double(x[r].size());
    double mu = 0, var = 0;
    for (double v : x[r]) mu += v / n;
    for (double v : x[r]) var += (v - mu) * (v - mu) / n;
    for (std::size_t c = 0; c < x[r].size(); ++c) y[r][c] = (x[r][c] - mu) / std::sqrt(var + 1e-6) * g.at(c) + b.at(c);
  }
  return y;
}

Mat plus(Mat a, const Mat& b) {
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t c = 0; c < a[r].size(); ++c) a[r][c] += b[r][c];
  }
  return a;
}

Mat encoder(const T& patches, const EncoderConfig& cfg, Store& s, const std::string& p) {
  Mat x = affine(from_tensor(patches), s.get(p + ".patch_embed.w"), s.get(p + ".patch_embed.b"));
  x.insert(x.begin(), from_tensor(s.get(p + ".cls"))[0]);
  x = plus(x, from_tensor(s.get(p + ".pos_embed")));
  const std::size_t n = x.size(), dh = cfg.hidden / cfg.heads;
  for (std::size_t b = 1; b <= cfg.layers; ++b) {
    const std::string k = p + ".block" + std::to_string(b);
    const Mat h = norm(x, s.get(k + ".ln1.g"), s.get(k + ".ln1.b"));
    const Mat q = affine(h, s.get(k + ".attn.q.w"), s.get(k + ".attn.q.b"));
    const Mat kk = affine(h, s.get(k + ".attn.k.w"), T::zeros({cfg.hidden}));
    const Mat v = affine(h, s.get(k + ".attn.v.w"), s.get(k + ".attn.v.b"));
    Mat att(n, std::vector<double>(cfg.hidden, 0.0));
    for (std::size_t head = 0; head < cfg.heads; ++head) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> logits(n);
        double mx = -1e300;
        for (std::size_t j = 0; j < n; ++j) {
          double dot = 0;
          for (std::size_t c = 0; c < dh; ++c) dot += q[i][head * dh + c] * kk[j][head * dh + c];
          logits[j] = dot / std::sqrt(double(dh));
          mx = std::max(mx, logits[j]);
        }
        double z = 0;
        for (auto& l : logits) z += (l = std::exp(l - mx));
        for (std::size_t j = 0; j < n; ++j) {
          for (std::size_t c = 0; c < dh; ++c) att[i][head * dh + c] += logits[j] / z * v[j][head * dh + c];
        }
      }
    }
    x = plus(x, affine(att, s.get(k + ".attn.o.w"), s.get(k + ".attn.o.b")));
    Mat m = affine(norm(x, s.get(k + ".ln2.g"), s.get(k + ".ln2.b")), s.get(k + ".mlp.fc1.w"), s.get(k + ".mlp.fc1.b"));
    for (auto& row : m) {
      for (auto& v2 : row) v2 = 0.5 * v2 * (1.0 + std::erf(v2 / std::sqrt(2.0)));
    }
    x = plus(x, affine(m, s.get(k + ".mlp.fc2.w"), s.get(k + ".mlp.fc2.b")));
  }
  return x;
}

}  // namespace oracle

TEST(EncoderTest, MatchesStraightLineOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto cfg = tiny_encoder();
    Store store;
    Initializer<double> init(seed);
    init_encoder(store, "git", cfg, init);
    perturb(store, seed + 100);
    std::mt19937_64 rng(seed);
    auto patches = random_tensor({cfg.num_patches(), cfg.patch_dim()}, rng);
    auto out = encode_stream(patches, cfg, store, "git").back();
    auto ref = oracle::encoder(patches, cfg, store, "git");
    for (std::size_t r = 0; r < ref.size(); ++r) {
      for (std::size_t c = 0; c < cfg.hidden; ++c) ASSERT_NEAR(out.at(r * cfg.hidden + c), ref[r][c], 1e-8);
    }
  }
}

TEST(AdaptTest, DeskShapes) {
  EncoderConfig cfg;  // 64x64, P=16, D=32
  Store store;
  Initializer<double> init(7);
  init_encoder(store, "vit", cfg, init);
  init_adapter(store, "vit", cfg);
  std::mt19937_64 rng(8);
  auto outs = encode_stream(random_tensor({cfg.num_patches(), cfg.patch_dim()}, rng), cfg, store, "vit");
  auto pyr = multiscale_adapt(outs, cfg, store, "vit");
  const std::size_t sizes[] = {16, 8, 4, 2};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(pyr[i].shape(), (Shape{32, sizes[i], sizes[i]}));
}

TEST(AdaptTest, IdentityInitKeepsConstantMapsConstant) {
  EncoderConfig cfg;
  Store store;
  init_adapter(store, "vit", cfg);
  std::vector<double> seq(17 * 32);
  for (std::size_t r = 0; r < 17; ++r) {
    for (std::size_t c = 0; c < 32; ++c) seq[r * 32 + c] = r == 0 ? 99.0 : double(c) - 3.0;  // [CLS] differs
  }
  std::vector<T> outs(3, T::from({17, 32}, seq));
  auto pyr = multiscale_adapt(outs, cfg, store, "vit");
  for (const auto& level : pyr) {
    const std::size_t hw = level.dim(1) * level.dim(2);
    for (std::size_t c = 0; c < 32; ++c) {
      for (std::size_t p = 0; p < hw; ++p) ASSERT_EQ(level.at(c * hw + p), double(c) - 3.0);
    }
  }
}

TEST(AdaptTest, RejectsNonSquareTokenCount) {
  EncoderConfig cfg;
  Store store;
  init_adapter(store, "vit", cfg);
  std::vector<T> outs(3, T::zeros({15, 32}));
  EXPECT_THROW(multiscale_adapt(outs, cfg, store, "vit"), ShapeError);
}

FeaturePyramid<double> random_pyramid(std::mt19937_64& rng, std::size_t channels = 4) {
  FeaturePyramid<double> p;
  for (std::size_t i = 0; i < 4; ++i) p[i] = random_tensor({channels, std::size_t(16) >> i, std::size_t(16) >> i}, rng);
  return p;
}

TEST(FuseTest, AdditiveIdentityCommutativityAndOracle) {
  std::mt19937_64 rng(9);
  auto v = random_pyramid(rng);
  auto s = random_pyramid(rng);
  FeaturePyramid<double> zero;
  for (std::size_t i = 0; i < 4; ++i) zero[i] = T::zeros(v[i].shape());
  auto z0 = fuse(v, zero);
  auto ab = fuse(v, s);
  auto ba = fuse(s, v);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(max_abs_diff(z0[i].values(), v[i].values()), 0.0);
    EXPECT_EQ(max_abs_diff(ab[i].values(), ba[i].values()), 0.0);
    for (std::size_t k = 0; k < v[i].numel(); ++k) ASSERT_EQ(ab[i].at(k), v[i].at(k) + s[i].at(k));
  }
  auto bad = s;
  bad[1] = T::zeros({4, 3, 3});
  EXPECT_THROW(fuse(v, bad), ShapeError);
}

TEST(FpnTest, ZeroInputZeroOutputAndShapes) {
  Store store;
  Initializer<double> init(10);
  init_fpn(store, 4, 6, init);
  FeaturePyramid<double> z;
  for (std::size_t i = 0; i < 4; ++i) z[i] = T::zeros({4, std::size_t(16) >> i, std::size_t(16) >> i});
  auto p = fpn(z, store);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(p[i].shape(), (Shape{6, z[i].dim(1), z[i].dim(2)}));
    for (double v : p[i].values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(FpnTest, TopPixelSpreadsToTwoByTwoBlock) {
  FeaturePyramid<double> lat;
  for (std::size_t i = 0; i < 4; ++i) lat[i] = T::zeros({1, std::size_t(16) >> i, std::size_t(16) >> i});
  lat[3].mutable_values()[1 * 2 + 0] = 5.0;  // row 1, col 0 of the 2x2 top level
  auto merged = fpn_top_down(lat);
  const auto& p4 = merged[2];
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t x = 0; x < 4; ++x) {
      const bool in_block = (y == 2 || y == 3) && (x == 0 || x == 1);
      EXPECT_EQ(p4.at(y * 4 + x), in_block ? 5.0 : 0.0) << y << "," << x;
    }
  }
}

TEST(BackboneGradientTest, SumOfPyramidPassesFiniteDifferences) {
  set_finite_check(true);
  auto cfg = VgtConfig::desk(32, 20);
  cfg.grid_channels = 4;
  for (auto* enc : {&cfg.vit, &cfg.git}) {
    enc->patch = 8;
    enc->hidden = 8;
    enc->heads = 2;
    enc->mlp = 12;
  }
  cfg.git.channels = 4;
  Store store;
  init_vgt_backbone(store, cfg, 11);
  perturb(store, 12, 0.1);
  std::mt19937_64 rng(13);
  doc::Image img{32, 32, 3, {}};
  for (int i = 0; i < 32 * 32 * 3; ++i) img.pixels.push_back(std::uint8_t(rng() % 256));
  const auto image = image_tensor<double>(img);
  std::vector<doc::SubToken> tokens;
  for (int k = 0; k < 12; ++k) {
    const int x = int(rng() % 26), y = int(rng() % 28);
    tokens.push_back({4 + int(rng() % 16), {x, y, x + 6, y + 4}, std::size_t(k)});
  }
  const auto ids = grid::build_token_id_grid(tokens, 32, 32);
  // With P=8 the levels sit at strides 2..16, so take shapes from a forward pass.
  std::vector<FeaturePyramid<double>> weights(1);
  const auto probe = vgt_forward(image, ids, cfg, store);
  for (std::size_t i = 0; i < 4; ++i) weights[0][i] = random_tensor(probe[i].shape(), rng);

  auto loss_fn = [&]() {
    auto p = vgt_forward(image, ids, cfg, store);
    T total;
    for (std::size_t i = 0; i < 4; ++i) {
      auto term = ops::sum(ops::mul(p[i], weights[0][i]));
      total = i == 0 ? term : ops::add(total, term);
    }
    return total;
  };
  GradCheckOptions opt;
  opt.max_coords_per_param = 16;
  auto report = finite_difference_check<double>(loss_fn, store, opt);
  EXPECT_LT(report.max_rel_error, 1e-4) << report.worst_param << "[" << report.worst_index
                                        << "] analytic " << report.worst_analytic << " numeric "
                                        << report.worst_numeric;
  EXPECT_GT(report.coords_checked, 500u);
}

}  // namespace
}  // namespace vgt::backbone
