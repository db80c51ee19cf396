#include "vgt/backbone/backbone.h"

#include <cmath>
#include <stdexcept>

#include "vgt/core/ops.h"

namespace vgt::backbone {

void EncoderConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("encoder config: " + msg); };
  if (layers == 0) fail("layers must be >= 1");
  if (heads == 0 || hidden % heads != 0) {
    fail("hidden " + std::to_string(hidden) + " not divisible by heads " + std::to_string(heads));
  }
  if (patch == 0 || height % patch != 0 || width % patch != 0) {
    fail("image " + std::to_string(height) + "x" + std::to_string(width) + " not divisible by patch " +
         std::to_string(patch));
  }
  if (grid_rows() % 2 != 0 || grid_cols() % 2 != 0) fail("patch grid must be even for the stride-32 level");
  if (mlp == 0 || channels == 0) fail("mlp and channels must be positive");
  if (!taps.empty()) {
    if (taps.size() != 4) fail("exactly four tap blocks are required");
    for (auto t : taps) {
      if (t < 1 || t > layers) fail("tap block " + std::to_string(t) + " outside 1.." + std::to_string(layers));
    }
  }
}

std::array<std::size_t, 4> EncoderConfig::tap_blocks() const {
  if (!taps.empty()) return {taps[0], taps[1], taps[2], taps[3]};
  const std::size_t l = layers;
  return {(l + 3) / 4, (l + 1) / 2, (3 * l + 3) / 4, l};
}

namespace {

std::string join(const std::string& prefix, const std::string& name) { return prefix + "." + name; }

template <typename T>
void add_linear(ParamStore<T>& store, const std::string& name, std::size_t in, std::size_t out, double stddev,
                Initializer<T>& init) {
  store.add(name + ".w", init.normal({in, out}, stddev));
  store.add(name + ".b", init.zeros({out}));
}

template <typename T>
void add_norm(ParamStore<T>& store, const std::string& name, std::size_t dim, Initializer<T>& init) {
  store.add(name + ".g", init.ones({dim}));
  store.add(name + ".b", init.zeros({dim}));
}

template <typename T>
Tensor<T> apply_linear(const Tensor<T>& x, ParamStore<T>& store, const std::string& name) {
  return ops::linear(x, store.get(name + ".w"), store.get(name + ".b"));
}

template <typename T>
Tensor<T> apply_norm(const Tensor<T>& x, ParamStore<T>& store, const std::string& name) {
  return ops::layer_norm(x, store.get(name + ".g"), store.get(name + ".b"), T(1e-6));
}

template <typename T>
Tensor<T> attention(const Tensor<T>& x, std::size_t heads, ParamStore<T>& store, const std::string& name) {
  const auto q = apply_linear(x, store, name + ".q");
  const auto k = ops::matmul(x, store.get(name + ".k.w"));  // a key bias cannot change the softmax
  const auto v = apply_linear(x, store, name + ".v");
  const std::size_t dim = x.dim(1) / heads;
  const T scale = T(1) / std::sqrt(T(dim));
  std::vector<Tensor<T>> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const auto qh = ops::slice_cols(q, h * dim, dim);
    const auto kh = ops::slice_cols(k, h * dim, dim);
    const auto vh = ops::slice_cols(v, h * dim, dim);
    const auto weights = ops::softmax(ops::scale(ops::matmul(qh, ops::transpose(kh)), scale), 1);
    outs.push_back(ops::matmul(weights, vh));
  }
  return apply_linear(heads == 1 ? outs[0] : ops::concat_cols(outs), store, name + ".o");
}

}  // namespace

template <typename T>
void init_encoder(ParamStore<T>& store, const std::string& prefix, const EncoderConfig& cfg, Initializer<T>& init) {
  cfg.validate();
  const std::size_t d = cfg.hidden;
  add_linear(store, join(prefix, "patch_embed"), cfg.patch_dim(), d, 1.0 / std::sqrt(double(cfg.patch_dim())), init);
  store.add(join(prefix, "cls"), init.normal({1, d}, 0.02));
  store.add(join(prefix, "pos_embed"), init.normal({cfg.num_patches() + 1, d}, 0.02));
  for (std::size_t b = 1; b <= cfg.layers; ++b) {
    const std::string block = join(prefix, "block" + std::to_string(b));
    add_norm(store, block + ".ln1", d, init);
    add_linear(store, block + ".attn.q", d, d, 0.02, init);
    store.add(block + ".attn.k.w", init.normal({d, d}, 0.02));
    add_linear(store, block + ".attn.v", d, d, 0.02, init);
    add_linear(store, block + ".attn.o", d, d, 0.02, init);
    add_norm(store, block + ".ln2", d, init);
    add_linear(store, block + ".mlp.fc1", d, cfg.mlp, 0.02, init);
    add_linear(store, block + ".mlp.fc2", cfg.mlp, d, 0.02, init);
  }
}

template <typename T>
std::vector<Tensor<T>> encode_stream(const Tensor<T>& patches, const EncoderConfig& cfg, ParamStore<T>& store,
                                     const std::string& prefix) {
  if (patches.rank() != 2 || patches.dim(0) != cfg.num_patches() || patches.dim(1) != cfg.patch_dim()) {
    throw ShapeError("encode_stream(" + prefix + "): expected patches [" + std::to_string(cfg.num_patches()) + "," +
                     std::to_string(cfg.patch_dim()) + "], got " + shape_str(patches.shape()));
  }
  const auto embedded = apply_linear(patches, store, join(prefix, "patch_embed"));
  auto x = ops::add(ops::concat_rows<T>({store.get(join(prefix, "cls")), embedded}), store.get(join(prefix, "pos_embed")));
  std::vector<Tensor<T>> outputs{x};
  for (std::size_t b = 1; b <= cfg.layers; ++b) {
    const std::string block = join(prefix, "block" + std::to_string(b));
    x = ops::add(x, attention(apply_norm(x, store, block + ".ln1"), cfg.heads, store, block + ".attn"));
    const auto hidden = ops::gelu(apply_linear(apply_norm(x, store, block + ".ln2"), store, block + ".mlp.fc1"));
    x = ops::add(x, apply_linear(hidden, store, block + ".mlp.fc2"));
    outputs.push_back(x);
  }
  return outputs;
}

template <typename T>
void init_adapter(ParamStore<T>& store, const std::string& prefix, const EncoderConfig& cfg) {
  const std::size_t d = cfg.hidden;
  std::vector<T> eye(d * d * 4, T(0));
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t k = 0; k < 4; ++k) eye[(c * d + c) * 4 + k] = T(1);
  }
  for (const char* name : {"s4_up1", "s4_up2", "s8_up"}) {
    const std::string base = join(prefix, std::string("adapt.") + name);
    store.add(base + ".w", Tensor<T>::from({d, d, 2, 2}, eye, true));
    store.add(base + ".b", Tensor<T>::zeros({d}, true));
  }
}

template <typename T>
FeaturePyramid<T> multiscale_adapt(const std::vector<Tensor<T>>& outputs, const EncoderConfig& cfg,
                                   ParamStore<T>& store, const std::string& prefix) {
  const auto taps = cfg.tap_blocks();
  const std::size_t h = cfg.grid_rows(), w = cfg.grid_cols();
  auto tap_map = [&](std::size_t level) {
    const auto& seq = outputs.at(taps[level]);
    if (seq.dim(0) != h * w + 1) {
      throw ShapeError("multiscale_adapt: " + std::to_string(seq.dim(0) - 1) + " tokens do not form a " +
                       std::to_string(h) + "x" + std::to_string(w) + " grid");
    }
    return ops::tokens_to_map(ops::slice_rows(seq, 1, h * w), h, w);
  };
  auto up = [&](const Tensor<T>& x, const char* name) {
    const std::string base = join(prefix, std::string("adapt.") + name);
    return ops::conv_transpose2d(x, store.get(base + ".w"), store.get(base + ".b"), 2);
  };
  FeaturePyramid<T> out;
  out[0] = up(up(tap_map(0), "s4_up1"), "s4_up2");
  out[1] = up(tap_map(1), "s8_up");
  out[2] = tap_map(2);
  out[3] = ops::max_pool2d(tap_map(3), 2, 2);
  return out;
}

template <typename T>
FeaturePyramid<T> fuse(const FeaturePyramid<T>& a, const FeaturePyramid<T>& b) {
  FeaturePyramid<T> out;
  for (std::size_t i = 0; i < 4; ++i) {
    if (a[i].shape() != b[i].shape()) {
      throw ShapeError("fuse: level " + std::to_string(i + 2) + " shapes " + shape_str(a[i].shape()) + " vs " +
                       shape_str(b[i].shape()));
    }
    out[i] = ops::add(a[i], b[i]);
  }
  return out;
}

template <typename T>
void init_fpn(ParamStore<T>& store, std::size_t in_channels, std::size_t out_channels, Initializer<T>& init) {
  for (int level = 2; level <= 5; ++level) {
    const std::string lat = "fpn.lateral" + std::to_string(level);
    const std::string smooth = "fpn.smooth" + std::to_string(level);
    store.add(lat + ".w", init.normal({out_channels, in_channels, 1, 1}, 1.0 / std::sqrt(double(in_channels))));
    store.add(lat + ".b", init.zeros({out_channels}));
    store.add(smooth + ".w", init.normal({out_channels, out_channels, 3, 3}, 1.0 / std::sqrt(9.0 * out_channels)));
    store.add(smooth + ".b", init.zeros({out_channels}));
  }
}

template <typename T>
FeaturePyramid<T> fpn_top_down(const FeaturePyramid<T>& lat) {
  FeaturePyramid<T> out;
  out[3] = lat[3];
  for (int i = 2; i >= 0; --i) out[i] = ops::add(lat[i], ops::upsample_nearest2x(out[i + 1]));
  return out;
}

template <typename T>
FeaturePyramid<T> fpn(const FeaturePyramid<T>& z, ParamStore<T>& store) {
  FeaturePyramid<T> lat;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::string name = "fpn.lateral" + std::to_string(i + 2);
    lat[i] = ops::conv2d(z[i], store.get(name + ".w"), store.get(name + ".b"), 1, 0);
  }
  auto merged = fpn_top_down(lat);
  FeaturePyramid<T> out;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::string name = "fpn.smooth" + std::to_string(i + 2);
    out[i] = ops::conv2d(merged[i], store.get(name + ".w"), store.get(name + ".b"), 1, 1);
  }
  return out;
}

#define VGT_INSTANTIATE(T)                                                                                      \
  template void init_encoder(ParamStore<T>&, const std::string&, const EncoderConfig&, Initializer<T>&);        \
  template std::vector<Tensor<T>> encode_stream(const Tensor<T>&, const EncoderConfig&, ParamStore<T>&,         \
                                                const std::string&);                                            \
  template void init_adapter(ParamStore<T>&, const std::string&, const EncoderConfig&);                          \
  template FeaturePyramid<T> multiscale_adapt(const std::vector<Tensor<T>>&, const EncoderConfig&,              \
                                              ParamStore<T>&, const std::string&);                              \
  template FeaturePyramid<T> fuse(const FeaturePyramid<T>&, const FeaturePyramid<T>&);                          \
  template void init_fpn(ParamStore<T>&, std::size_t, std::size_t, Initializer<T>&);                            \
  template FeaturePyramid<T> fpn_top_down(const FeaturePyramid<T>&);                                            \
  template FeaturePyramid<T> fpn(const FeaturePyramid<T>&, ParamStore<T>&);

VGT_INSTANTIATE(float)
VGT_INSTANTIATE(double)

}  // namespace vgt::backbone
