#include "vgt/backbone/vgt.h"

#include <stdexcept>

#include "vgt/core/ops.h"

namespace vgt::backbone {

VgtConfig VgtConfig::desk(std::size_t image_size, std::size_t vocab_size) {
  VgtConfig cfg;
  cfg.vit.height = cfg.vit.width = image_size;
  cfg.vit.channels = 3;
  cfg.git = cfg.vit;
  cfg.git.channels = cfg.grid_channels;
  cfg.vocab_size = vocab_size;
  return cfg;
}

void VgtConfig::validate() const {
  if (!use_vision && !use_grid) throw std::invalid_argument("model config: at least one stream must be enabled");
  vit.validate();
  git.validate();
  if (vit.channels != 3) throw std::invalid_argument("model config: image stream expects 3 channels");
  if (git.channels != grid_channels) {
    throw std::invalid_argument("model config: grid stream channels " + std::to_string(git.channels) +
                                " != grid embedding width " + std::to_string(grid_channels));
  }
  if (vit.hidden != git.hidden || vit.height != git.height || vit.width != git.width || vit.patch != git.patch) {
    throw std::invalid_argument("model config: streams must share width, image size and patch size");
  }
  if (vocab_size <= 4) throw std::invalid_argument("model config: vocab too small");
}

template <typename T>
void init_vgt_backbone(ParamStore<T>& store, const VgtConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.use_vision) {
    Initializer<T> init(seed * 4 + 1);
    init_encoder(store, "vit", cfg.vit, init);
    init_adapter(store, "vit", cfg.vit);
  }
  if (cfg.use_grid) {
    Initializer<T> init(seed * 4 + 2);
    store.add("git.grid_embed", init.normal({cfg.vocab_size, cfg.grid_channels}, 0.02));
    init_encoder(store, "git", cfg.git, init);
    init_adapter(store, "git", cfg.git);
  }
  Initializer<T> init(seed * 4 + 3);
  init_fpn(store, cfg.vit.hidden, cfg.pyramid_channels(), init);
}

template <typename T>
Tensor<T> image_tensor(const doc::Image& image) {
  if (image.channels != 3) throw ShapeError("image_tensor: expected 3 channels");
  std::vector<T> v(image.pixels.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = T(image.pixels[i]) / T(127.5) - T(1);
  return Tensor<T>::from({image.height, image.width, 3}, std::move(v));
}

template <typename T>
FeaturePyramid<T> vision_pyramid(const Tensor<T>& image, const VgtConfig& cfg, ParamStore<T>& store) {
  const auto blocks = encode_stream(ops::patchify(image, cfg.vit.patch), cfg.vit, store, "vit");
  return multiscale_adapt(blocks, cfg.vit, store, "vit");
}

template <typename T>
FeaturePyramid<T> grid_pyramid(const grid::TokenIdGrid& ids, const VgtConfig& cfg, ParamStore<T>& store) {
  if (ids.height != cfg.git.height || ids.width != cfg.git.width) {
    throw ShapeError("grid_pyramid: grid " + std::to_string(ids.height) + "x" + std::to_string(ids.width) +
                     " does not match model input " + std::to_string(cfg.git.height) + "x" +
                     std::to_string(cfg.git.width));
  }
  const auto grid = grid::embed_grid(ids, store.get("git.grid_embed"));
  const auto blocks = encode_stream(ops::patchify(grid, cfg.git.patch), cfg.git, store, "git");
  return multiscale_adapt(blocks, cfg.git, store, "git");
}

template <typename T>
FeaturePyramid<T> vgt_forward(const Tensor<T>& image, const grid::TokenIdGrid& ids, const VgtConfig& cfg,
                              ParamStore<T>& store) {
  FeaturePyramid<T> z;
  if (cfg.use_vision && cfg.use_grid) {
    z = fuse(vision_pyramid(image, cfg, store), grid_pyramid(ids, cfg, store));
  } else if (cfg.use_vision) {
    z = vision_pyramid(image, cfg, store);
  } else {
    z = grid_pyramid(ids, cfg, store);
  }
  return fpn(z, store);
}

#define VGT_INSTANTIATE(T)                                                                                   \
  template void init_vgt_backbone(ParamStore<T>&, const VgtConfig&, std::uint64_t);                          \
  template Tensor<T> image_tensor<T>(const doc::Image&);                                                     \
  template FeaturePyramid<T> vision_pyramid(const Tensor<T>&, const VgtConfig&, ParamStore<T>&);             \
  template FeaturePyramid<T> grid_pyramid(const grid::TokenIdGrid&, const VgtConfig&, ParamStore<T>&);       \
  template FeaturePyramid<T> vgt_forward(const Tensor<T>&, const grid::TokenIdGrid&, const VgtConfig&,       \
                                         ParamStore<T>&);

VGT_INSTANTIATE(float)
VGT_INSTANTIATE(double)

}  // namespace vgt::backbone
