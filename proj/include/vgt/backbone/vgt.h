#pragma once

#include <cstdint>

#include "vgt/backbone/backbone.h"
#include "vgt/doc/types.h"
#include "vgt/grid/grid.h"

namespace vgt::backbone {

/// Two-stream backbone: ViT over the page image, GiT over the token grid,
/// summed level by level and refined by an FPN.
struct VgtConfig {
  EncoderConfig vit;
  EncoderConfig git;
  std::size_t vocab_size = 64;
  std::size_t grid_channels = 64;
  std::size_t fpn_channels = 0;  // 0 selects the encoder width
  bool use_vision = true;
  bool use_grid = true;

  /// Desk defaults for a square image of the given size; the GiT input
  /// channel count follows grid_channels.
  static VgtConfig desk(std::size_t image_size = 64, std::size_t vocab_size = 64);
  void validate() const;
  std::size_t pyramid_channels() const { return fpn_channels ? fpn_channels : vit.hidden; }
};

/// Registers "vit." (when used), "git." (when used, including
/// git.grid_embed) and "fpn." parameters. Each stream draws from its own
/// seed stream so enabling one does not perturb the other.
template <typename T>
void init_vgt_backbone(ParamStore<T>& store, const VgtConfig& config, std::uint64_t seed);

/// 8-bit raster [H, W, 3] scaled to [-1, 1].
template <typename T>
Tensor<T> image_tensor(const doc::Image& image);

template <typename T>
FeaturePyramid<T> vision_pyramid(const Tensor<T>& image, const VgtConfig& config, ParamStore<T>& store);

template <typename T>
FeaturePyramid<T> grid_pyramid(const grid::TokenIdGrid& ids, const VgtConfig& config, ParamStore<T>& store);

/// Fused and FPN-refined pyramid from whichever streams are enabled.
template <typename T>
FeaturePyramid<T> vgt_forward(const Tensor<T>& image, const grid::TokenIdGrid& ids, const VgtConfig& config,
                              ParamStore<T>& store);

}  // namespace vgt::backbone
