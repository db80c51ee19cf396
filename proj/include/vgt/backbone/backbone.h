#pragma once

#include <array>
#include <string>
#include <vector>

#include "vgt/core/param_store.h"
#include "vgt/core/tensor.h"

namespace vgt::backbone {

struct EncoderConfig {
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t hidden = 32;
  std::size_t mlp = 64;
  std::size_t patch = 16;
  std::size_t channels = 3;
  std::size_t height = 64;
  std::size_t width = 64;
  // 1-based block indices feeding strides 4, 8, 16, 32; empty selects
  // ceil(L/4), ceil(L/2), ceil(3L/4), L.
  std::vector<std::size_t> taps;

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
  std::size_t grid_rows() const { return height / patch; }
  std::size_t grid_cols() const { return width / patch; }
  std::size_t num_patches() const { return grid_rows() * grid_cols(); }
  std::size_t patch_dim() const { return patch * patch * channels; }
  std::array<std::size_t, 4> tap_blocks() const;
};

/// Registers encoder parameters under "<prefix>.": patch_embed, cls,
/// pos_embed and block<i>.{ln1,attn,ln2,mlp}.
template <typename T>
void init_encoder(ParamStore<T>& store, const std::string& prefix, const EncoderConfig& config,
                  Initializer<T>& init);

/// Projects patches [N, P*P*C] to D, prepends [CLS], adds position
/// embeddings and runs the pre-norm blocks. Returns the embedded input
/// followed by the [N+1, D] sequence after every block (L + 1 entries).
template <typename T>
std::vector<Tensor<T>> encode_stream(const Tensor<T>& patches, const EncoderConfig& config,
                                     ParamStore<T>& store, const std::string& prefix);

/// Maps at strides 4, 8, 16, 32, each [D, H/s, W/s].
template <typename T>
using FeaturePyramid = std::array<Tensor<T>, 4>;

/// Registers the learnable resamplers under "<prefix>.adapt.": two 2x2
/// stride-2 transposed convs for stride 4 and one for stride 8, all
/// initialized to nearest-neighbour upsampling.
template <typename T>
void init_adapter(ParamStore<T>& store, const std::string& prefix, const EncoderConfig& config);

/// Strips [CLS] from the tapped block outputs and resamples them to the
/// four pyramid strides.
template <typename T>
FeaturePyramid<T> multiscale_adapt(const std::vector<Tensor<T>>& block_outputs, const EncoderConfig& config,
                                   ParamStore<T>& store, const std::string& prefix);

/// Level-wise element-wise sum.
template <typename T>
FeaturePyramid<T> fuse(const FeaturePyramid<T>& a, const FeaturePyramid<T>& b);

/// Registers "fpn.lateral<i>" (1x1) and "fpn.smooth<i>" (3x3) for i = 2..5.
template <typename T>
void init_fpn(ParamStore<T>& store, std::size_t in_channels, std::size_t out_channels, Initializer<T>& init);

/// Top-down merge of lateral maps: out[3] = lat[3], out[i] = lat[i] + up2x(out[i+1]).
template <typename T>
FeaturePyramid<T> fpn_top_down(const FeaturePyramid<T>& laterals);

template <typename T>
FeaturePyramid<T> fpn(const FeaturePyramid<T>& z, ParamStore<T>& store);

}  // namespace vgt::backbone
