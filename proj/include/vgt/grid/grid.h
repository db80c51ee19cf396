#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "vgt/core/tensor.h"
#include "vgt/doc/types.h"
#include "vgt/doc/vocab.h"

namespace vgt::grid {

/// H x W token ids, row-major. Cells outside every token box hold [PAD].
struct TokenIdGrid {
  std::size_t height = 0, width = 0;
  std::vector<int> ids;

  int at(std::size_t row, std::size_t col) const { return ids[row * width + col]; }
};

/// Paints each token box (half-open) with its id in document order, so a
/// later token overwrites an earlier one where boxes overlap.
TokenIdGrid build_token_id_grid(const std::vector<doc::SubToken>& tokens, std::size_t height, std::size_t width);
TokenIdGrid build_token_id_grid(const doc::DocPage& page, std::size_t height, std::size_t width);

/// Looks up every cell in table[vocab, C] and returns [H, W, C].
/// Differentiable with respect to the table.
template <typename T>
Tensor<T> embed_grid(const TokenIdGrid& ids, const Tensor<T>& table);

enum class MaskAction { Mask, Random, Keep };

struct MaskEntry {
  std::size_t token = 0;  // index into the page's sub-tokens
  MaskAction action = MaskAction::Mask;
  int original = 0;
  int replacement = 0;  // id written into the masked token list
};

/// Selected sub-tokens in ascending token order.
struct MaskPlan {
  std::vector<MaskEntry> entries;
  bool empty() const { return entries.empty(); }
};

struct MaskOptions {
  double ratio = 0.15;
  double mask_share = 0.8;
  double random_share = 0.1;  // the rest is kept unchanged
};

struct MaskedTokens {
  std::vector<doc::SubToken> tokens;
  MaskPlan plan;
};

/// Selects round_half_up(ratio * n) sub-tokens uniformly without replacement,
/// then per selected token: [MASK] with probability mask_share, a random
/// non-reserved id with probability random_share, otherwise unchanged.
MaskedTokens apply_mglm_mask(const std::vector<doc::SubToken>& tokens, std::size_t vocab_size,
                             const MaskOptions& options, std::uint64_t seed);

/// Stable pseudo-color of a token id; [PAD] is white.
std::array<std::uint8_t, 3> id_color(int id);
doc::Image grid_to_image(const TokenIdGrid& grid);
void write_grid_csv(const std::filesystem::path& path, const TokenIdGrid& grid);

}  // namespace vgt::grid
