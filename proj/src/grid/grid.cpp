#include "vgt/grid/grid.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "vgt/core/ops.h"

namespace vgt::grid {

TokenIdGrid build_token_id_grid(const std::vector<doc::SubToken>& tokens, std::size_t height, std::size_t width) {
  TokenIdGrid grid{height, width, std::vector<int>(height * width, doc::Vocab::kPad)};
  const int h = static_cast<int>(height), w = static_cast<int>(width);
  for (const auto& t : tokens) {
    const int y0 = std::max(t.box.y0, 0), y1 = std::min(t.box.y1, h);
    const int x0 = std::max(t.box.x0, 0), x1 = std::min(t.box.x1, w);
    for (int y = y0; y < y1; ++y) {
      std::fill_n(grid.ids.begin() + static_cast<long>(std::size_t(y) * width + std::size_t(x0)),
                  std::max(x1 - x0, 0), t.token_id);
    }
  }
  return grid;
}

TokenIdGrid build_token_id_grid(const doc::DocPage& page, std::size_t height, std::size_t width) {
  return build_token_id_grid(page.tokens, height, width);
}

template <typename T>
Tensor<T> embed_grid(const TokenIdGrid& grid, const Tensor<T>& table) {
  if (table.rank() != 2) throw ShapeError("embed_grid: table must be [vocab, C], got " + shape_str(table.shape()));
  const std::size_t vocab = table.dim(0);
  std::vector<std::size_t> rows(grid.ids.size());
  for (std::size_t i = 0; i < grid.ids.size(); ++i) {
    const int id = grid.ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw std::out_of_range("embed_grid: token id " + std::to_string(id) + " at cell " + std::to_string(i) +
                              " outside vocab of " + std::to_string(vocab));
    }
    rows[i] = static_cast<std::size_t>(id);
  }
  return ops::reshape(ops::gather_rows(table, rows), {grid.height, grid.width, table.dim(1)});
}

template Tensor<float> embed_grid(const TokenIdGrid&, const Tensor<float>&);
template Tensor<double> embed_grid(const TokenIdGrid&, const Tensor<double>&);

MaskedTokens apply_mglm_mask(const std::vector<doc::SubToken>& tokens, std::size_t vocab_size,
                             const MaskOptions& options, std::uint64_t seed) {
  if (!(options.ratio > 0.0 && options.ratio < 1.0)) throw std::invalid_argument("mask ratio must lie in (0, 1)");
  if (vocab_size <= std::size_t(doc::Vocab::kCls) + 1) throw std::invalid_argument("vocab has no regular tokens");
  MaskedTokens out{tokens, {}};
  const std::size_t n = tokens.size();
  const auto count = static_cast<std::size_t>(std::floor(options.ratio * double(n) + 0.5));
  if (count == 0) return out;

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::sort(order.begin(), order.begin() + static_cast<long>(count));

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> random_id(doc::Vocab::kCls + 1, static_cast<int>(vocab_size) - 1);
  for (std::size_t i = 0; i < count; ++i) {
    MaskEntry e;
    e.token = order[i];
    e.original = tokens[e.token].token_id;
    const double u = coin(rng);
    if (u < options.mask_share) {
      e.action = MaskAction::Mask;
      e.replacement = doc::Vocab::kMask;
    } else if (u < options.mask_share + options.random_share) {
      e.action = MaskAction::Random;
      e.replacement = random_id(rng);
    } else {
      e.action = MaskAction::Keep;
      e.replacement = e.original;
    }
    out.tokens[e.token].token_id = e.replacement;
    out.plan.entries.push_back(e);
  }
  return out;
}

std::array<std::uint8_t, 3> id_color(int id) {
  if (id == doc::Vocab::kPad) return {255, 255, 255};
  std::uint32_t h = static_cast<std::uint32_t>(id) * 2654435761u;
  h ^= h >> 15;
  h *= 2246822519u;
  h ^= h >> 13;
  // Keep colors away from white so tokens stay visible.
  return {static_cast<std::uint8_t>(h & 0xbf), static_cast<std::uint8_t>((h >> 8) & 0xbf),
          static_cast<std::uint8_t>((h >> 16) & 0xbf)};
}

doc::Image grid_to_image(const TokenIdGrid& grid) {
  doc::Image img{grid.height, grid.width, 3, std::vector<std::uint8_t>(grid.height * grid.width * 3)};
  for (std::size_t i = 0; i < grid.ids.size(); ++i) {
    const auto c = id_color(grid.ids[i]);
    std::copy(c.begin(), c.end(), img.pixels.begin() + static_cast<long>(3 * i));
  }
  return img;
}

void write_grid_csv(const std::filesystem::path& path, const TokenIdGrid& grid) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t r = 0; r < grid.height; ++r) {
    for (std::size_t c = 0; c < grid.width; ++c) out << (c ? "," : "") << grid.at(r, c);
    out << '\n';
  }
}

}  // namespace vgt::grid
