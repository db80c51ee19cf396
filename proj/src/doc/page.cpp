#include "vgt/doc/page.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vgt::doc {

std::vector<PixelBox> split_word_box(const PixelBox& box, std::size_t n, bool* degenerate) {
  if (n == 0) throw std::invalid_argument("split_word_box: n must be >= 1");
  if (!box.valid()) throw std::invalid_argument("split_word_box: empty box");
  const int width = box.width();
  const int count = static_cast<int>(n);
  std::vector<PixelBox> out;
  out.reserve(n);
  if (count > width) {
    if (degenerate) *degenerate = true;
    for (int i = 0; i < count; ++i) {
      const int x = box.x0 + std::min(i, width - 1);
      out.push_back({x, box.y0, x + 1, box.y1});
    }
    return out;
  }
  if (degenerate) *degenerate = false;
  const int step = width / count;
  for (int i = 0; i < count; ++i) {
    const int x0 = box.x0 + i * step;
    const int x1 = i + 1 == count ? box.x1 : x0 + step;
    out.push_back({x0, box.y0, x1, box.y1});
  }
  return out;
}

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

PixelBox clamp_box(const PixelBox& box, int width, int height) {
  return {std::clamp(box.x0, 0, width), std::clamp(box.y0, 0, height), std::clamp(box.x1, 0, width),
          std::clamp(box.y1, 0, height)};
}

PixelBox rescale_box(const PixelBox& box, double sx, double sy) {
  PixelBox out{round_half_up(box.x0 * sx), round_half_up(box.y0 * sy), round_half_up(box.x1 * sx),
               round_half_up(box.y1 * sy)};
  if (out.x1 <= out.x0) out.x1 = out.x0 + 1;
  if (out.y1 <= out.y0) out.y1 = out.y0 + 1;
  return out;
}

namespace {

PixelBox box_union(const PixelBox& a, const PixelBox& b) {
  return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

double median_char_width(const std::vector<Word>& words) {
  std::vector<double> widths;
  for (const auto& w : words) {
    if (!w.text.empty()) widths.push_back(double(w.box.width()) / double(w.text.size()));
  }
  if (widths.empty()) return 0.0;
  auto mid = widths.begin() + static_cast<long>(widths.size() / 2);
  std::nth_element(widths.begin(), mid, widths.end());
  return *mid;
}

}  // namespace

std::vector<Segment> group_lines(const std::vector<Word>& words) {
  std::vector<std::size_t> order(words.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ba = words[a].box;
    const auto& bb = words[b].box;
    return ba.y0 != bb.y0 ? ba.y0 < bb.y0 : ba.x0 < bb.x0;
  });
  const double max_gap = median_char_width(words);

  std::vector<Segment> lines;
  std::vector<std::size_t> last_word;  // per line
  for (std::size_t idx : order) {
    const PixelBox& box = words[idx].box;
    std::size_t target = lines.size();
    for (std::size_t li = 0; li < lines.size(); ++li) {
      const PixelBox& prev = words[last_word[li]].box;
      const int overlap = std::min(prev.y1, box.y1) - std::max(prev.y0, box.y0);
      const int min_h = std::min(prev.height(), box.height());
      const int gap = box.x0 - prev.x1;
      if (2 * overlap >= min_h && box.x0 >= prev.x0 && gap <= max_gap) {
        target = li;
        break;
      }
    }
    if (target == lines.size()) {
      lines.push_back({words[idx].text, box, {idx}});
      last_word.push_back(idx);
    } else {
      Segment& line = lines[target];
      line.text += " " + words[idx].text;
      line.box = box_union(line.box, box);
      line.words.push_back(idx);
      last_word[target] = idx;
    }
  }
  return lines;
}

void derive_tokens(DocPage& page, const Vocab& vocab) {
  page.tokens.clear();
  for (std::size_t wi = 0; wi < page.words.size(); ++wi) {
    const Word& word = page.words[wi];
    const auto ids = tokenize(word.text, vocab);
    const auto boxes = split_word_box(word.box, ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) page.tokens.push_back({ids[k], boxes[k], wi});
  }
}

DocPage build_page(const PageWords& input, const Vocab& vocab, int model_width, int model_height) {
  if (input.width <= 0 || input.height <= 0) throw FormatError("page size must be positive");
  DocPage page;
  page.page_width = input.width;
  page.page_height = input.height;
  page.width = model_width > 0 ? model_width : input.width;
  page.height = model_height > 0 ? model_height : input.height;
  const double sx = double(page.width) / input.width;
  const double sy = double(page.height) / input.height;
  const bool identity = page.width == input.width && page.height == input.height;

  std::vector<long> remap(input.words.size(), -1);
  for (std::size_t i = 0; i < input.words.size(); ++i) {
    PixelBox box = clamp_box(input.words[i].box, input.width, input.height);
    if (!box.valid()) continue;
    if (!identity) box = clamp_box(rescale_box(box, sx, sy), page.width, page.height);
    remap[i] = static_cast<long>(page.words.size());
    page.words.push_back({input.words[i].text, box});
  }

  if (input.lines.empty()) {
    page.segments = group_lines(page.words);
  } else {
    for (const auto& line : input.lines) {
      Segment seg{line.text, {}, {}};
      for (std::size_t w : line.words) {
        if (w >= remap.size()) throw FormatError("line references word " + std::to_string(w) + " out of range");
        if (remap[w] < 0) continue;
        const auto nw = static_cast<std::size_t>(remap[w]);
        seg.box = seg.words.empty() ? page.words[nw].box : box_union(seg.box, page.words[nw].box);
        seg.words.push_back(nw);
      }
      if (!seg.words.empty()) page.segments.push_back(std::move(seg));
    }
  }
  derive_tokens(page, vocab);
  return page;
}

Image resize_image(const Image& src, std::size_t height, std::size_t width) {
  if (src.height == height && src.width == width) return src;
  Image out{height, width, src.channels, std::vector<std::uint8_t>(height * width * src.channels)};
  const double sy = double(src.height) / double(height);
  const double sx = double(src.width) / double(width);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(src.height - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - double(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(src.width - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - double(x0);
      for (std::size_t c = 0; c < src.channels; ++c) {
        const double v = (1 - wy) * ((1 - wx) * src.at(y0, x0, c) + wx * src.at(y0, x1, c)) +
                         wy * ((1 - wx) * src.at(y1, x0, c) + wx * src.at(y1, x1, c));
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(round_half_up(v), 0, 255));
      }
    }
  }
  return out;
}

}  // namespace vgt::doc
