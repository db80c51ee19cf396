#pragma once

#include <stdexcept>
#include <vector>

#include "vgt/doc/types.h"
#include "vgt/doc/vocab.h"

namespace vgt::doc {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Splits a word box horizontally into n equal-width boxes, the last one
/// absorbing the remainder. When n exceeds the width in pixels the result
/// degrades to 1-px boxes (pinned to the right edge once the width runs out)
/// and *degenerate is set.
std::vector<PixelBox> split_word_box(const PixelBox& box, std::size_t n, bool* degenerate = nullptr);

int round_half_up(double v);
PixelBox clamp_box(const PixelBox& box, int width, int height);
/// Scales both corners with round-half-up; a box that collapses keeps one pixel.
PixelBox rescale_box(const PixelBox& box, double sx, double sy);

/// Groups words into text lines: a word joins the current line when its
/// vertical overlap with the line's last word is at least half the smaller
/// height and the horizontal gap is at most the median character width.
std::vector<Segment> group_lines(const std::vector<Word>& words);

/// Page content before tokenization, in page pixels.
struct PageWords {
  int width = 0, height = 0;
  std::vector<Word> words;
  std::vector<Segment> lines;  // grouped automatically when empty
};

/// Clamps words to the page, drops empty boxes, rescales everything to the
/// model resolution (0 keeps the page size) and derives sub-tokens.
DocPage build_page(const PageWords& input, const Vocab& vocab, int model_width = 0, int model_height = 0);

/// Fills page.tokens from page.words.
void derive_tokens(DocPage& page, const Vocab& vocab);

/// Bilinear resize of an 8-bit raster.
Image resize_image(const Image& src, std::size_t height, std::size_t width);

}  // namespace vgt::doc
