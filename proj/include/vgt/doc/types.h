#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vgt::doc {

/// Integer pixel box, half-open: covers columns x0 <= x < x1 and rows y0 <= y < y1.
struct PixelBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  long area() const { return static_cast<long>(width()) * height(); }
  bool valid() const { return x0 < x1 && y0 < y1; }
  bool operator==(const PixelBox&) const = default;
};

/// Continuous box in image pixels.
struct BoxF {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool valid() const { return x0 < x1 && y0 < y1; }
  bool operator==(const BoxF&) const = default;
};

inline BoxF to_boxf(const PixelBox& b) { return {double(b.x0), double(b.y0), double(b.x1), double(b.y1)}; }

struct Word {
  std::string text;
  PixelBox box;
};

struct SubToken {
  int token_id = 0;
  PixelBox box;
  std::size_t parent_word = 0;
};

/// A text line with the words it groups.
struct Segment {
  std::string text;
  PixelBox box;
  std::vector<std::size_t> words;
};

/// Interleaved 8-bit raster, row-major [height][width][channels].
struct Image {
  std::size_t height = 0, width = 0, channels = 3;
  std::vector<std::uint8_t> pixels;

  bool empty() const { return pixels.empty(); }
  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) { return pixels[(y * width + x) * channels + c]; }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * channels + c];
  }
};

/// One page at model resolution. Boxes are in model pixels; the original
/// page size is kept for mapping results back.
struct DocPage {
  int height = 0, width = 0;
  int page_height = 0, page_width = 0;
  std::vector<Word> words;
  std::vector<SubToken> tokens;
  std::vector<Segment> segments;
  Image image;
};

/// Layout categories of the D4LA taxonomy, in the published order.
inline constexpr std::array<std::string_view, 27> kD4laCategories = {
    "DocTitle",   "ListText",   "LetterHead", "Question",  "RegionList", "TableName", "FigureName",
    "Footer",     "Number",     "ParaTitle",  "RegionTitle", "LetterDear", "OtherText", "Abstract",
    "Table",      "Equation",   "PageHeader", "Catalog",   "ParaText",   "Date",      "LetterSign",
    "RegionKV",   "Author",     "Figure",     "Reference", "PageFooter", "PageNumber"};

}  // namespace vgt::doc
