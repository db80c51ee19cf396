#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "vgt/doc/page.h"

namespace vgt::doc {

// OCR-JSON: {"page": {"h": int, "w": int},
//            "words": [{"text": str, "box": [x0, y0, x1, y1]}],
//            "lines": [{"text": str, "words": [int, ...]}]}   ("lines" optional)

PageWords parse_ocr_json(std::string_view text);
std::string dump_ocr_json(const PageWords& page);

/// Reads the OCR-JSON file and, if present, the raster next to it
/// (same stem, .png), producing a page at the requested model size.
DocPage load_ocr_page(const std::filesystem::path& path, const Vocab& vocab, int model_width = 0,
                      int model_height = 0);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace vgt::doc
