#pragma once

#include <filesystem>

#include "vgt/doc/types.h"

namespace vgt::doc {

/// Reads any PNG as 8-bit RGB.
Image read_png(const std::filesystem::path& path);
/// Writes an 8-bit image with 1 (gray) or 3 (RGB) channels. No timestamp
/// chunk is emitted, so identical pixels give identical files.
void write_png(const std::filesystem::path& path, const Image& image);

}  // namespace vgt::doc
