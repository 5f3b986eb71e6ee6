#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "chartcast/chart_render.hpp"

namespace chartcast {

// Minimal PNG writer/reader for 8-bit RGB rasters. Fixed filter (None) and
// fixed zlib level, so identical pixels give identical bytes.
std::vector<std::uint8_t> encode_png(const ChartImage& image);

void write_png(const ChartImage& image, const std::filesystem::path& path);

// Decodes PNGs produced by encode_png (8-bit RGB, non-interlaced).
ChartImage read_png(const std::filesystem::path& path);

}  // namespace chartcast
