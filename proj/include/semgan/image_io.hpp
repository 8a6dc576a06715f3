#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace semgan {

// 8-bit interleaved raster, `channels` = 1 or 3.
struct Raster8 {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

// Decodes any PNG to 8-bit RGB.
Raster8 read_png_rgb(const std::filesystem::path& path);
// Decodes an 8-bit single-channel PNG; anything else is a validation error.
Raster8 read_png_gray(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Raster8& raster);

}  // namespace semgan
