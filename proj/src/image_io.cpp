#include "semgan/image_io.hpp"

#include <png.h>

#include <cstring>

#include "semgan/errors.hpp"

namespace semgan {
namespace {

Raster8 read_png(const std::filesystem::path& path, bool gray) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorCategory::kValidation,
                "cannot decode PNG " + path.string() + ": " + image.message);
  }
  if (gray) {
    const bool single = (image.format & PNG_FORMAT_FLAG_COLOR) == 0 &&
                        (image.format & PNG_FORMAT_FLAG_ALPHA) == 0 &&
                        (image.format & PNG_FORMAT_FLAG_LINEAR) == 0 &&
                        (image.format & PNG_FORMAT_FLAG_COLORMAP) == 0;
    if (!single) {
      png_image_free(&image);
      throw Error(ErrorCategory::kValidation,
                  "label map " + path.string() +
                      " is not an 8-bit single-channel PNG");
    }
  }
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Raster8 out;
  out.height = static_cast<int>(image.height);
  out.width = static_cast<int>(image.width);
  out.channels = gray ? 1 : 3;
  out.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    throw Error(ErrorCategory::kValidation,
                "cannot decode PNG " + path.string() + ": " + image.message);
  }
  return out;
}

}  // namespace

Raster8 read_png_rgb(const std::filesystem::path& path) { return read_png(path, false); }

Raster8 read_png_gray(const std::filesystem::path& path) { return read_png(path, true); }

void write_png(const std::filesystem::path& path, const Raster8& raster) {
  if (raster.channels != 1 && raster.channels != 3) {
    throw Error(ErrorCategory::kValidation, "write_png: unsupported channel count");
  }
  if (raster.data.size() !=
      static_cast<std::size_t>(raster.height) * raster.width * raster.channels) {
    throw Error(ErrorCategory::kValidation, "write_png: raster size mismatch");
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  image.format = raster.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, raster.data.data(), 0,
                               nullptr)) {
    throw Error(ErrorCategory::kIo,
                "cannot write PNG " + path.string() + ": " + image.message);
  }
}

}  // namespace semgan
