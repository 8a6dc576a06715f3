#pragma once

// Data model for a labeled source domain and an unlabeled target domain,
// plus the on-disk dataset layout:
//
//   root/catalog.json
//   root/source/images/<stem>.png     8-bit RGB
//   root/source/labels/<stem>.png     8-bit gray, raw class ids
//   root/target/images/<stem>.png
//   root/target_eval/images/<stem>.png   (optional, evaluation only)
//   root/target_eval/labels/<stem>.png

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semgan/image_io.hpp"
#include "semgan/random.hpp"

namespace semgan {

// H x W x 3 interleaved, values in [0, 1].
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<float> pixels;

  float at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

struct LabelMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> ids;

  std::uint8_t at(int y, int x) const {
    return ids[static_cast<std::size_t>(y) * width + x];
  }
};

struct LabeledImage {
  std::string id;
  RgbImage image;
  LabelMap labels;
};

struct UnlabeledImage {
  std::string id;
  RgbImage image;
};

struct ClassEntry {
  int id = 0;
  std::string name;
  std::array<std::uint8_t, 3> color{};
  double frequency = 0.0;
};

struct ClassCatalog {
  std::vector<ClassEntry> entries;
  bool has_frequencies = false;

  int num_classes() const { return static_cast<int>(entries.size()); }
  // ids are 0..n-1 and unique; colors distinct; frequencies sum to 1.
  void validate() const;
  std::vector<double> frequencies() const;
};

struct DomainPairDataset {
  std::vector<LabeledImage> source;
  std::vector<UnlabeledImage> target;
  // Held-out target labels; read only by evaluation code.
  std::optional<std::vector<LabeledImage>> target_eval;
  ClassCatalog catalog;
};

ClassCatalog load_catalog(const std::filesystem::path& file);
void save_catalog(const ClassCatalog& catalog, const std::filesystem::path& file);

// Samples are ordered lexicographically by file name.
DomainPairDataset load_dataset(const std::filesystem::path& root,
                               const ClassCatalog& catalog);
// Reads the catalog from root/catalog.json.
DomainPairDataset load_dataset(const std::filesystem::path& root);
void save_dataset(const DomainPairDataset& dataset, const std::filesystem::path& root);

// Loads a flat images/labels pair of directories (e.g. root/target_eval).
std::vector<LabeledImage> load_labeled_dir(const std::filesystem::path& dir,
                                           const ClassCatalog& catalog);

RgbImage to_rgb(const Raster8& raster);
Raster8 to_raster(const RgbImage& image);
LabelMap to_label_map(const Raster8& raster);
Raster8 to_raster(const LabelMap& labels);

struct CropWindow {
  int top = 0;
  int left = 0;
  int size = 0;
};

// Draws a window uniformly; throws ValidationError if size exceeds either
// dimension.
CropWindow choose_crop(int height, int width, int size, Rng& rng);
RgbImage crop(const RgbImage& image, const CropWindow& window);
LabelMap crop(const LabelMap& labels, const CropWindow& window);

LabeledImage random_crop(const LabeledImage& sample, int size, Rng& rng);
UnlabeledImage random_crop(const UnlabeledImage& sample, int size, Rng& rng);

// Maps class ids to their display colors and back.
Raster8 encode_label_colors(const LabelMap& labels, const ClassCatalog& catalog);
LabelMap decode_label_colors(const Raster8& colors, const ClassCatalog& catalog);

// Throws ValidationError naming `what` if any id >= num_classes.
void validate_labels(const LabelMap& labels, const ClassCatalog& catalog,
                     const std::string& what);

}  // namespace semgan
