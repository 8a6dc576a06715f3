#include "semgan/domain_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "semgan/errors.hpp"

namespace semgan {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCategory::kStructural, "missing directory " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return files;
}

RgbImage load_rgb(const fs::path& file) { return to_rgb(read_png_rgb(file)); }

std::vector<UnlabeledImage> load_unlabeled_dir(const fs::path& dir) {
  std::vector<UnlabeledImage> out;
  for (const auto& file : list_pngs(dir)) {
    out.push_back({file.stem().string(), load_rgb(file)});
  }
  return out;
}

std::string stem_name(const std::string& id) { return id + ".png"; }

}  // namespace

// ------------------------------------------------------------------ catalog

void ClassCatalog::validate() const {
  if (entries.size() < 2) {
    throw Error(ErrorCategory::kValidation, "catalog needs at least two classes");
  }
  if (entries.size() > 256) {
    throw Error(ErrorCategory::kValidation, "catalog supports at most 256 classes");
  }
  std::set<std::array<std::uint8_t, 3>> colors;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].id != static_cast<int>(i)) {
      throw Error(ErrorCategory::kValidation,
                  "catalog ids must be 0..n-1 in order; entry " + std::to_string(i) +
                      " has id " + std::to_string(entries[i].id));
    }
    if (!colors.insert(entries[i].color).second) {
      throw Error(ErrorCategory::kValidation,
                  "catalog color of class " + std::to_string(i) + " is not unique");
    }
  }
  if (has_frequencies) {
    double sum = 0.0;
    for (const auto& e : entries) {
      if (!(e.frequency >= 0.0 && e.frequency <= 1.0)) {
        throw Error(ErrorCategory::kValidation,
                    "class frequency outside [0,1] for class " + std::to_string(e.id));
      }
      sum += e.frequency;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorCategory::kValidation, "class frequencies sum to " +
                                                  std::to_string(sum) + ", not 1");
    }
  }
}

std::vector<double> ClassCatalog::frequencies() const {
  std::vector<double> out;
  for (const auto& e : entries) out.push_back(e.frequency);
  return out;
}

ClassCatalog load_catalog(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCategory::kStructural, "missing catalog " + file.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.contains("classes")) {
    throw Error(ErrorCategory::kValidation, "malformed catalog " + file.string());
  }
  ClassCatalog catalog;
  try {
    bool all_freq = true;
    for (const auto& c : doc.at("classes")) {
      ClassEntry e;
      e.id = c.at("id").get<int>();
      e.name = c.at("name").get<std::string>();
      const auto& color = c.at("color");
      for (int k = 0; k < 3; ++k) e.color[k] = color.at(k).get<std::uint8_t>();
      if (c.contains("frequency")) {
        e.frequency = c.at("frequency").get<double>();
      } else {
        all_freq = false;
      }
      catalog.entries.push_back(e);
    }
    catalog.has_frequencies = all_freq && !catalog.entries.empty();
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::kValidation,
                "malformed catalog " + file.string() + ": " + e.what());
  }
  catalog.validate();
  return catalog;
}

void save_catalog(const ClassCatalog& catalog, const fs::path& file) {
  json classes = json::array();
  for (const auto& e : catalog.entries) {
    json c = {{"id", e.id},
              {"name", e.name},
              {"color", {e.color[0], e.color[1], e.color[2]}}};
    if (catalog.has_frequencies) c["frequency"] = e.frequency;
    classes.push_back(c);
  }
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  out << json{{"classes", classes}}.dump(2) << "\n";
  if (!out) throw Error(ErrorCategory::kIo, "cannot write " + file.string());
}

// ------------------------------------------------------------- conversions

RgbImage to_rgb(const Raster8& raster) {
  if (raster.channels != 3) {
    throw Error(ErrorCategory::kValidation, "expected an RGB raster");
  }
  RgbImage img;
  img.height = raster.height;
  img.width = raster.width;
  img.pixels.resize(raster.data.size());
  for (std::size_t i = 0; i < raster.data.size(); ++i) {
    img.pixels[i] = static_cast<float>(raster.data[i]) / 255.0f;
  }
  return img;
}

Raster8 to_raster(const RgbImage& image) {
  Raster8 r;
  r.height = image.height;
  r.width = image.width;
  r.channels = 3;
  r.data.resize(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const float v = std::clamp(image.pixels[i], 0.0f, 1.0f);
    r.data[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return r;
}

LabelMap to_label_map(const Raster8& raster) {
  if (raster.channels != 1) {
    throw Error(ErrorCategory::kValidation, "expected a single-channel raster");
  }
  return LabelMap{raster.height, raster.width, raster.data};
}

Raster8 to_raster(const LabelMap& labels) {
  return Raster8{labels.height, labels.width, 1, labels.ids};
}

void validate_labels(const LabelMap& labels, const ClassCatalog& catalog,
                     const std::string& what) {
  const int n = catalog.num_classes();
  for (std::uint8_t id : labels.ids) {
    if (id >= n) {
      throw Error(ErrorCategory::kValidation,
                  what + ": label value " + std::to_string(id) +
                      " is not a class id (num_classes=" + std::to_string(n) + ")");
    }
  }
}

// ----------------------------------------------------------------- loading

std::vector<LabeledImage> load_labeled_dir(const fs::path& dir,
                                           const ClassCatalog& catalog) {
  const auto images = list_pngs(dir / "images");
  const auto labels = list_pngs(dir / "labels");
  std::map<std::string, fs::path> label_by_stem;
  for (const auto& l : labels) label_by_stem[l.stem().string()] = l;
  if (images.size() != labels.size()) {
    throw Error(ErrorCategory::kStructural,
                dir.string() + ": " + std::to_string(images.size()) + " images but " +
                    std::to_string(labels.size()) + " label maps");
  }
  std::vector<LabeledImage> out;
  for (const auto& file : images) {
    const std::string stem = file.stem().string();
    auto it = label_by_stem.find(stem);
    if (it == label_by_stem.end()) {
      throw Error(ErrorCategory::kStructural, "no label map for " + file.string());
    }
    LabeledImage sample;
    sample.id = stem;
    sample.image = load_rgb(file);
    sample.labels = to_label_map(read_png_gray(it->second));
    if (sample.labels.height != sample.image.height ||
        sample.labels.width != sample.image.width) {
      throw Error(ErrorCategory::kValidation,
                  it->second.string() + ": label size " +
                      std::to_string(sample.labels.height) + "x" +
                      std::to_string(sample.labels.width) + " differs from image size " +
                      std::to_string(sample.image.height) + "x" +
                      std::to_string(sample.image.width));
    }
    validate_labels(sample.labels, catalog, it->second.string());
    out.push_back(std::move(sample));
  }
  return out;
}

DomainPairDataset load_dataset(const fs::path& root, const ClassCatalog& catalog) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCategory::kStructural, "dataset root not found: " + root.string());
  }
  catalog.validate();
  DomainPairDataset ds;
  ds.catalog = catalog;
  ds.source = load_labeled_dir(root / "source", catalog);
  if (ds.source.empty()) {
    throw Error(ErrorCategory::kStructural,
                "source domain is empty: " + (root / "source/images").string());
  }
  ds.target = load_unlabeled_dir(root / "target" / "images");
  if (ds.target.empty()) {
    throw Error(ErrorCategory::kStructural,
                "target domain is empty: " + (root / "target/images").string());
  }
  if (fs::is_directory(root / "target_eval")) {
    ds.target_eval = load_labeled_dir(root / "target_eval", catalog);
  }
  return ds;
}

DomainPairDataset load_dataset(const fs::path& root) {
  return load_dataset(root, load_catalog(root / "catalog.json"));
}

void save_dataset(const DomainPairDataset& dataset, const fs::path& root) {
  save_catalog(dataset.catalog, root / "catalog.json");
  auto save_labeled = [&](const std::vector<LabeledImage>& samples, const fs::path& dir) {
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "labels");
    for (const auto& s : samples) {
      write_png(dir / "images" / stem_name(s.id), to_raster(s.image));
      write_png(dir / "labels" / stem_name(s.id), to_raster(s.labels));
    }
  };
  save_labeled(dataset.source, root / "source");
  fs::create_directories(root / "target" / "images");
  for (const auto& s : dataset.target) {
    write_png(root / "target" / "images" / stem_name(s.id), to_raster(s.image));
  }
  if (dataset.target_eval) save_labeled(*dataset.target_eval, root / "target_eval");
}

// ------------------------------------------------------------------- crops

CropWindow choose_crop(int height, int width, int size, Rng& rng) {
  if (size <= 0 || size > height || size > width) {
    throw Error(ErrorCategory::kValidation,
                "crop size " + std::to_string(size) + " does not fit a " +
                    std::to_string(height) + "x" + std::to_string(width) + " image");
  }
  CropWindow w;
  w.size = size;
  w.top = static_cast<int>(uniform_int(rng, 0, height - size));
  w.left = static_cast<int>(uniform_int(rng, 0, width - size));
  return w;
}

RgbImage crop(const RgbImage& image, const CropWindow& w) {
  RgbImage out;
  out.height = w.size;
  out.width = w.size;
  out.pixels.resize(static_cast<std::size_t>(w.size) * w.size * 3);
  for (int y = 0; y < w.size; ++y) {
    const float* src =
        image.pixels.data() + (static_cast<std::size_t>(w.top + y) * image.width + w.left) * 3;
    std::copy_n(src, static_cast<std::size_t>(w.size) * 3,
                out.pixels.data() + static_cast<std::size_t>(y) * w.size * 3);
  }
  return out;
}

LabelMap crop(const LabelMap& labels, const CropWindow& w) {
  LabelMap out;
  out.height = w.size;
  out.width = w.size;
  out.ids.resize(static_cast<std::size_t>(w.size) * w.size);
  for (int y = 0; y < w.size; ++y) {
    const std::uint8_t* src =
        labels.ids.data() + static_cast<std::size_t>(w.top + y) * labels.width + w.left;
    std::copy_n(src, w.size, out.ids.data() + static_cast<std::size_t>(y) * w.size);
  }
  return out;
}

LabeledImage random_crop(const LabeledImage& sample, int size, Rng& rng) {
  const CropWindow w = choose_crop(sample.image.height, sample.image.width, size, rng);
  return LabeledImage{sample.id, crop(sample.image, w), crop(sample.labels, w)};
}

UnlabeledImage random_crop(const UnlabeledImage& sample, int size, Rng& rng) {
  const CropWindow w = choose_crop(sample.image.height, sample.image.width, size, rng);
  return UnlabeledImage{sample.id, crop(sample.image, w)};
}

// ------------------------------------------------------------ color coding

Raster8 encode_label_colors(const LabelMap& labels, const ClassCatalog& catalog) {
  validate_labels(labels, catalog, "encode_label_colors");
  Raster8 out;
  out.height = labels.height;
  out.width = labels.width;
  out.channels = 3;
  out.data.resize(labels.ids.size() * 3);
  for (std::size_t i = 0; i < labels.ids.size(); ++i) {
    const auto& color = catalog.entries[labels.ids[i]].color;
    out.data[i * 3 + 0] = color[0];
    out.data[i * 3 + 1] = color[1];
    out.data[i * 3 + 2] = color[2];
  }
  return out;
}

LabelMap decode_label_colors(const Raster8& colors, const ClassCatalog& catalog) {
  if (colors.channels != 3) {
    throw Error(ErrorCategory::kValidation, "decode_label_colors expects RGB");
  }
  std::map<std::array<std::uint8_t, 3>, std::uint8_t> lookup;
  for (const auto& e : catalog.entries) {
    lookup[e.color] = static_cast<std::uint8_t>(e.id);
  }
  LabelMap out;
  out.height = colors.height;
  out.width = colors.width;
  out.ids.resize(static_cast<std::size_t>(colors.height) * colors.width);
  for (std::size_t i = 0; i < out.ids.size(); ++i) {
    const std::array<std::uint8_t, 3> c{colors.data[i * 3], colors.data[i * 3 + 1],
                                        colors.data[i * 3 + 2]};
    auto it = lookup.find(c);
    if (it == lookup.end()) {
      throw Error(ErrorCategory::kValidation,
                  "color (" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," +
                      std::to_string(c[2]) + ") is not in the catalog");
    }
    out.ids[i] = it->second;
  }
  return out;
}

}  // namespace semgan
