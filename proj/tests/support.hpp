#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

#include "semgan/domain_data.hpp"
#include "semgan/random.hpp"

namespace semgan::testing {

// Directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("semgan_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline LabelMap random_label_map(int h, int w, int classes, Rng& rng) {
  LabelMap m{h, w, {}};
  m.ids.resize(static_cast<std::size_t>(h) * w);
  for (auto& id : m.ids) id = static_cast<std::uint8_t>(uniform_index(rng, classes));
  return m;
}

inline RgbImage random_image(int h, int w, Rng& rng) {
  RgbImage img{h, w, {}};
  img.pixels.resize(static_cast<std::size_t>(h) * w * 3);
  for (auto& v : img.pixels) v = static_cast<float>(uniform01(rng));
  return img;
}

inline ClassCatalog plain_catalog(int classes) {
  ClassCatalog c;
  for (int i = 0; i < classes; ++i) {
    ClassEntry e;
    e.id = i;
    e.name = "class" + std::to_string(i);
    e.color = {static_cast<std::uint8_t>(40 * i), static_cast<std::uint8_t>(255 - 30 * i),
               static_cast<std::uint8_t>(17 * i + 5)};
    c.entries.push_back(e);
  }
  return c;
}

}  // namespace semgan::testing
