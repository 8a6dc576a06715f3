#pragma once

// Self-describing binary container for model parameters and optimizer state.
//
// Layout: 8-byte magic "SEMGANSN", u32 format version, u64 header length,
// JSON header (user metadata plus an index of arrays with dtype, shape,
// offset, byte count and a SHA-256 of the payload), then the raw
// little-endian array payload.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "semgan/graph.hpp"
#include "semgan/tensor.hpp"

namespace semgan {

inline constexpr std::uint32_t kSnapshotVersion = 1;

class SnapshotFile {
 public:
  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }

  template <typename T>
  void put(const std::string& name, const Tensor<T>& tensor);
  // Throws SpecMismatch when the array is missing or its dtype differs.
  template <typename T>
  Tensor<T> get(const std::string& name) const;
  bool contains(const std::string& name) const { return arrays_.count(name) > 0; }

  // Writes to a temporary sibling and renames into place.
  void write(const std::filesystem::path& path) const;
  static SnapshotFile read(const std::filesystem::path& path);

 private:
  struct Array {
    std::string dtype;
    Shape shape;
    std::vector<std::byte> bytes;
  };
  nlohmann::json meta_ = nlohmann::json::object();
  std::map<std::string, Array> arrays_;
};

template <typename T>
void put_parameters(SnapshotFile& file, const std::string& prefix,
                    const std::vector<Parameter<T>*>& params) {
  for (const auto* p : params) file.put(prefix + p->name, p->value);
}

// Loads values in place; a missing array or shape difference is a spec
// mismatch.
template <typename T>
void get_parameters(const SnapshotFile& file, const std::string& prefix,
                    const std::vector<Parameter<T>*>& params);

}  // namespace semgan
