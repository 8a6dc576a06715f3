#include "semgan/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>

#include "semgan/errors.hpp"
#include "semgan/hash.hpp"

namespace semgan {
namespace {

constexpr char kMagic[8] = {'S', 'E', 'M', 'G', 'A', 'N', 'S', 'N'};

template <typename T>
constexpr const char* dtype_name();
template <>
constexpr const char* dtype_name<float>() { return "f32"; }
template <>
constexpr const char* dtype_name<double>() { return "f64"; }

nlohmann::json shape_json(const Shape& s) { return {s.n, s.c, s.h, s.w}; }

}  // namespace

template <typename T>
void SnapshotFile::put(const std::string& name, const Tensor<T>& tensor) {
  if (arrays_.count(name)) throw std::logic_error("duplicate snapshot array '" + name + "'");
  Array array;
  array.dtype = dtype_name<T>();
  array.shape = tensor.shape();
  array.bytes.resize(tensor.size() * sizeof(T));
  std::memcpy(array.bytes.data(), tensor.data(), array.bytes.size());
  arrays_[name] = std::move(array);
}

template <typename T>
Tensor<T> SnapshotFile::get(const std::string& name) const {
  auto it = arrays_.find(name);
  if (it == arrays_.end()) {
    throw Error(ErrorCategory::kSpecMismatch, "snapshot has no array '" + name + "'");
  }
  if (it->second.dtype != dtype_name<T>()) {
    throw Error(ErrorCategory::kSpecMismatch, "snapshot array '" + name +
                                                  "' has dtype " + it->second.dtype);
  }
  Tensor<T> out(it->second.shape);
  std::memcpy(out.data(), it->second.bytes.data(), it->second.bytes.size());
  return out;
}

void SnapshotFile::write(const std::filesystem::path& path) const {
  nlohmann::json header;
  header["meta"] = meta_;
  nlohmann::json index = nlohmann::json::array();
  std::uint64_t offset = 0;
  Sha256 digest;
  for (const auto& [name, array] : arrays_) {
    index.push_back({{"name", name},
                     {"dtype", array.dtype},
                     {"shape", shape_json(array.shape)},
                     {"offset", offset},
                     {"bytes", array.bytes.size()}});
    offset += array.bytes.size();
    digest.update(array.bytes);
  }
  header["arrays"] = index;
  header["payload_sha256"] = digest.hex_digest();
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::kIo, "cannot open " + tmp.string());
    const std::uint32_t version = kSnapshotVersion;
    const std::uint64_t length = text.size();
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&length), sizeof(length));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, array] : arrays_) {
      out.write(reinterpret_cast<const char*>(array.bytes.data()),
                static_cast<std::streamsize>(array.bytes.size()));
    }
    out.flush();
    if (!out) throw Error(ErrorCategory::kIo, "failed writing snapshot " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

SnapshotFile SnapshotFile::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::kMissingInput, "snapshot not found: " + path.string());
  auto corrupt = [&](const std::string& why) {
    return Error(ErrorCategory::kCorrupt, "corrupt snapshot " + path.string() + ": " + why);
  };
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t length = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw corrupt("bad magic");
  if (version != kSnapshotVersion) {
    throw corrupt("unsupported format version " + std::to_string(version));
  }
  if (length > (1ull << 30)) throw corrupt("implausible header length");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw corrupt("truncated header");
  nlohmann::json header = nlohmann::json::parse(text, nullptr, false);
  if (header.is_discarded() || !header.contains("arrays")) throw corrupt("bad header");

  SnapshotFile file;
  file.meta_ = header.value("meta", nlohmann::json::object());
  Sha256 digest;
  try {
    for (const auto& entry : header.at("arrays")) {
      Array array;
      array.dtype = entry.at("dtype").get<std::string>();
      const auto& s = entry.at("shape");
      array.shape = Shape{s.at(0).get<int>(), s.at(1).get<int>(),
                          s.at(2).get<int>(), s.at(3).get<int>()};
      const std::size_t bytes = entry.at("bytes").get<std::size_t>();
      const std::size_t elem = array.dtype == "f64" ? 8 : 4;
      if (array.shape.numel() * elem != bytes) throw corrupt("array size mismatch");
      array.bytes.resize(bytes);
      in.read(reinterpret_cast<char*>(array.bytes.data()),
              static_cast<std::streamsize>(bytes));
      if (!in) throw corrupt("truncated payload");
      digest.update(array.bytes);
      file.arrays_[entry.at("name").get<std::string>()] = std::move(array);
    }
  } catch (const nlohmann::json::exception& e) {
    throw corrupt(e.what());
  }
  if (digest.hex_digest() != header.value("payload_sha256", std::string())) {
    throw corrupt("payload checksum mismatch");
  }
  return file;
}

template <typename T>
void get_parameters(const SnapshotFile& file, const std::string& prefix,
                    const std::vector<Parameter<T>*>& params) {
  for (auto* p : params) {
    Tensor<T> value = file.get<T>(prefix + p->name);
    if (!(value.shape() == p->value.shape())) {
      throw Error(ErrorCategory::kSpecMismatch,
                  "parameter " + prefix + p->name + " has shape " +
                      value.shape().str() + " in snapshot, model expects " +
                      p->value.shape().str());
    }
    p->value = std::move(value);
  }
}

template void SnapshotFile::put<float>(const std::string&, const Tensor<float>&);
template void SnapshotFile::put<double>(const std::string&, const Tensor<double>&);
template Tensor<float> SnapshotFile::get<float>(const std::string&) const;
template Tensor<double> SnapshotFile::get<double>(const std::string&) const;
template void get_parameters<float>(const SnapshotFile&, const std::string&,
                                    const std::vector<Parameter<float>*>&);
template void get_parameters<double>(const SnapshotFile&, const std::string&,
                                     const std::vector<Parameter<double>*>&);

}  // namespace semgan
