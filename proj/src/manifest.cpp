#include "semgan/manifest.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <thread>

#include "semgan/errors.hpp"
#include "semgan/hash.hpp"
#include "semgan/kernels.hpp"

#ifndef SEMGAN_REVISION
#define SEMGAN_REVISION "unknown"
#endif

namespace semgan {

namespace fs = std::filesystem;
using nlohmann::json;

RunDirectory RunDirectory::create(const fs::path& root) {
  RunDirectory dir{root};
  std::error_code ec;
  fs::create_directories(dir.snapshots(), ec);
  if (!ec) fs::create_directories(dir.reports(), ec);
  if (ec) throw Error(ErrorCategory::kIo, "cannot create run directory " + root.string());
  return dir;
}

std::string dataset_fingerprint(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCategory::kMissingInput, "dataset not found: " + root.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), root));
  }
  std::sort(files.begin(), files.end());
  Sha256 h;
  for (const auto& rel : files) {
    h.update(rel.generic_string());
    h.update(std::string_view("\0", 1));
    h.update(sha256_file(root / rel));
  }
  return h.hex_digest();
}

json substrate_info() {
  json j;
#if defined(__clang__)
  j["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  j["compiler"] = std::string("gcc ") + __VERSION__;
#else
  j["compiler"] = "unknown";
#endif
  j["cxx_standard"] = static_cast<long>(__cplusplus);
  j["kernel_variant"] = kernels::variant_name(kernels::active_variant());
  j["hardware_threads"] = std::thread::hardware_concurrency();
  j["float_dtype"] = "float32";
  return j;
}

std::string revision() { return SEMGAN_REVISION; }

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json to_json_value(const RunManifest& m) {
  return json{{"command", m.command},
              {"config", m.config},
              {"dataset_path", m.dataset_path},
              {"dataset_fingerprint", m.dataset_fingerprint},
              {"class_frequencies", m.class_frequencies},
              {"substrate", m.substrate},
              {"revision", m.revision},
              {"started_at", m.started_at},
              {"finished_at", m.finished_at},
              {"wall_clock_seconds", m.wall_clock_seconds},
              {"status", m.status},
              {"outputs", m.outputs}};
}

void write_manifest(const RunManifest& manifest, const fs::path& file) {
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorCategory::kIo, "cannot write " + file.string());
    out << to_json_value(manifest).dump(2) << "\n";
    if (!out) throw Error(ErrorCategory::kIo, "cannot write " + file.string());
  }
  fs::rename(tmp, file);
}

RunManifest read_manifest(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCategory::kMissingInput, "manifest not found: " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::kCorrupt, file.string() + ": " + e.what());
  }
  RunManifest m;
  m.command = j.value("command", "");
  m.config = j.value("config", json::object());
  m.dataset_path = j.value("dataset_path", "");
  m.dataset_fingerprint = j.value("dataset_fingerprint", "");
  m.class_frequencies = j.value("class_frequencies", std::vector<double>{});
  m.substrate = j.value("substrate", json::object());
  m.revision = j.value("revision", "");
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  m.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
  m.status = j.value("status", "");
  m.outputs = j.value("outputs", json::object());
  return m;
}

ManifestWriter::ManifestWriter(RunManifest manifest, fs::path file)
    : manifest_(std::move(manifest)),
      file_(std::move(file)),
      start_(std::chrono::steady_clock::now()) {
  if (manifest_.started_at.empty()) manifest_.started_at = utc_timestamp();
  if (manifest_.revision.empty()) manifest_.revision = revision();
  if (manifest_.substrate.empty()) manifest_.substrate = substrate_info();
  flush();
}

void ManifestWriter::flush() {
  manifest_.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  write_manifest(manifest_, file_);
}

void ManifestWriter::finish(const std::string& status) {
  manifest_.status = status;
  manifest_.finished_at = utc_timestamp();
  flush();
}

}  // namespace semgan
