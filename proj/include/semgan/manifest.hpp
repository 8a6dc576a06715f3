#pragma once

// Run directories and their manifests. A manifest holds everything needed
// to relaunch a run: the effective config, a content hash of the dataset,
// class frequencies, build and machine details and timing.

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace semgan {

struct RunDirectory {
  std::filesystem::path root;

  // Creates root, snapshots/ and reports/.
  static RunDirectory create(const std::filesystem::path& root);

  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path log() const { return root / "log.jsonl"; }
  std::filesystem::path snapshots() const { return root / "snapshots"; }
  std::filesystem::path reports() const { return root / "reports"; }
};

struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::string dataset_path;
  std::string dataset_fingerprint;
  std::vector<double> class_frequencies;
  nlohmann::json substrate = nlohmann::json::object();
  std::string revision;
  std::string started_at;
  std::string finished_at;
  double wall_clock_seconds = 0.0;
  std::string status = "running";
  nlohmann::json outputs = nlohmann::json::object();
};

// SHA-256 over the sorted relative paths and contents of every regular file
// under root.
std::string dataset_fingerprint(const std::filesystem::path& root);

// Compiler, kernel variant, library version, hardware concurrency.
nlohmann::json substrate_info();
std::string revision();
std::string utc_timestamp();

void write_manifest(const RunManifest& manifest, const std::filesystem::path& file);
RunManifest read_manifest(const std::filesystem::path& file);

nlohmann::json to_json_value(const RunManifest& m);

// Tracks wall-clock time from construction and finalises the manifest.
class ManifestWriter {
 public:
  ManifestWriter(RunManifest manifest, std::filesystem::path file);
  RunManifest& manifest() { return manifest_; }
  void flush();
  void finish(const std::string& status);

 private:
  RunManifest manifest_;
  std::filesystem::path file_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace semgan
