#include <openssl/evp.h>

#include <array>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>

#include "semgan/errors.hpp"
#include "semgan/hash.hpp"
#include "semgan/log.hpp"

namespace semgan {

std::string_view category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kStructural: return "structural";
    case ErrorCategory::kValidation: return "validation";
    case ErrorCategory::kSpecMismatch: return "spec_mismatch";
    case ErrorCategory::kNonFinite: return "non_finite";
    case ErrorCategory::kCorrupt: return "corrupt";
    case ErrorCategory::kConfigNotFound: return "config_not_found";
    case ErrorCategory::kInvalidConfig: return "invalid_config";
    case ErrorCategory::kMissingInput: return "missing_input";
    case ErrorCategory::kUnknownFlag: return "unknown_flag";
    case ErrorCategory::kIo: return "io";
  }
  return "unknown";
}

namespace {

LogLevel level_from_env() {
  const char* env = std::getenv("SEMGAN_LOG_LEVEL");
  if (env == nullptr) return LogLevel::kInfo;
  const std::string v = env;
  if (v == "debug") return LogLevel::kDebug;
  if (v == "warning") return LogLevel::kWarning;
  if (v == "error") return LogLevel::kError;
  return LogLevel::kInfo;
}

std::atomic<int>& threshold() {
  static std::atomic<int> value{static_cast<int>(level_from_env())};
  return value;
}

constexpr const char* kLevelNames[] = {"debug", "info", "warning", "error"};

}  // namespace

void set_log_level(LogLevel level) { threshold().store(static_cast<int>(level)); }

void log(LogLevel level, std::string_view message) {
  if (static_cast<int>(level) < threshold().load()) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::cerr << "[" << kLevelNames[static_cast<int>(level)] << "] " << message << "\n";
}

struct Sha256::Impl {
  EVP_MD_CTX* ctx = nullptr;
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest init failed");
  }
}

Sha256::~Sha256() { EVP_MD_CTX_free(impl_->ctx); }

void Sha256::update(std::span<const std::byte> bytes) {
  if (!bytes.empty()) EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size());
}

void Sha256::update(std::string_view text) {
  update(std::as_bytes(std::span(text.data(), text.size())));
}

std::string Sha256::hex_digest() {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 15]);
  }
  EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr);
  return out;
}

std::string sha256_hex(std::span<const std::byte> bytes) {
  Sha256 h;
  h.update(bytes);
  return h.hex_digest();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::kMissingInput, "cannot open " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    h.update(std::as_bytes(std::span(buf.data(), got)));
  }
  return h.hex_digest();
}

}  // namespace semgan
