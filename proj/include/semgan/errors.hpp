#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semgan {

enum class ErrorCategory {
  kStructural,      // dataset or run directory layout is wrong
  kValidation,      // data violates an invariant (labels, sizes, ranges)
  kSpecMismatch,    // snapshot/model spec disagreement
  kNonFinite,       // NaN or Inf in a loss term
  kCorrupt,         // unreadable or tampered file
  kConfigNotFound,
  kInvalidConfig,
  kMissingInput,
  kUnknownFlag,
  kIo,
};

std::string_view category_name(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace semgan
