#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "semgan/errors.hpp"

namespace semgan {

// Rejects keys outside `allowed` so misspelled config fields do not pass
// silently.
inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& section) {
  if (!j.is_object()) {
    throw Error(ErrorCategory::kInvalidConfig, section + ": expected an object");
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw Error(ErrorCategory::kInvalidConfig,
                  section + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename V>
void read_field(const nlohmann::json& j, const char* key, V& field,
                const std::string& section) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<V>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::kInvalidConfig,
                section + "." + key + ": " + e.what());
  }
}

}  // namespace semgan
