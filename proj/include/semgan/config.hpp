#pragma once

// JSON forms of every config type. Parsing is strict: unknown keys and
// values of the wrong type are InvalidConfig errors, and validate() runs on
// the result.
//
// A config file is one object with optional sections:
//   { "data": {...}, "train": {...}, "segmenter": {...}, "ablation": {...} }

#include <filesystem>
#include <string>

#include <json.hpp>

#include "semgan/losses.hpp"
#include "semgan/models.hpp"
#include "semgan/segmenter_eval.hpp"
#include "semgan/toyworld.hpp"
#include "semgan/trainer.hpp"

namespace semgan {

void to_json(nlohmann::json& j, const LossWeights& w);
void from_json(const nlohmann::json& j, LossWeights& w);
void to_json(nlohmann::json& j, const GeneratorSpec& s);
void from_json(const nlohmann::json& j, GeneratorSpec& s);
void to_json(nlohmann::json& j, const DiscriminatorSpec& s);
void from_json(const nlohmann::json& j, DiscriminatorSpec& s);
void to_json(nlohmann::json& j, const SegmenterSpec& s);
void from_json(const nlohmann::json& j, SegmenterSpec& s);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const SegTrainConfig& c);
void from_json(const nlohmann::json& j, SegTrainConfig& c);

// Dataset generation settings for the toy world.
struct DataConfig {
  SceneSpec scene;
  int n_source = 200;
  int n_target = 200;
  int n_eval = 50;
  std::optional<DomainStyle> source_style;  // default_source_style when unset
  std::optional<DomainStyle> target_style;

  void validate() const;
};
void to_json(nlohmann::json& j, const DataConfig& c);
void from_json(const nlohmann::json& j, DataConfig& c);

void to_json(nlohmann::json& j, const AblationConfig& c);
void from_json(const nlohmann::json& j, AblationConfig& c);

struct ConfigFile {
  DataConfig data;
  TrainConfig train;
  SegTrainConfig segmenter;
  AblationConfig ablation;
  nlohmann::json raw = nlohmann::json::object();
};

// Missing file -> ConfigNotFound; malformed -> InvalidConfig.
nlohmann::json read_json_file(const std::filesystem::path& path);
ConfigFile parse_config(const nlohmann::json& j);
// Accepts a config file or a run manifest.
ConfigFile load_config(const std::filesystem::path& path);

// Sets a (possibly dotted) key like "weights.lambda_sem" inside a section
// object from its command-line text, interpreting the text as JSON when it
// parses and as a string otherwise.
void apply_override(nlohmann::json& section, const std::string& dotted_key,
                    const std::string& text);

}  // namespace semgan
