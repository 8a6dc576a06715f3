#include "semgan/config.hpp"

#include <fstream>

#include "semgan/errors.hpp"
#include "semgan/json_util.hpp"

namespace semgan {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Runs validate() and reports failures as config errors.
template <typename C>
void validated(const C& c, const std::string& section) {
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCategory::kInvalidConfig, section + ": " + e.what());
  }
}

std::vector<std::string> arm_strings(const std::vector<AblationArm>& arms) {
  std::vector<std::string> out;
  for (auto a : arms) out.emplace_back(1, arm_letter(a));
  return out;
}

}  // namespace

void to_json(json& j, const LossWeights& w) {
  j = {{"lambda_sem", w.lambda_sem}, {"lambda_rec", w.lambda_rec}};
}

void from_json(const json& j, LossWeights& w) {
  const std::string sec = "weights";
  check_keys(j, {"lambda_sem", "lambda_rec"}, sec);
  read_field(j, "lambda_sem", w.lambda_sem, sec);
  read_field(j, "lambda_rec", w.lambda_rec, sec);
}

void to_json(json& j, const GeneratorSpec& s) {
  j = {{"base_channels", s.base_channels},
       {"num_residual_blocks", s.num_residual_blocks},
       {"downsampling_stages", s.downsampling_stages},
       {"residual_init", s.residual_init}};
}

void from_json(const json& j, GeneratorSpec& s) {
  const std::string sec = "generator";
  check_keys(j, {"base_channels", "num_residual_blocks", "downsampling_stages",
                 "residual_init"}, sec);
  read_field(j, "base_channels", s.base_channels, sec);
  read_field(j, "num_residual_blocks", s.num_residual_blocks, sec);
  read_field(j, "downsampling_stages", s.downsampling_stages, sec);
  read_field(j, "residual_init", s.residual_init, sec);
}

void to_json(json& j, const DiscriminatorSpec& s) {
  j = {{"base_channels", s.base_channels},
       {"encoder_stages", s.encoder_stages},
       {"num_classes", s.num_classes},
       {"segmentation_head", s.segmentation_head}};
}

void from_json(const json& j, DiscriminatorSpec& s) {
  const std::string sec = "discriminator";
  check_keys(j, {"base_channels", "encoder_stages", "num_classes", "segmentation_head"}, sec);
  read_field(j, "base_channels", s.base_channels, sec);
  read_field(j, "encoder_stages", s.encoder_stages, sec);
  read_field(j, "num_classes", s.num_classes, sec);
  read_field(j, "segmentation_head", s.segmentation_head, sec);
}

void to_json(json& j, const SegmenterSpec& s) {
  j = {{"base_channels", s.base_channels},
       {"encoder_stages", s.encoder_stages},
       {"num_classes", s.num_classes}};
}

void from_json(const json& j, SegmenterSpec& s) {
  const std::string sec = "segmenter.model";
  check_keys(j, {"base_channels", "encoder_stages", "num_classes"}, sec);
  read_field(j, "base_channels", s.base_channels, sec);
  read_field(j, "encoder_stages", s.encoder_stages, sec);
  read_field(j, "num_classes", s.num_classes, sec);
}

void to_json(json& j, const TrainConfig& c) {
  j = {{"weights", c.weights},
       {"learning_rate", c.learning_rate},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"batch_size", c.batch_size},
       {"total_steps", c.total_steps},
       {"crop_size", c.crop_size},
       {"seed", c.seed},
       {"ablation_arm", std::string(1, arm_letter(c.ablation_arm))},
       {"saturating_adv", c.saturating_adv},
       {"log_interval", c.log_interval},
       {"snapshot_interval", c.snapshot_interval},
       {"generator", c.generator},
       {"discriminator", c.discriminator}};
}

void from_json(const json& j, TrainConfig& c) {
  const std::string sec = "train";
  check_keys(j, {"weights", "learning_rate", "beta1", "beta2", "batch_size", "total_steps",
                 "crop_size", "seed", "ablation_arm", "saturating_adv", "log_interval",
                 "snapshot_interval", "generator", "discriminator"}, sec);
  read_field(j, "weights", c.weights, sec);
  read_field(j, "learning_rate", c.learning_rate, sec);
  read_field(j, "beta1", c.beta1, sec);
  read_field(j, "beta2", c.beta2, sec);
  read_field(j, "batch_size", c.batch_size, sec);
  read_field(j, "total_steps", c.total_steps, sec);
  read_field(j, "crop_size", c.crop_size, sec);
  read_field(j, "seed", c.seed, sec);
  std::string arm(1, arm_letter(c.ablation_arm));
  read_field(j, "ablation_arm", arm, sec);
  try {
    c.ablation_arm = parse_arm(arm);
  } catch (const Error& e) {
    throw Error(ErrorCategory::kInvalidConfig, sec + ".ablation_arm: " + e.what());
  }
  read_field(j, "saturating_adv", c.saturating_adv, sec);
  read_field(j, "log_interval", c.log_interval, sec);
  read_field(j, "snapshot_interval", c.snapshot_interval, sec);
  read_field(j, "generator", c.generator, sec);
  read_field(j, "discriminator", c.discriminator, sec);
  validated(c, sec);
}

void to_json(json& j, const SegTrainConfig& c) {
  j = {{"iterations", c.iterations},     {"batch_size", c.batch_size},
       {"learning_rate", c.learning_rate}, {"crop_size", c.crop_size},
       {"seed", c.seed},                 {"log_interval", c.log_interval},
       {"model", c.segmenter}};
}

void from_json(const json& j, SegTrainConfig& c) {
  const std::string sec = "segmenter";
  check_keys(j, {"iterations", "batch_size", "learning_rate", "crop_size", "seed",
                 "log_interval", "model"}, sec);
  read_field(j, "iterations", c.iterations, sec);
  read_field(j, "batch_size", c.batch_size, sec);
  read_field(j, "learning_rate", c.learning_rate, sec);
  read_field(j, "crop_size", c.crop_size, sec);
  read_field(j, "seed", c.seed, sec);
  read_field(j, "log_interval", c.log_interval, sec);
  read_field(j, "model", c.segmenter, sec);
  validated(c, sec);
}

void DataConfig::validate() const {
  scene.validate();
  if (n_source < 1 || n_target < 1 || n_eval < 0) {
    throw Error(ErrorCategory::kValidation, "data: sample counts must be positive");
  }
  if (source_style) source_style->validate(scene.num_classes);
  if (target_style) target_style->validate(scene.num_classes);
}

void to_json(json& j, const DataConfig& c) {
  j = {{"scene", c.scene},
       {"n_source", c.n_source},
       {"n_target", c.n_target},
       {"n_eval", c.n_eval}};
  if (c.source_style) j["source_style"] = *c.source_style;
  if (c.target_style) j["target_style"] = *c.target_style;
}

void from_json(const json& j, DataConfig& c) {
  const std::string sec = "data";
  check_keys(j, {"scene", "n_source", "n_target", "n_eval", "source_style", "target_style"},
             sec);
  read_field(j, "scene", c.scene, sec);
  read_field(j, "n_source", c.n_source, sec);
  read_field(j, "n_target", c.n_target, sec);
  read_field(j, "n_eval", c.n_eval, sec);
  if (j.contains("source_style")) c.source_style = j.at("source_style").get<DomainStyle>();
  if (j.contains("target_style")) c.target_style = j.at("target_style").get<DomainStyle>();
  validated(c, sec);
}

void to_json(json& j, const AblationConfig& c) {
  j = {{"arms", arm_strings(c.arms)},
       {"seeds", c.seeds},
       {"gan", c.gan},
       {"segmenter", c.seg},
       {"preservation", c.preservation},
       {"oracle_images", c.oracle_images},
       {"oracle", c.oracle},
       {"jobs", c.jobs}};
}

void from_json(const json& j, AblationConfig& c) {
  const std::string sec = "ablation";
  check_keys(j, {"arms", "seeds", "gan", "segmenter", "preservation", "oracle_images",
                 "oracle", "jobs"}, sec);
  if (j.contains("arms")) {
    std::vector<std::string> arms;
    read_field(j, "arms", arms, sec);
    c.arms.clear();
    try {
      for (const auto& a : arms) c.arms.push_back(parse_arm(a));
    } catch (const Error& e) {
      throw Error(ErrorCategory::kInvalidConfig, sec + ".arms: " + e.what());
    }
  }
  read_field(j, "seeds", c.seeds, sec);
  read_field(j, "gan", c.gan, sec);
  read_field(j, "segmenter", c.seg, sec);
  read_field(j, "preservation", c.preservation, sec);
  read_field(j, "oracle_images", c.oracle_images, sec);
  read_field(j, "oracle", c.oracle, sec);
  read_field(j, "jobs", c.jobs, sec);
  validated(c, sec);
}

json read_json_file(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(ErrorCategory::kConfigNotFound, "config not found: " + path.string());
  }
  std::ifstream in(path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCategory::kInvalidConfig, "malformed JSON in " + path.string());
  }
  return j;
}

ConfigFile parse_config(const json& j) {
  check_keys(j, {"data", "train", "segmenter", "ablation"}, "config");
  ConfigFile c;
  c.raw = j;
  if (j.contains("data")) c.data = j.at("data").get<DataConfig>();
  if (j.contains("train")) c.train = j.at("train").get<TrainConfig>();
  if (j.contains("segmenter")) c.segmenter = j.at("segmenter").get<SegTrainConfig>();
  if (j.contains("ablation")) c.ablation = j.at("ablation").get<AblationConfig>();
  return c;
}

ConfigFile load_config(const fs::path& path) {
  json j = read_json_file(path);
  // A run manifest carries its effective config under "config".
  if (j.is_object() && j.contains("command") && j.contains("config")) j = j.at("config");
  return parse_config(j);
}

void apply_override(json& section, const std::string& dotted_key, const std::string& text) {
  json* node = &section;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string key = dotted_key.substr(start, dot - start);
    if (key.empty()) {
      throw Error(ErrorCategory::kUnknownFlag, "malformed override key '" + dotted_key + "'");
    }
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      json value = json::parse(text, nullptr, false);
      (*node)[key] = value.is_discarded() ? json(text) : value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace semgan
