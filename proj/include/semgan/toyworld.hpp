#pragma once

// Procedural paired-domain benchmark. Scenes are label maps built from
// randomly placed rectangles, circles and triangles; a DomainStyle turns a
// scene into an image. Two styles rendered over one scene distribution give
// a source/target pair whose only difference is appearance.

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "semgan/domain_data.hpp"

namespace semgan {

struct SceneSpec {
  int image_size = 64;
  int num_classes = 5;  // class 0 is background
  int min_shapes = 3;
  int max_shapes = 8;
  double class_frequency_skew = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const SceneSpec&) const = default;
};

struct DomainStyle {
  std::vector<std::array<double, 3>> palette;  // per class, RGB in [0,1]
  double texture_amplitude = 0.0;
  double noise_sigma = 0.0;
  double illumination_gradient = 0.0;

  void validate(int num_classes) const;
  bool operator==(const DomainStyle&) const = default;
};

// Flat, saturated colors: the synthetic-looking domain.
DomainStyle default_source_style(int num_classes);
// Darker, shifted palette with class textures, sensor noise and an
// illumination falloff: the real-looking domain.
DomainStyle default_target_style(int num_classes);

ClassCatalog toy_catalog(const SceneSpec& spec, const DomainStyle& display);

// Fully determined by (spec.seed, index).
LabelMap generate_scene(const SceneSpec& spec, std::uint64_t index);

RgbImage render(const LabelMap& scene, const DomainStyle& style, Rng& rng);

// Render stream for a scene in a given domain; tag 1 = source, 2 = target.
Rng render_rng(const SceneSpec& spec, std::uint64_t index, std::uint64_t domain_tag);

inline constexpr std::uint64_t kSourceTag = 1;
inline constexpr std::uint64_t kTargetTag = 2;
// Scenes reserved for auxiliary labeled sets (e.g. an oracle segmenter's
// training data) start here so they never coincide with dataset scenes.
inline constexpr std::uint64_t kAuxiliaryIndexBase = 1'000'000'000ULL;

struct ToyWorldManifest {
  SceneSpec spec;
  DomainStyle source_style;
  DomainStyle target_style;
  int n_source = 0;
  int n_target = 0;
  int n_eval = 0;
};

// Writes the dataset layout under root plus root/toyworld.json. Source
// scenes use indices [0, n_source), target [n_source, n_source + n_target),
// evaluation scenes follow.
DomainPairDataset generate_dataset(const SceneSpec& spec,
                                   const DomainStyle& source_style,
                                   const DomainStyle& target_style, int n_source,
                                   int n_target, int n_eval,
                                   const std::filesystem::path& root);

// Labeled images of fresh scenes rendered in one style.
std::vector<LabeledImage> generate_labeled(const SceneSpec& spec,
                                           const DomainStyle& style,
                                           std::uint64_t first_index, int count,
                                           std::uint64_t domain_tag);

// Reads root/toyworld.json; std::nullopt when the dataset is not a toy world.
std::optional<ToyWorldManifest> read_toyworld_manifest(const std::filesystem::path& root);

void to_json(nlohmann::json& j, const SceneSpec& s);
void from_json(const nlohmann::json& j, SceneSpec& s);
void to_json(nlohmann::json& j, const DomainStyle& s);
void from_json(const nlohmann::json& j, DomainStyle& s);

}  // namespace semgan
