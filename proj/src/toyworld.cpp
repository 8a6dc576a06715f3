#include "semgan/toyworld.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "semgan/errors.hpp"
#include "semgan/json_util.hpp"

namespace semgan {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSceneTag = 0x7363656e65ULL;

const std::array<std::array<double, 3>, 5> kSourceBase = {{
    {0.55, 0.55, 0.55},
    {0.85, 0.25, 0.20},
    {0.25, 0.70, 0.25},
    {0.20, 0.35, 0.85},
    {0.90, 0.80, 0.25},
}};

std::array<double, 3> hue_color(int index) {
  // Golden-angle hue walk at fixed saturation/value for classes beyond the
  // base palette.
  const double h = std::fmod(index * 0.381966, 1.0) * 6.0;
  const double s = 0.7, v = 0.85;
  const double c = v * s;
  const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  const double m = v - c;
  std::array<double, 3> rgb{};
  switch (static_cast<int>(h)) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  return {rgb[0] + m, rgb[1] + m, rgb[2] + m};
}

std::array<double, 3> source_color(int c) {
  return c < static_cast<int>(kSourceBase.size()) ? kSourceBase[c] : hue_color(c);
}

// The target palette is a darker, warmer, lower-contrast remap of the
// source palette.
std::array<double, 3> target_color(int c) {
  const auto s = source_color(c);
  const std::array<double, 3> shift = {0.06, 0.0, -0.04};
  std::array<double, 3> t{};
  for (int k = 0; k < 3; ++k) t[k] = std::clamp(0.12 + 0.62 * s[k] + shift[k], 0.0, 1.0);
  return t;
}

struct Point {
  double x, y;
};

double edge(const Point& a, const Point& b, double px, double py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

void write_json(const fs::path& file, const json& doc) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCategory::kIo, "cannot write " + file.string());
}

std::string sample_id(std::uint64_t index) {
  std::string s = std::to_string(index);
  return std::string(s.size() < 6 ? 6 - s.size() : 0, '0') + s;
}

}  // namespace

void SceneSpec::validate() const {
  if (image_size < 16) {
    throw Error(ErrorCategory::kValidation, "scene.image_size must be >= 16");
  }
  if (num_classes < 2 || num_classes > 255) {
    throw Error(ErrorCategory::kValidation, "scene.num_classes must be in [2,255]");
  }
  if (min_shapes < 0 || max_shapes < min_shapes) {
    throw Error(ErrorCategory::kValidation, "scene shape_count_range is invalid");
  }
  if (!(class_frequency_skew >= 1.0)) {
    throw Error(ErrorCategory::kValidation, "scene.class_frequency_skew must be >= 1");
  }
}

void DomainStyle::validate(int num_classes) const {
  if (static_cast<int>(palette.size()) < num_classes) {
    throw Error(ErrorCategory::kValidation, "style palette has fewer colors than classes");
  }
  for (const auto& color : palette) {
    for (double v : color) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCategory::kValidation, "style palette values must be in [0,1]");
      }
    }
  }
  if (!(texture_amplitude >= 0.0 && texture_amplitude <= 1.0)) {
    throw Error(ErrorCategory::kValidation, "style.texture_amplitude must be in [0,1]");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(ErrorCategory::kValidation, "style.noise_sigma must be >= 0");
  }
  if (!(illumination_gradient >= 0.0 && illumination_gradient <= 1.0)) {
    throw Error(ErrorCategory::kValidation, "style.illumination_gradient must be in [0,1]");
  }
}

DomainStyle default_source_style(int num_classes) {
  DomainStyle style;
  for (int c = 0; c < num_classes; ++c) style.palette.push_back(source_color(c));
  return style;
}

DomainStyle default_target_style(int num_classes) {
  DomainStyle style;
  for (int c = 0; c < num_classes; ++c) style.palette.push_back(target_color(c));
  style.texture_amplitude = 0.25;
  style.noise_sigma = 0.06;
  style.illumination_gradient = 0.35;
  return style;
}

ClassCatalog toy_catalog(const SceneSpec& spec, const DomainStyle& display) {
  ClassCatalog catalog;
  for (int c = 0; c < spec.num_classes; ++c) {
    ClassEntry e;
    e.id = c;
    e.name = c == 0 ? "background" : "class_" + std::to_string(c);
    for (int k = 0; k < 3; ++k) {
      e.color[k] = static_cast<std::uint8_t>(std::lround(display.palette[c][k] * 255.0));
    }
    catalog.entries.push_back(e);
  }
  return catalog;
}

LabelMap generate_scene(const SceneSpec& spec, std::uint64_t index) {
  spec.validate();
  Rng rng = make_rng({spec.seed, index, kSceneTag});
  const int size = spec.image_size;
  LabelMap map{size, size,
               std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size, 0)};

  std::vector<double> cumulative;
  double total = 0.0;
  for (int c = 1; c < spec.num_classes; ++c) {
    total += std::pow(spec.class_frequency_skew, -(c - 1));
    cumulative.push_back(total);
  }

  const int count = static_cast<int>(uniform_int(rng, spec.min_shapes, spec.max_shapes));
  for (int s = 0; s < count; ++s) {
    const double pick = uniform01(rng) * total;
    const int cls =
        1 + static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
                             cumulative.begin());
    const int kind = static_cast<int>(uniform_index(rng, 3));
    const double r = uniform_real(rng, 0.08, 0.22) * size;
    const double cx = uniform_real(rng, 0.0, size);
    const double cy = uniform_real(rng, 0.0, size);
    const double hw = uniform_real(rng, 0.5, 1.0) * r;
    const double hh = uniform_real(rng, 0.5, 1.0) * r;
    const double theta = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
    Point tri[3];
    for (int k = 0; k < 3; ++k) {
      const double a = theta + k * 2.0 * std::numbers::pi / 3.0 +
                       uniform_real(rng, -0.4, 0.4);
      const double rr = r * uniform_real(rng, 0.7, 1.2);
      tri[k] = {cx + rr * std::cos(a), cy + rr * std::sin(a)};
    }
    const std::uint8_t id = static_cast<std::uint8_t>(std::min(cls, spec.num_classes - 1));
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        bool inside = false;
        if (kind == 0) {
          inside = std::abs(px - cx) <= hw && std::abs(py - cy) <= hh;
        } else if (kind == 1) {
          inside = (px - cx) * (px - cx) + (py - cy) * (py - cy) <= r * r;
        } else {
          const double e0 = edge(tri[0], tri[1], px, py);
          const double e1 = edge(tri[1], tri[2], px, py);
          const double e2 = edge(tri[2], tri[0], px, py);
          inside = (e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0);
        }
        if (inside) map.ids[static_cast<std::size_t>(y) * size + x] = id;
      }
    }
  }
  return map;
}

Rng render_rng(const SceneSpec& spec, std::uint64_t index, std::uint64_t domain_tag) {
  return make_rng({spec.seed, index, domain_tag});
}

RgbImage render(const LabelMap& scene, const DomainStyle& style, Rng& rng) {
  int max_id = 0;
  for (auto id : scene.ids) max_id = std::max<int>(max_id, id);
  style.validate(max_id + 1);
  const int num_classes = static_cast<int>(style.palette.size());

  // Draw order is fixed regardless of style so that two renders from equal
  // streams differ only by the style's amplitudes.
  std::vector<double> phase(num_classes);
  for (auto& p : phase) p = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
  const double light_angle = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
  const double lc = std::cos(light_angle), ls = std::sin(light_angle);
  const double light_norm = 0.5 * (std::abs(lc) + std::abs(ls));

  RgbImage img;
  img.height = scene.height;
  img.width = scene.width;
  img.pixels.resize(static_cast<std::size_t>(scene.height) * scene.width * 3);
  for (int y = 0; y < scene.height; ++y) {
    for (int x = 0; x < scene.width; ++x) {
      const int c = scene.at(y, x);
      const double orient = c * 1.1;
      const double period = 3.0 + 1.5 * (c % 4);
      const double tex = std::sin(2.0 * std::numbers::pi *
                                      (x * std::cos(orient) + y * std::sin(orient)) / period +
                                  phase[c]);
      const double u = scene.width > 1 ? static_cast<double>(x) / (scene.width - 1) - 0.5 : 0.0;
      const double v = scene.height > 1 ? static_cast<double>(y) / (scene.height - 1) - 0.5 : 0.0;
      const double t = light_norm > 0 ? (u * lc + v * ls) / light_norm : 0.0;  // [-1, 1]
      const double light = 1.0 - style.illumination_gradient * 0.5 * (t + 1.0);
      const double modulation = (1.0 + style.texture_amplitude * tex) * light;
      for (int k = 0; k < 3; ++k) {
        const double noise = standard_normal(rng);
        const double value = style.palette[c][k] * modulation + style.noise_sigma * noise;
        img.pixels[(static_cast<std::size_t>(y) * scene.width + x) * 3 + k] =
            static_cast<float>(std::clamp(value, 0.0, 1.0));
      }
    }
  }
  return img;
}

std::vector<LabeledImage> generate_labeled(const SceneSpec& spec, const DomainStyle& style,
                                           std::uint64_t first_index, int count,
                                           std::uint64_t domain_tag) {
  std::vector<LabeledImage> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t index = first_index + i;
    LabeledImage sample;
    sample.id = sample_id(index);
    sample.labels = generate_scene(spec, index);
    Rng rng = render_rng(spec, index, domain_tag);
    sample.image = render(sample.labels, style, rng);
    out.push_back(std::move(sample));
  }
  return out;
}

DomainPairDataset generate_dataset(const SceneSpec& spec, const DomainStyle& source_style,
                                   const DomainStyle& target_style, int n_source,
                                   int n_target, int n_eval, const fs::path& root) {
  spec.validate();
  source_style.validate(spec.num_classes);
  target_style.validate(spec.num_classes);
  if (n_source <= 0 || n_target <= 0 || n_eval <= 0) {
    throw Error(ErrorCategory::kValidation, "sample counts must be positive");
  }
  if (source_style == target_style) {
    throw Error(ErrorCategory::kValidation,
                "source and target styles are identical; there is no domain gap");
  }
  DomainPairDataset ds;
  ds.catalog = toy_catalog(spec, source_style);
  ds.source = generate_labeled(spec, source_style, 0, n_source, kSourceTag);
  for (auto& s : generate_labeled(spec, target_style, n_source, n_target, kTargetTag)) {
    ds.target.push_back({s.id, std::move(s.image)});
  }
  ds.target_eval = generate_labeled(spec, target_style,
                                    static_cast<std::uint64_t>(n_source) + n_target, n_eval,
                                    kTargetTag);
  save_dataset(ds, root);
  write_json(root / "toyworld.json", {{"scene", spec},
                                      {"source_style", source_style},
                                      {"target_style", target_style},
                                      {"n_source", n_source},
                                      {"n_target", n_target},
                                      {"n_eval", n_eval}});
  return ds;
}

std::optional<ToyWorldManifest> read_toyworld_manifest(const fs::path& root) {
  const fs::path file = root / "toyworld.json";
  if (!fs::exists(file)) return std::nullopt;
  std::ifstream in(file);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCategory::kCorrupt, "malformed " + file.string());
  }
  ToyWorldManifest m;
  m.spec = doc.at("scene").get<SceneSpec>();
  m.source_style = doc.at("source_style").get<DomainStyle>();
  m.target_style = doc.at("target_style").get<DomainStyle>();
  m.n_source = doc.at("n_source").get<int>();
  m.n_target = doc.at("n_target").get<int>();
  m.n_eval = doc.at("n_eval").get<int>();
  return m;
}

void to_json(json& j, const SceneSpec& s) {
  j = {{"image_size", s.image_size},
       {"num_classes", s.num_classes},
       {"min_shapes", s.min_shapes},
       {"max_shapes", s.max_shapes},
       {"class_frequency_skew", s.class_frequency_skew},
       {"seed", s.seed}};
}

void from_json(const json& j, SceneSpec& s) {
  const std::string sec = "scene";
  check_keys(j, {"image_size", "num_classes", "min_shapes", "max_shapes",
                 "class_frequency_skew", "seed"}, sec);
  read_field(j, "image_size", s.image_size, sec);
  read_field(j, "num_classes", s.num_classes, sec);
  read_field(j, "min_shapes", s.min_shapes, sec);
  read_field(j, "max_shapes", s.max_shapes, sec);
  read_field(j, "class_frequency_skew", s.class_frequency_skew, sec);
  read_field(j, "seed", s.seed, sec);
}

void to_json(json& j, const DomainStyle& s) {
  j = {{"palette", s.palette},
       {"texture_amplitude", s.texture_amplitude},
       {"noise_sigma", s.noise_sigma},
       {"illumination_gradient", s.illumination_gradient}};
}

void from_json(const json& j, DomainStyle& s) {
  const std::string sec = "style";
  check_keys(j, {"palette", "texture_amplitude", "noise_sigma", "illumination_gradient"}, sec);
  read_field(j, "palette", s.palette, sec);
  read_field(j, "texture_amplitude", s.texture_amplitude, sec);
  read_field(j, "noise_sigma", s.noise_sigma, sec);
  read_field(j, "illumination_gradient", s.illumination_gradient, sec);
}

}  // namespace semgan
