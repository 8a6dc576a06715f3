#include "semgan/models.hpp"

#include <cmath>
#include <string>

#include "semgan/errors.hpp"

namespace semgan {
namespace {

constexpr double kReluGain = 1.4142135623730951;
constexpr double kLeakySlope = 0.2;
// Keeps the freshly initialised generator close to its skip path.
constexpr double kGeneratorHeadGain = 0.1;
// atanh is evaluated on inputs clamped to +-(1 - 1e-3).
constexpr double kSkipBound = 1.0 - 1e-3;

void positive(int value, const char* what) {
  if (value < 1) {
    throw Error(ErrorCategory::kValidation,
                std::string(what) + " must be >= 1, got " + std::to_string(value));
  }
}

}  // namespace

void GeneratorSpec::validate() const {
  positive(base_channels, "generator.base_channels");
  positive(num_residual_blocks, "generator.num_residual_blocks");
  positive(downsampling_stages, "generator.downsampling_stages");
  if (!std::isfinite(residual_init)) {
    throw Error(ErrorCategory::kValidation, "generator.residual_init must be finite");
  }
}

void DiscriminatorSpec::validate() const {
  positive(base_channels, "discriminator.base_channels");
  positive(encoder_stages, "discriminator.encoder_stages");
  if (num_classes < 2) {
    throw Error(ErrorCategory::kValidation, "discriminator.num_classes must be >= 2");
  }
}

void SegmenterSpec::validate() const {
  positive(base_channels, "segmenter.base_channels");
  positive(encoder_stages, "segmenter.encoder_stages");
  if (num_classes < 2) {
    throw Error(ErrorCategory::kValidation, "segmenter.num_classes must be >= 2");
  }
}

void check_divisible(int height, int width, int stages, const char* what) {
  const int factor = 1 << stages;
  if (height % factor != 0 || width % factor != 0) {
    throw Error(ErrorCategory::kValidation,
                std::string(what) + ": input " + std::to_string(height) + "x" +
                    std::to_string(width) + " is not divisible by " +
                    std::to_string(factor) + "; pad or crop the images");
  }
}

// ---------------------------------------------------------------- Generator

template <typename T>
Generator<T>::Generator(const GeneratorSpec& spec, std::uint64_t seed)
    : spec_(spec), gain_("residual_gain", Shape::scalar()) {
  spec_.validate();
  const int b = spec_.base_channels;
  const int stages = spec_.downsampling_stages;
  convs_.reserve(2 + 2 * stages + 2 * spec_.num_residual_blocks);
  convs_.emplace_back("stem", 3, b, 3, 1, 1);
  for (int s = 0; s < stages; ++s) {
    convs_.emplace_back("down" + std::to_string(s), b << s, b << (s + 1), 3, 2, 1);
  }
  const int inner = b << stages;
  for (int r = 0; r < spec_.num_residual_blocks; ++r) {
    convs_.emplace_back("res" + std::to_string(r) + ".a", inner, inner, 3, 1, 1);
    convs_.emplace_back("res" + std::to_string(r) + ".b", inner, inner, 3, 1, 1);
  }
  for (int s = stages; s > 0; --s) {
    convs_.emplace_back("up" + std::to_string(stages - s), b << s, b << (s - 1),
                        3, 1, 1);
  }
  convs_.emplace_back("head", b, 3, 3, 1, 1);

  Rng rng = make_rng({seed, 0x67656eULL});
  for (std::size_t i = 0; i + 1 < convs_.size(); ++i) convs_[i].init(rng, kReluGain);
  convs_.back().init(rng, kGeneratorHeadGain);
  gain_.value.fill(static_cast<T>(spec_.residual_init));
}

template <typename T>
Var Generator<T>::forward(Graph<T>& g, Var x) {
  const Shape xs = g.value(x).shape();
  if (xs.c != 3) {
    throw Error(ErrorCategory::kValidation, "generator expects 3 channels, got " +
                                                std::to_string(xs.c));
  }
  check_divisible(xs.h, xs.w, spec_.downsampling_stages, "generator");
  const int stages = spec_.downsampling_stages;
  std::size_t li = 0;
  Var h = g.relu(g.instance_norm(convs_[li++](g, x)));
  for (int s = 0; s < stages; ++s) {
    h = g.relu(g.instance_norm(convs_[li++](g, h)));
  }
  for (int r = 0; r < spec_.num_residual_blocks; ++r) {
    Var branch = g.relu(g.instance_norm(convs_[li++](g, h)));
    branch = g.instance_norm(convs_[li++](g, branch));
    h = g.add(h, branch);
  }
  for (int s = 0; s < stages; ++s) {
    h = g.relu(g.instance_norm(convs_[li++](g, g.upsample2x(h))));
  }
  Var residual = convs_[li++](g, h);
  Var skip = g.atanh(x, static_cast<T>(kSkipBound));
  return g.tanh(g.add(skip, g.scale(residual, g.param(gain_))));
}

template <typename T>
std::vector<Parameter<T>*> Generator<T>::parameters() {
  std::vector<Parameter<T>*> out;
  collect(convs_, out);
  out.push_back(&gain_);
  return out;
}

template <typename T>
std::size_t Generator<T>::parameter_count() {
  return count_parameters(parameters());
}

// --------------------------------------------------------------------- UNet

template <typename T>
UNet<T>::UNet(const std::string& prefix, int base_channels, int stages,
              int num_classes)
    : stages_(stages) {
  const int b = base_channels;
  encoder_.reserve(stages + 1);
  decoder_.reserve(stages + 1);
  encoder_.emplace_back(prefix + "enc0", 3, b, 3, 1, 1);
  for (int s = 1; s <= stages; ++s) {
    encoder_.emplace_back(prefix + "enc" + std::to_string(s), b << (s - 1),
                          b << s, 3, 2, 1);
  }
  for (int s = stages; s >= 1; --s) {
    decoder_.emplace_back(prefix + "dec" + std::to_string(s - 1),
                          (b << s) + (b << (s - 1)), b << (s - 1), 3, 1, 1);
  }
  decoder_.emplace_back(prefix + "classifier", b, num_classes, 1, 1, 0);
}

template <typename T>
void UNet<T>::init(Rng& rng) {
  const double gain = std::sqrt(2.0 / (1.0 + kLeakySlope * kLeakySlope));
  for (auto& c : encoder_) c.init(rng, gain);
  for (std::size_t i = 0; i + 1 < decoder_.size(); ++i) decoder_[i].init(rng, gain);
  decoder_.back().init(rng, 1.0);
}

template <typename T>
std::vector<Var> UNet<T>::encode(Graph<T>& g, Var x) {
  std::vector<Var> features;
  Var h = x;
  for (auto& conv : encoder_) {
    h = g.leaky_relu(conv(g, h), static_cast<T>(kLeakySlope));
    features.push_back(h);
  }
  return features;
}

template <typename T>
Var UNet<T>::decode(Graph<T>& g, const std::vector<Var>& features) {
  Var h = features.back();
  for (int i = 0; i < stages_; ++i) {
    const Var skip = features[stages_ - 1 - i];
    h = g.concat_channels(g.upsample2x(h), skip);
    h = g.leaky_relu(decoder_[i](g, h), static_cast<T>(kLeakySlope));
  }
  return decoder_.back()(g, h);
}

template <typename T>
int UNet<T>::deepest_channels() const {
  return encoder_.back().out_channels();
}

template <typename T>
void UNet<T>::collect_encoder(std::vector<Parameter<T>*>& out) {
  collect(encoder_, out);
}

template <typename T>
void UNet<T>::collect_decoder(std::vector<Parameter<T>*>& out) {
  collect(decoder_, out);
}

// ------------------------------------------------------------ Discriminator

template <typename T>
Discriminator<T>::Discriminator(const DiscriminatorSpec& spec, std::uint64_t seed)
    : spec_(spec),
      unet_("", spec.base_channels, spec.encoder_stages, spec.num_classes) {
  spec_.validate();
  const int deep = unet_.deepest_channels();
  domain_head_.reserve(2);
  domain_head_.emplace_back("domain0", deep, deep, 3, 1, 1);
  domain_head_.emplace_back("domain1", deep, 1, 3, 1, 1);
  Rng rng = make_rng({seed, 0x646973ULL});
  unet_.init(rng);
  domain_head_[0].init(rng, std::sqrt(2.0 / (1.0 + kLeakySlope * kLeakySlope)));
  domain_head_[1].init(rng, 1.0);
}

template <typename T>
DiscriminatorOutput Discriminator<T>::forward(Graph<T>& g, Var x, Heads heads) {
  const Shape xs = g.value(x).shape();
  check_divisible(xs.h, xs.w, spec_.encoder_stages, "discriminator");
  DiscriminatorOutput out;
  std::vector<Var> features = unet_.encode(g, x);
  if (heads != Heads::kSegmentation) {
    Var h = g.leaky_relu(domain_head_[0](g, features.back()),
                         static_cast<T>(kLeakySlope));
    out.score = g.sigmoid(domain_head_[1](g, h));
  }
  if (heads != Heads::kDomain) {
    if (!spec_.segmentation_head) {
      throw Error(ErrorCategory::kSpecMismatch,
                  "segmentation head requested but disabled in the spec");
    }
    out.seg_logits = unet_.decode(g, features);
  }
  return out;
}

template <typename T>
std::vector<Parameter<T>*> Discriminator<T>::encoder_parameters() {
  std::vector<Parameter<T>*> out;
  unet_.collect_encoder(out);
  return out;
}

template <typename T>
std::vector<Parameter<T>*> Discriminator<T>::domain_head_parameters() {
  std::vector<Parameter<T>*> out;
  collect(domain_head_, out);
  return out;
}

template <typename T>
std::vector<Parameter<T>*> Discriminator<T>::segmentation_head_parameters() {
  std::vector<Parameter<T>*> out;
  if (spec_.segmentation_head) unet_.collect_decoder(out);
  return out;
}

template <typename T>
std::vector<Parameter<T>*> Discriminator<T>::parameters() {
  std::vector<Parameter<T>*> out = encoder_parameters();
  for (auto* p : domain_head_parameters()) out.push_back(p);
  if (spec_.segmentation_head) {
    for (auto* p : segmentation_head_parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
std::size_t Discriminator<T>::parameter_count() {
  return count_parameters(parameters());
}

// ---------------------------------------------------------------- Segmenter

template <typename T>
Segmenter<T>::Segmenter(const SegmenterSpec& spec, std::uint64_t seed)
    : spec_(spec),
      unet_("", spec.base_channels, spec.encoder_stages, spec.num_classes) {
  spec_.validate();
  Rng rng = make_rng({seed, 0x736567ULL});
  unet_.init(rng);
}

template <typename T>
Var Segmenter<T>::forward(Graph<T>& g, Var x) {
  const Shape xs = g.value(x).shape();
  check_divisible(xs.h, xs.w, spec_.encoder_stages, "segmenter");
  return unet_.decode(g, unet_.encode(g, x));
}

template <typename T>
std::vector<Parameter<T>*> Segmenter<T>::parameters() {
  std::vector<Parameter<T>*> out;
  unet_.collect_encoder(out);
  unet_.collect_decoder(out);
  return out;
}

template class Generator<float>;
template class Generator<double>;
template class UNet<float>;
template class UNet<double>;
template class Discriminator<float>;
template class Discriminator<double>;
template class Segmenter<float>;
template class Segmenter<double>;

}  // namespace semgan
