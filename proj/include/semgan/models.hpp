#pragma once

// Generators (residual encoder-decoders with a global skip) and dual-head
// discriminators (U-Net encoder shared by a patch domain-score head and a
// segmentation decoder). Images enter the models in [-1, 1].

#include <cstdint>
#include <string>
#include <vector>

#include "semgan/graph.hpp"
#include "semgan/layers.hpp"

namespace semgan {

struct GeneratorSpec {
  int base_channels = 32;
  int num_residual_blocks = 4;
  int downsampling_stages = 2;
  // Initial value of the learnable gain on the residual branch. Zero makes
  // the freshly built generator an identity map.
  double residual_init = 1.0;

  void validate() const;
  bool operator==(const GeneratorSpec&) const = default;
};

struct DiscriminatorSpec {
  int base_channels = 16;
  int encoder_stages = 2;
  int num_classes = 5;
  bool segmentation_head = true;

  void validate() const;
  bool operator==(const DiscriminatorSpec&) const = default;
};

// Downstream segmentation network; same encoder-decoder as the
// discriminator's segmentation branch.
struct SegmenterSpec {
  int base_channels = 16;
  int encoder_stages = 2;
  int num_classes = 5;

  void validate() const;
  bool operator==(const SegmenterSpec&) const = default;
};

// Throws ValidationError unless height and width are divisible by
// 2^stages.
void check_divisible(int height, int width, int stages, const char* what);

template <typename T>
class Generator {
 public:
  Generator(const GeneratorSpec& spec, std::uint64_t seed);

  // x: N x 3 x H x W in [-1, 1]; returns the same shape in (-1, 1).
  Var forward(Graph<T>& g, Var x);

  const GeneratorSpec& spec() const { return spec_; }
  std::vector<Parameter<T>*> parameters();
  std::size_t parameter_count();

 private:
  GeneratorSpec spec_;
  std::vector<Conv2d<T>> convs_;
  Parameter<T> gain_;
};

enum class Heads { kDomain, kSegmentation, kBoth };

struct DiscriminatorOutput {
  Var score;       // N x 1 x h x w probabilities
  Var seg_logits;  // N x C x H x W
};

template <typename T>
class UNet {
 public:
  UNet(const std::string& prefix, int base_channels, int stages,
       int num_classes);

  void init(Rng& rng);
  // Returns the encoder feature maps, shallowest first.
  std::vector<Var> encode(Graph<T>& g, Var x);
  Var decode(Graph<T>& g, const std::vector<Var>& features);

  int deepest_channels() const;
  void collect_encoder(std::vector<Parameter<T>*>& out);
  void collect_decoder(std::vector<Parameter<T>*>& out);

 private:
  int stages_;
  std::vector<Conv2d<T>> encoder_;
  std::vector<Conv2d<T>> decoder_;
};

template <typename T>
class Discriminator {
 public:
  Discriminator(const DiscriminatorSpec& spec, std::uint64_t seed);

  DiscriminatorOutput forward(Graph<T>& g, Var x, Heads heads);

  const DiscriminatorSpec& spec() const { return spec_; }
  std::vector<Parameter<T>*> parameters();
  std::vector<Parameter<T>*> encoder_parameters();
  std::vector<Parameter<T>*> domain_head_parameters();
  std::vector<Parameter<T>*> segmentation_head_parameters();
  std::size_t parameter_count();

 private:
  DiscriminatorSpec spec_;
  UNet<T> unet_;
  std::vector<Conv2d<T>> domain_head_;
};

template <typename T>
class Segmenter {
 public:
  Segmenter(const SegmenterSpec& spec, std::uint64_t seed);

  Var forward(Graph<T>& g, Var x);

  const SegmenterSpec& spec() const { return spec_; }
  std::vector<Parameter<T>*> parameters();

 private:
  SegmenterSpec spec_;
  UNet<T> unet_;
};

template <typename T>
std::size_t count_parameters(const std::vector<Parameter<T>*>& params) {
  std::size_t total = 0;
  for (const auto* p : params) total += p->value.size();
  return total;
}

extern template class Generator<float>;
extern template class Generator<double>;
extern template class UNet<float>;
extern template class UNet<double>;
extern template class Discriminator<float>;
extern template class Discriminator<double>;
extern template class Segmenter<float>;
extern template class Segmenter<double>;

}  // namespace semgan
