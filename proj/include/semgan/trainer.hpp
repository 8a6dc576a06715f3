#pragma once

// Alternating discriminator/generator optimisation of the semantic cycle
// GAN, and translation of a dataset with a trained generator.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semgan/domain_data.hpp"
#include "semgan/losses.hpp"
#include "semgan/models.hpp"
#include "semgan/optim.hpp"

namespace semgan {

// a: no translation; b: G_ST + dual-head D_T; c: b + weighted source
// reconstruction; d: plain cycle GAN; e: cycle + semantic heads + weighting.
enum class AblationArm { kA, kB, kC, kD, kE };

char arm_letter(AblationArm arm);
AblationArm parse_arm(const std::string& text);  // "a".."e"

struct TrainConfig {
  LossWeights weights;
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int batch_size = 2;
  int total_steps = 300000;
  int crop_size = 512;
  std::uint64_t seed = 0;
  AblationArm ablation_arm = AblationArm::kE;
  bool saturating_adv = false;
  int log_interval = 100;
  int snapshot_interval = 10000;
  GeneratorSpec generator;
  DiscriminatorSpec discriminator;

  void validate() const;
};

// What an arm actually optimises, derived from a TrainConfig.
struct ArmLayout {
  bool trains = true;         // false only for arm a
  bool cycle = true;          // second generator/discriminator pair
  bool semantic_head = true;  // segmentation heads and L_sem
  bool weighted = true;       // (1 - w) on the source reconstruction
  bool reconstruction = true; // any L_rec term at all
  LossWeights weights;        // effective lambdas

  static ArmLayout of(const TrainConfig& config);
};

// The generators and discriminators an arm needs. Arms b and c only hold
// G_ST and D_T.
template <typename T>
struct GanModels {
  GanModels(const TrainConfig& config, int num_classes);

  ArmLayout layout;
  std::optional<Generator<T>> g_st;
  std::optional<Generator<T>> g_ts;
  std::optional<Discriminator<T>> d_t;
  std::optional<Discriminator<T>> d_s;

  std::vector<Parameter<T>*> generator_parameters();
  std::vector<Parameter<T>*> discriminator_parameters();
  // Every parameter, names prefixed with the model role ("g_st/" etc).
  void save(SnapshotFile& file);
  void load(const SnapshotFile& file);
};

// Graph nodes of one forward pass.
template <typename T>
struct LossGraph {
  Var adv_st, adv_ts;
  Var g_adv_st, g_adv_ts;
  Var sem_st, sem_ts;
  Var rec;
  Var total_d, total_g;
};

// Builds every loss term for one batch. x_s and x_t are N x 3 x H x W in
// [-1, 1]; source_weight is (1 - w) as N x 1 x H x W.
template <typename T>
LossGraph<T> build_losses(Graph<T>& g, GanModels<T>& models, bool saturating_adv,
                          const Tensor<T>& x_s, const LabelBatch& y_s,
                          const Tensor<T>& x_t, const Tensor<T>& source_weight);

template <typename T>
LossBreakdown read_breakdown(const Graph<T>& g, const LossGraph<T>& losses);

// Source crops, their labels and (1 - w), plus target crops, as tensors.
struct GanBatch {
  Tensor<float> x_s;
  LabelBatch y_s;
  Tensor<float> source_weight;
  Tensor<float> x_t;
};

// Batch for a step is a pure function of (seed, step).
GanBatch assemble_batch(const DomainPairDataset& dataset, const ClassCatalog& weighted,
                        const TrainConfig& config, std::int64_t step);

Tensor<float> images_to_tensor(const std::vector<const RgbImage*>& images);
RgbImage tensor_to_image(const Tensor<float>& t, int n);

class GanTrainer {
 public:
  // catalog must carry corpus frequencies.
  GanTrainer(TrainConfig config, ClassCatalog catalog);

  // One D update on L_D followed by one G update on L_G; both gradients are
  // taken at the parameters the step started from. Throws NonFinite naming
  // the term and step.
  LossBreakdown train_step(const GanBatch& batch);
  LossBreakdown train_step(const std::vector<LabeledImage>& batch_s,
                           const std::vector<UnlabeledImage>& batch_t);

  std::int64_t step() const { return step_; }
  const TrainConfig& config() const { return config_; }
  const ClassCatalog& catalog() const { return catalog_; }
  GanModels<float>& models() { return models_; }

  void save(const std::filesystem::path& path);
  // Restores parameters, optimizer moments and the step counter. The
  // snapshot's config must match this trainer's model layout.
  void load(const std::filesystem::path& path);

 private:
  TrainConfig config_;
  ClassCatalog catalog_;
  GanModels<float> models_;
  Adam<float> opt_d_;
  Adam<float> opt_g_;
  std::int64_t step_ = 0;
};

struct TrainOptions {
  std::filesystem::path run_dir;  // manifest, log.jsonl, snapshots/
  std::optional<std::filesystem::path> resume_from;
  std::string dataset_path;
  std::string dataset_fingerprint;
  // Called after every step with the loss record; used for progress output.
  std::function<void(std::int64_t, const LossBreakdown&)> on_step;
};

struct TrainResult {
  std::filesystem::path final_snapshot;  // empty for arm a
  std::vector<std::pair<std::int64_t, LossBreakdown>> log;
};

TrainResult train(const TrainConfig& config, const DomainPairDataset& dataset,
                  const TrainOptions& options);

enum class Direction { kSourceToTarget, kTargetToSource };

// Translates images with a generator snapshot; output pixels in [0, 1].
std::vector<RgbImage> translate(const std::filesystem::path& snapshot,
                                const std::vector<const RgbImage*>& images,
                                Direction direction);

// Writes the dataset at `input` to `output` with source images (S->T) or
// target images (T->S) replaced by their translations. Label files and all
// other files are copied byte for byte.
void adapt_dataset(const std::filesystem::path& snapshot,
                   const std::filesystem::path& input,
                   const std::filesystem::path& output, Direction direction);

}  // namespace semgan
