#pragma once

// Downstream segmentation: train on (original or adapted) source data,
// evaluate on held-out target labels, and run the component ablation.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semgan/domain_data.hpp"
#include "semgan/metrics.hpp"
#include "semgan/models.hpp"
#include "semgan/toyworld.hpp"
#include "semgan/trainer.hpp"

namespace semgan {

struct SegTrainConfig {
  int iterations = 100000;
  int batch_size = 4;
  double learning_rate = 1e-4;
  int crop_size = 1024;
  std::uint64_t seed = 0;
  int log_interval = 100;
  SegmenterSpec segmenter;

  void validate() const;
};

class TrainedSegmenter {
 public:
  explicit TrainedSegmenter(const SegmenterSpec& spec, std::uint64_t seed = 0);

  LabelMap predict(const RgbImage& image);
  std::vector<LabelMap> predict(const std::vector<const RgbImage*>& images);

  Segmenter<float>& model() { return model_; }
  const SegmenterSpec& spec() const { return model_.spec(); }

  void save(const std::filesystem::path& path, const nlohmann::json& meta = {});
  static TrainedSegmenter load(const std::filesystem::path& path);

 private:
  Segmenter<float> model_;
};

// Iteration losses are passed to on_log every log_interval iterations.
TrainedSegmenter train_segmenter(
    const std::vector<LabeledImage>& data, const SegTrainConfig& config,
    const std::function<void(int, double)>& on_log = {});

// Throws Validation on an empty evaluation set.
MetricsReport evaluate(TrainedSegmenter& segmenter,
                       const std::vector<LabeledImage>& eval_set,
                       const std::string& arm = {});

// Pixel accuracy of an oracle (trained on target-style data) applied to
// adapted images against the labels of the scenes they were rendered from.
double semantic_preservation_score(TrainedSegmenter& oracle,
                                   const std::vector<LabeledImage>& adapted);

// Oracle segmenter for a toy world: trained on `count` target-style scenes
// drawn from the auxiliary index range.
TrainedSegmenter train_oracle_segmenter(const ToyWorldManifest& world, int count,
                                        const SegTrainConfig& config);

struct AblationConfig {
  std::vector<AblationArm> arms = {AblationArm::kA, AblationArm::kE};
  std::vector<std::uint64_t> seeds = {0};
  TrainConfig gan;      // seed and arm are set per cell
  SegTrainConfig seg;   // seed is set per cell
  bool preservation = true;  // toy worlds only
  int oracle_images = 200;
  SegTrainConfig oracle;
  int jobs = 1;

  void validate() const;
};

struct AblationCell {
  AblationArm arm = AblationArm::kA;
  std::uint64_t seed = 0;
  MetricsReport report;
  std::optional<double> preservation;
  double seconds = 0.0;
};

struct AblationTable {
  std::vector<AblationCell> cells;
  std::vector<std::string> class_names;

  std::vector<const AblationCell*> cells_for(AblationArm arm) const;
  // Mean over seeds; std::nullopt when the arm has no cells.
  std::optional<double> mean_miou(AblationArm arm) const;
  std::optional<double> mean_accuracy(AblationArm arm) const;
  std::optional<double> mean_preservation(AblationArm arm) const;
};

// For each arm x seed: train the GAN (arms b-e), adapt the source images,
// train a segmenter and evaluate on target_eval. Each finished cell is
// persisted under out_dir/cells/ and reused when the ablation is rerun.
AblationTable run_ablation(const std::filesystem::path& dataset_root,
                           const AblationConfig& config,
                           const std::filesystem::path& out_dir);

// Rows a-e with per-seed and mean mIoU / accuracy, followed by the published
// reference values for context.
std::string format_ablation(const AblationTable& table);
std::string ablation_csv(const AblationTable& table);
nlohmann::json ablation_json(const AblationTable& table);
AblationTable ablation_from_json(const nlohmann::json& j);

struct ReferenceRow {
  char arm;
  const char* label;
  std::optional<double> miou;
  std::optional<double> accuracy;
};
const std::vector<ReferenceRow>& published_reference();

}  // namespace semgan
