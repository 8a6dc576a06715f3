#pragma once

// Pixel-level confusion matrices and the reports derived from them.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "semgan/domain_data.hpp"

namespace semgan {

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  // Rows are ground truth, columns predictions. Ids must be < num_classes.
  void add(std::span<const std::uint8_t> ground_truth,
           std::span<const std::uint8_t> prediction);
  void add(const LabelMap& ground_truth, const LabelMap& prediction);
  void merge(const ConfusionMatrix& other);

  int num_classes() const { return num_classes_; }
  std::uint64_t at(int gt, int pred) const {
    return counts_[static_cast<std::size_t>(gt) * num_classes_ + pred];
  }
  std::uint64_t total() const;
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  bool operator==(const ConfusionMatrix&) const = default;

 private:
  int num_classes_;
  std::vector<std::uint64_t> counts_;
};

struct MetricsReport {
  std::string arm;
  int num_classes = 0;
  std::vector<std::uint64_t> confusion;  // row-major, rows = ground truth
  // std::nullopt where TP + FP + FN == 0.
  std::vector<std::optional<double>> per_class_iou;
  double miou = 0.0;
  double pixel_accuracy = 0.0;
};

// Throws Validation on an empty matrix.
MetricsReport make_report(const ConfusionMatrix& confusion, std::string arm = {});

// Per-class table followed by mIoU and accuracy; names may be empty.
std::string format_report(const MetricsReport& report,
                          const std::vector<std::string>& class_names = {});

void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);

}  // namespace semgan
