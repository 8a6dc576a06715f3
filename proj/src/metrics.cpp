#include "semgan/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "semgan/errors.hpp"

namespace semgan {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(num_classes),
      counts_(static_cast<std::size_t>(num_classes) * num_classes, 0) {
  if (num_classes < 1) throw Error(ErrorCategory::kValidation, "confusion: no classes");
}

void ConfusionMatrix::add(std::span<const std::uint8_t> ground_truth,
                          std::span<const std::uint8_t> prediction) {
  if (ground_truth.size() != prediction.size()) {
    throw Error(ErrorCategory::kValidation, "confusion: prediction and ground truth differ in size");
  }
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    const int gt = ground_truth[i], pred = prediction[i];
    if (gt >= num_classes_ || pred >= num_classes_) {
      throw Error(ErrorCategory::kValidation,
                  "confusion: class id out of range at pixel " + std::to_string(i));
    }
    ++counts_[static_cast<std::size_t>(gt) * num_classes_ + pred];
  }
}

void ConfusionMatrix::add(const LabelMap& ground_truth, const LabelMap& prediction) {
  if (ground_truth.height != prediction.height || ground_truth.width != prediction.width) {
    throw Error(ErrorCategory::kValidation, "confusion: prediction and ground truth differ in size");
  }
  add(std::span(ground_truth.ids), std::span(prediction.ids));
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) {
    throw Error(ErrorCategory::kValidation, "confusion: class counts differ");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (auto v : counts_) sum += v;
  return sum;
}

MetricsReport make_report(const ConfusionMatrix& confusion, std::string arm) {
  const int c = confusion.num_classes();
  const std::uint64_t total = confusion.total();
  if (total == 0) throw Error(ErrorCategory::kValidation, "metrics: nothing evaluated");
  MetricsReport r;
  r.arm = std::move(arm);
  r.num_classes = c;
  r.confusion = confusion.counts();
  std::uint64_t trace = 0;
  double iou_sum = 0.0;
  int defined = 0;
  for (int k = 0; k < c; ++k) {
    const std::uint64_t tp = confusion.at(k, k);
    std::uint64_t row = 0, col = 0;
    for (int j = 0; j < c; ++j) {
      row += confusion.at(k, j);
      col += confusion.at(j, k);
    }
    trace += tp;
    const std::uint64_t denom = row + col - tp;
    if (denom == 0) {
      r.per_class_iou.push_back(std::nullopt);
      continue;
    }
    const double iou = static_cast<double>(tp) / static_cast<double>(denom);
    r.per_class_iou.push_back(iou);
    iou_sum += iou;
    ++defined;
  }
  r.miou = iou_sum / defined;
  r.pixel_accuracy = static_cast<double>(trace) / static_cast<double>(total);
  return r;
}

std::string format_report(const MetricsReport& report,
                          const std::vector<std::string>& class_names) {
  std::ostringstream os;
  char line[128];
  if (!report.arm.empty()) os << "arm " << report.arm << "\n";
  os << "class                 IoU\n";
  for (int k = 0; k < report.num_classes; ++k) {
    const std::string name = k < static_cast<int>(class_names.size())
                                 ? class_names[k]
                                 : "class_" + std::to_string(k);
    if (report.per_class_iou[k]) {
      std::snprintf(line, sizeof line, "%-18s %7.2f\n", name.c_str(),
                    100.0 * *report.per_class_iou[k]);
    } else {
      std::snprintf(line, sizeof line, "%-18s %7s\n", name.c_str(), "n/a");
    }
    os << line;
  }
  std::snprintf(line, sizeof line, "mIoU %.2f  Acc %.2f\n", 100.0 * report.miou,
                100.0 * report.pixel_accuracy);
  os << line;
  return os.str();
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
  nlohmann::json iou = nlohmann::json::array();
  for (const auto& v : r.per_class_iou) {
    iou.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
  }
  j = {{"arm", r.arm},         {"num_classes", r.num_classes},
       {"confusion", r.confusion}, {"per_class_iou", iou},
       {"miou", r.miou},       {"pixel_accuracy", r.pixel_accuracy}};
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
  r.arm = j.at("arm").get<std::string>();
  r.num_classes = j.at("num_classes").get<int>();
  r.confusion = j.at("confusion").get<std::vector<std::uint64_t>>();
  r.per_class_iou.clear();
  for (const auto& v : j.at("per_class_iou")) {
    r.per_class_iou.push_back(v.is_null() ? std::nullopt
                                          : std::optional<double>(v.get<double>()));
  }
  r.miou = j.at("miou").get<double>();
  r.pixel_accuracy = j.at("pixel_accuracy").get<double>();
}

}  // namespace semgan
