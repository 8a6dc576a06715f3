#include "semgan/weighting.hpp"

#include "semgan/errors.hpp"
#include "semgan/log.hpp"

namespace semgan {

std::vector<std::uint64_t> count_class_pixels(std::span<const LabeledImage> source,
                                              int num_classes) {
  std::vector<std::uint64_t> counts(num_classes, 0);
  for (const auto& sample : source) {
    for (std::uint8_t id : sample.labels.ids) {
      if (id >= num_classes) {
        throw Error(ErrorCategory::kValidation,
                    "sample " + sample.id + " has label " + std::to_string(id) +
                        " outside the catalog");
      }
      ++counts[id];
    }
  }
  return counts;
}

ClassCatalog compute_class_frequencies(std::span<const LabeledImage> source,
                                       const ClassCatalog& catalog) {
  if (source.empty()) {
    throw Error(ErrorCategory::kValidation,
                "class frequencies need at least one source label map");
  }
  const auto counts = count_class_pixels(source, catalog.num_classes());
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) {
    throw Error(ErrorCategory::kValidation, "source label maps contain no pixels");
  }
  ClassCatalog out = catalog;
  int present = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    out.entries[c].frequency = static_cast<double>(counts[c]) / static_cast<double>(total);
    if (counts[c] > 0) ++present;
  }
  out.has_frequencies = true;
  if (present == 1) {
    log_warning(
        "source corpus contains a single class; the weighted source reconstruction "
        "term is identically zero");
  }
  return out;
}

WeightMask build_weight_mask(const LabelMap& labels, const ClassCatalog& catalog,
                             std::string source_labels_id) {
  if (!catalog.has_frequencies) {
    throw Error(ErrorCategory::kValidation,
                "weight mask requested but catalog frequencies are not populated");
  }
  validate_labels(labels, catalog, "build_weight_mask");
  WeightMask mask;
  mask.height = labels.height;
  mask.width = labels.width;
  mask.source_labels_id = std::move(source_labels_id);
  mask.values.resize(labels.ids.size());
  for (std::size_t i = 0; i < labels.ids.size(); ++i) {
    mask.values[i] = catalog.entries[labels.ids[i]].frequency;
  }
  return mask;
}

}  // namespace semgan
