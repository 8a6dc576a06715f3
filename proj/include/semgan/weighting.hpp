#pragma once

// Corpus-wide class frequencies and the per-pixel weight masks consumed by
// the weighted reconstruction loss. The loss uses (1 - w), so pixels of rare
// classes are reconstructed most strictly.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semgan/domain_data.hpp"

namespace semgan {

struct WeightMask {
  int height = 0;
  int width = 0;
  std::vector<double> values;  // w[i,j] = frequency of class at (i,j)
  std::string source_labels_id;
};

std::vector<std::uint64_t> count_class_pixels(std::span<const LabeledImage> source,
                                              int num_classes);

// Returns a copy of catalog with frequencies populated from every pixel of
// every source label map.
ClassCatalog compute_class_frequencies(std::span<const LabeledImage> source,
                                       const ClassCatalog& catalog);

WeightMask build_weight_mask(const LabelMap& labels, const ClassCatalog& catalog,
                             std::string source_labels_id = {});

}  // namespace semgan
