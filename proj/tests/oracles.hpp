#pragma once

// Brute-force reference computations. They share no code with the library:
// everything is recounted pixel by pixel from the raw label maps.

#include <cstdint>
#include <optional>
#include <vector>

#include "semgan/domain_data.hpp"

namespace semgan::testing {

// Class frequencies over a corpus by direct counting, one class at a time.
inline std::vector<double> frequency_oracle(const std::vector<LabelMap>& maps, int classes) {
  std::vector<double> out(classes, 0.0);
  std::uint64_t total = 0;
  for (const auto& m : maps) total += static_cast<std::uint64_t>(m.height) * m.width;
  for (int c = 0; c < classes; ++c) {
    std::uint64_t n = 0;
    for (const auto& m : maps)
      for (int i = 0; i < m.height; ++i)
        for (int j = 0; j < m.width; ++j)
          if (m.at(i, j) == c) ++n;
    out[c] = static_cast<double>(n) / static_cast<double>(total);
  }
  return out;
}

inline std::vector<double> mask_oracle(const LabelMap& m, const std::vector<double>& freq) {
  std::vector<double> out;
  for (int i = 0; i < m.height; ++i)
    for (int j = 0; j < m.width; ++j) out.push_back(freq[m.at(i, j)]);
  return out;
}

struct MetricsOracle {
  std::vector<std::uint64_t> confusion;  // rows = ground truth
  std::vector<std::optional<double>> iou;
  double miou = 0.0;
  double accuracy = 0.0;
};

inline MetricsOracle metrics_oracle(const std::vector<LabelMap>& gt,
                                    const std::vector<LabelMap>& pred, int classes) {
  MetricsOracle o;
  o.confusion.assign(static_cast<std::size_t>(classes) * classes, 0);
  std::uint64_t total = 0, correct = 0;
  for (std::size_t s = 0; s < gt.size(); ++s) {
    for (int i = 0; i < gt[s].height; ++i) {
      for (int j = 0; j < gt[s].width; ++j) {
        const int g = gt[s].at(i, j), p = pred[s].at(i, j);
        ++o.confusion[static_cast<std::size_t>(g) * classes + p];
        ++total;
        if (g == p) ++correct;
      }
    }
  }
  double sum = 0.0;
  int defined = 0;
  for (int c = 0; c < classes; ++c) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t s = 0; s < gt.size(); ++s) {
      for (int i = 0; i < gt[s].height; ++i) {
        for (int j = 0; j < gt[s].width; ++j) {
          const bool is_g = gt[s].at(i, j) == c, is_p = pred[s].at(i, j) == c;
          tp += is_g && is_p;
          fp += !is_g && is_p;
          fn += is_g && !is_p;
        }
      }
    }
    if (tp + fp + fn == 0) {
      o.iou.push_back(std::nullopt);
      continue;
    }
    const double v = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
    o.iou.push_back(v);
    sum += v;
    ++defined;
  }
  o.miou = sum / defined;
  o.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return o;
}

}  // namespace semgan::testing
