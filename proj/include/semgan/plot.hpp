#pragma once

// Minimal raster charts: line plots of training losses and bar charts of
// per-arm metrics, written as PNG. Charts carry no text; series colors are
// fixed and listed next to each image in a small JSON legend.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semgan/image_io.hpp"
#include "semgan/losses.hpp"
#include "semgan/segmenter_eval.hpp"

namespace semgan {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Series are drawn in palette order on shared, auto-scaled axes.
Raster8 plot_lines(const std::vector<Series>& series, int width, int height);
// One bar per value, optional error half-widths (same length or empty).
Raster8 plot_bars(const std::vector<double>& values, const std::vector<double>& errors,
                  int width, int height);

std::array<std::uint8_t, 3> palette_color(std::size_t index);

std::vector<std::pair<std::int64_t, LossBreakdown>> read_loss_log(
    const std::filesystem::path& log);

// Writes out_dir/losses.png (+ losses.json legend).
void plot_loss_curves(const std::filesystem::path& log, const std::filesystem::path& out_dir);
// Writes out_dir/ablation_miou.png and ablation_acc.png (+ legend).
void plot_ablation(const AblationTable& table, const std::filesystem::path& out_dir);

}  // namespace semgan
