#include "semgan/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "semgan/errors.hpp"

namespace semgan {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kMargin = 24;

struct Canvas {
  Raster8 r;

  Canvas(int w, int h) : r{h, w, 3, std::vector<std::uint8_t>(std::size_t(w) * h * 3, 255)} {}

  void put(int x, int y, std::array<std::uint8_t, 3> c) {
    if (x < 0 || y < 0 || x >= r.width || y >= r.height) return;
    auto* p = &r.data[(std::size_t(y) * r.width + x) * 3];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  void line(int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> c) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      put(x0, y0, c);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  void rect(int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> c) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) {
      for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) put(x, y, c);
    }
  }

  void axes(double y_zero_frac) {
    const std::array<std::uint8_t, 3> grey{160, 160, 160}, black{0, 0, 0};
    for (int i = 1; i < 5; ++i) {
      const int y = kMargin + (r.height - 2 * kMargin) * i / 5;
      for (int x = kMargin; x < r.width - kMargin; x += 4) put(x, y, grey);
    }
    line(kMargin, kMargin, kMargin, r.height - kMargin, black);
    const int zy = r.height - kMargin - static_cast<int>(y_zero_frac * (r.height - 2 * kMargin));
    line(kMargin, zy, r.width - kMargin, zy, black);
  }
};

void write_legend(const fs::path& path, const json& legend) {
  std::ofstream out(path);
  out << legend.dump(2) << "\n";
}

std::string hex(std::array<std::uint8_t, 3> c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

}  // namespace

std::array<std::uint8_t, 3> palette_color(std::size_t index) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 8> kPalette = {{
      {31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40},
      {148, 103, 189}, {140, 86, 75}, {227, 119, 194}, {127, 127, 127},
  }};
  return kPalette[index % kPalette.size()];
}

Raster8 plot_lines(const std::vector<Series>& series, int width, int height) {
  Canvas cv(width, height);
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series) {
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0;
  if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
  const double zero = std::clamp((0.0 - ymin) / (ymax - ymin), 0.0, 1.0);
  cv.axes(zero);
  const int pw = width - 2 * kMargin, ph = height - 2 * kMargin;
  auto px = [&](double x) { return kMargin + static_cast<int>((x - xmin) / (xmax - xmin) * pw); };
  auto py = [&](double y) {
    return height - kMargin - static_cast<int>((y - ymin) / (ymax - ymin) * ph);
  };
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const auto color = palette_color(i);
    for (std::size_t k = 1; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.y[k - 1]) || !std::isfinite(s.y[k])) continue;
      cv.line(px(s.x[k - 1]), py(s.y[k - 1]), px(s.x[k]), py(s.y[k]), color);
    }
  }
  return cv.r;
}

Raster8 plot_bars(const std::vector<double>& values, const std::vector<double>& errors,
                  int width, int height) {
  Canvas cv(width, height);
  cv.axes(0.0);
  double top = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    top = std::max(top, values[i] + (errors.empty() ? 0.0 : errors[i]));
  }
  if (!(top > 0.0)) top = 1.0;
  const int pw = width - 2 * kMargin, ph = height - 2 * kMargin;
  const int n = static_cast<int>(values.size());
  for (int i = 0; i < n; ++i) {
    const int slot = pw / std::max(n, 1);
    const int x0 = kMargin + i * slot + slot / 6, x1 = kMargin + (i + 1) * slot - slot / 6;
    const int y = height - kMargin - static_cast<int>(values[i] / top * ph);
    cv.rect(x0, y, x1, height - kMargin - 1, palette_color(i));
    if (!errors.empty()) {
      const int e = static_cast<int>(errors[i] / top * ph);
      const int xm = (x0 + x1) / 2;
      cv.line(xm, y - e, xm, y + e, {0, 0, 0});
      cv.line(xm - 3, y - e, xm + 3, y - e, {0, 0, 0});
      cv.line(xm - 3, y + e, xm + 3, y + e, {0, 0, 0});
    }
  }
  return cv.r;
}

std::vector<std::pair<std::int64_t, LossBreakdown>> read_loss_log(const fs::path& log) {
  std::ifstream in(log);
  if (!in) throw Error(ErrorCategory::kMissingInput, "log not found: " + log.string());
  std::vector<std::pair<std::int64_t, LossBreakdown>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCategory::kCorrupt,
                  log.string() + ":" + std::to_string(lineno) + ": malformed record");
    }
    LossBreakdown b;
    b.adv_st = j.value("adv_st", 0.0);
    b.adv_ts = j.value("adv_ts", 0.0);
    b.g_adv_st = j.value("g_adv_st", 0.0);
    b.g_adv_ts = j.value("g_adv_ts", 0.0);
    b.sem_st = j.value("sem_st", 0.0);
    b.sem_ts = j.value("sem_ts", 0.0);
    b.rec = j.value("rec", 0.0);
    b.total_d = j.value("total_d", 0.0);
    b.total_g = j.value("total_g", 0.0);
    out.emplace_back(j.at("step").get<std::int64_t>(), b);
  }
  return out;
}

void plot_loss_curves(const fs::path& log, const fs::path& out_dir) {
  const auto records = read_loss_log(log);
  if (records.empty()) throw Error(ErrorCategory::kMissingInput, "log is empty: " + log.string());
  std::vector<Series> series = {{"total_d", {}, {}}, {"total_g", {}, {}}, {"adv", {}, {}},
                                {"sem", {}, {}},     {"rec", {}, {}}};
  for (const auto& [step, b] : records) {
    const double vals[] = {b.total_d, b.total_g, b.adv_st + b.adv_ts, b.sem_st + b.sem_ts, b.rec};
    for (std::size_t i = 0; i < series.size(); ++i) {
      series[i].x.push_back(static_cast<double>(step));
      series[i].y.push_back(vals[i]);
    }
  }
  fs::create_directories(out_dir);
  write_png(out_dir / "losses.png", plot_lines(series, 640, 400));
  json legend = json::object();
  for (std::size_t i = 0; i < series.size(); ++i) legend[series[i].name] = hex(palette_color(i));
  write_legend(out_dir / "losses.json", {{"x", "step"}, {"colors", legend}});
}

void plot_ablation(const AblationTable& table, const fs::path& out_dir) {
  std::vector<double> miou, miou_err, acc, acc_err;
  json legend = json::object();
  std::size_t slot = 0;
  for (int a = 0; a < 5; ++a) {
    const auto arm = static_cast<AblationArm>(a);
    const auto cells = table.cells_for(arm);
    if (cells.empty()) continue;
    auto spread = [&](auto get, double mean) {
      double s = 0.0;
      for (const auto* c : cells) s += (get(*c) - mean) * (get(*c) - mean);
      return cells.size() > 1 ? std::sqrt(s / (cells.size() - 1)) : 0.0;
    };
    const double m = *table.mean_miou(arm), ac = *table.mean_accuracy(arm);
    miou.push_back(100.0 * m);
    acc.push_back(100.0 * ac);
    miou_err.push_back(100.0 * spread([](const AblationCell& c) { return c.report.miou; }, m));
    acc_err.push_back(
        100.0 * spread([](const AblationCell& c) { return c.report.pixel_accuracy; }, ac));
    legend[std::string(1, arm_letter(arm))] = hex(palette_color(slot++));
  }
  if (miou.empty()) throw Error(ErrorCategory::kMissingInput, "ablation table is empty");
  fs::create_directories(out_dir);
  write_png(out_dir / "ablation_miou.png", plot_bars(miou, miou_err, 480, 320));
  write_png(out_dir / "ablation_acc.png", plot_bars(acc, acc_err, 480, 320));
  write_legend(out_dir / "ablation_plot.json",
               {{"bars", legend}, {"error_bars", "sample std over seeds"},
                {"y", "percent, axis from 0"}});
}

}  // namespace semgan
