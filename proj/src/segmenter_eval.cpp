#include "semgan/segmenter_eval.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "semgan/config.hpp"
#include "semgan/errors.hpp"
#include "semgan/log.hpp"
#include "semgan/manifest.hpp"
#include "semgan/snapshot.hpp"
#include "semgan/weighting.hpp"

namespace semgan {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint64_t kSegBatchStream = 0x73656762;  // "segb"
constexpr double kSegBeta1 = 0.9;
constexpr double kSegBeta2 = 0.999;

std::uint64_t segmenter_seed(std::uint64_t seed) {
  Rng rng = make_rng({seed, 5, 0x6d6f64656c});
  return rng();
}

const char* arm_label(AblationArm arm) {
  switch (arm) {
    case AblationArm::kA: return "source only";
    case AblationArm::kB: return "GAN + sem";
    case AblationArm::kC: return "GAN + sem + weight";
    case AblationArm::kD: return "cycle";
    case AblationArm::kE: return "cycle + sem + weight";
  }
  return "";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw Error(ErrorCategory::kIo, "cannot write " + path.string());
}

}  // namespace

void SegTrainConfig::validate() const {
  if (iterations < 1 || batch_size < 1 || crop_size < 1 || log_interval < 1) {
    throw Error(ErrorCategory::kValidation, "segmenter: counts must be >= 1");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCategory::kValidation, "segmenter.learning_rate must be > 0");
  }
  segmenter.validate();
}

void AblationConfig::validate() const {
  if (arms.empty()) throw Error(ErrorCategory::kValidation, "ablation: no arms");
  if (seeds.empty()) throw Error(ErrorCategory::kValidation, "ablation: no seeds");
  if (jobs < 1) throw Error(ErrorCategory::kValidation, "ablation.jobs must be >= 1");
  if (oracle_images < 1) {
    throw Error(ErrorCategory::kValidation, "ablation.oracle_images must be >= 1");
  }
  gan.validate();
  seg.validate();
  oracle.validate();
}

// ------------------------------------------------------------------ model

TrainedSegmenter::TrainedSegmenter(const SegmenterSpec& spec, std::uint64_t seed)
    : model_(spec, seed) {}

LabelMap TrainedSegmenter::predict(const RgbImage& image) {
  check_divisible(image.height, image.width, spec().encoder_stages, "segmenter input");
  Graph<float> g;
  const Var logits = model_.forward(g, g.constant(images_to_tensor({&image})));
  const Tensor<float>& v = g.value(logits);
  const int c = v.shape().c;
  const std::size_t plane = v.shape().plane();
  LabelMap out{image.height, image.width, std::vector<std::uint8_t>(plane)};
  for (std::size_t i = 0; i < plane; ++i) {
    int best = 0;
    for (int k = 1; k < c; ++k) {
      if (v[k * plane + i] > v[best * plane + i]) best = k;
    }
    out.ids[i] = static_cast<std::uint8_t>(best);
  }
  return out;
}

std::vector<LabelMap> TrainedSegmenter::predict(const std::vector<const RgbImage*>& images) {
  std::vector<LabelMap> out;
  out.reserve(images.size());
  for (const RgbImage* im : images) out.push_back(predict(*im));
  return out;
}

void TrainedSegmenter::save(const fs::path& path, const json& meta) {
  SnapshotFile file;
  file.meta()["kind"] = "segmenter";
  file.meta()["spec"] = spec();
  if (!meta.is_null()) file.meta()["info"] = meta;
  put_parameters(file, "seg/", model_.parameters());
  file.write(path);
}

TrainedSegmenter TrainedSegmenter::load(const fs::path& path) {
  const SnapshotFile file = SnapshotFile::read(path);
  if (file.meta().value("kind", "") != "segmenter") {
    throw Error(ErrorCategory::kSpecMismatch, path.string() + " is not a segmenter snapshot");
  }
  TrainedSegmenter seg(file.meta().at("spec").get<SegmenterSpec>());
  get_parameters(file, "seg/", seg.model_.parameters());
  return seg;
}

TrainedSegmenter train_segmenter(const std::vector<LabeledImage>& data,
                                 const SegTrainConfig& config,
                                 const std::function<void(int, double)>& on_log) {
  config.validate();
  if (data.empty()) throw Error(ErrorCategory::kStructural, "segmenter: no training data");
  const int cs = config.crop_size;
  check_divisible(cs, cs, config.segmenter.encoder_stages, "segmenter crop");
  for (const auto& s : data) {
    if (s.image.height < cs || s.image.width < cs) {
      throw Error(ErrorCategory::kValidation,
                  "crop_size " + std::to_string(cs) + " exceeds image " + s.id);
    }
    for (std::uint8_t id : s.labels.ids) {
      if (id >= config.segmenter.num_classes) {
        throw Error(ErrorCategory::kValidation, "segmenter: label " + std::to_string(id) +
                                                    " out of range in " + s.id);
      }
    }
  }
  TrainedSegmenter seg(config.segmenter, segmenter_seed(config.seed));
  Adam<float> opt(seg.model().parameters(),
                  AdamConfig{config.learning_rate, kSegBeta1, kSegBeta2, 1e-8});
  const int b = config.batch_size;
  for (int it = 0; it < config.iterations; ++it) {
    Rng rng = make_rng({config.seed, static_cast<std::uint64_t>(it), kSegBatchStream});
    std::vector<LabeledImage> crops;
    crops.reserve(b);
    for (int i = 0; i < b; ++i) {
      crops.push_back(random_crop(data[uniform_index(rng, data.size())], cs, rng));
    }
    std::vector<const RgbImage*> ims;
    LabelBatch labels{b, cs, cs, {}};
    for (const auto& c : crops) {
      ims.push_back(&c.image);
      labels.ids.insert(labels.ids.end(), c.labels.ids.begin(), c.labels.ids.end());
    }
    Graph<float> g;
    const Var logits = seg.model().forward(g, g.constant(images_to_tensor(ims)));
    const Var loss = g.softmax_cross_entropy(logits, labels);
    const double value = g.value(loss).item();
    if (!std::isfinite(value)) {
      throw Error(ErrorCategory::kNonFinite,
                  "segmenter loss is not finite at iteration " + std::to_string(it + 1));
    }
    opt.zero_grad();
    g.backward(loss, opt.parameters());
    opt.step();
    if (on_log && ((it + 1) % config.log_interval == 0 || it + 1 == config.iterations)) {
      on_log(it + 1, value);
    }
  }
  return seg;
}

MetricsReport evaluate(TrainedSegmenter& segmenter, const std::vector<LabeledImage>& eval_set,
                       const std::string& arm) {
  if (eval_set.empty()) throw Error(ErrorCategory::kValidation, "evaluate: empty eval set");
  ConfusionMatrix cm(segmenter.spec().num_classes);
  for (const auto& s : eval_set) cm.add(s.labels, segmenter.predict(s.image));
  return make_report(cm, arm);
}

double semantic_preservation_score(TrainedSegmenter& oracle,
                                   const std::vector<LabeledImage>& adapted) {
  if (adapted.empty()) throw Error(ErrorCategory::kValidation, "preservation: no images");
  ConfusionMatrix cm(oracle.spec().num_classes);
  for (const auto& s : adapted) cm.add(s.labels, oracle.predict(s.image));
  return make_report(cm).pixel_accuracy;
}

TrainedSegmenter train_oracle_segmenter(const ToyWorldManifest& world, int count,
                                        const SegTrainConfig& config) {
  const auto data = generate_labeled(world.spec, world.target_style, kAuxiliaryIndexBase,
                                     count, kTargetTag);
  return train_segmenter(data, config);
}

// ------------------------------------------------------------------ ablation

std::vector<const AblationCell*> AblationTable::cells_for(AblationArm arm) const {
  std::vector<const AblationCell*> out;
  for (const auto& c : cells) {
    if (c.arm == arm) out.push_back(&c);
  }
  return out;
}

namespace {

template <typename F>
std::optional<double> mean_of(const AblationTable& t, AblationArm arm, F get) {
  double sum = 0.0;
  int n = 0;
  for (const auto* c : t.cells_for(arm)) {
    const std::optional<double> v = get(*c);
    if (!v) continue;
    sum += *v;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

json cell_json(const AblationCell& c) {
  json j = {{"arm", std::string(1, arm_letter(c.arm))},
            {"seed", c.seed},
            {"report", c.report},
            {"seconds", c.seconds}};
  j["preservation"] = c.preservation ? json(*c.preservation) : json(nullptr);
  return j;
}

AblationCell cell_from_json(const json& j) {
  AblationCell c;
  c.arm = parse_arm(j.at("arm").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.report = j.at("report").get<MetricsReport>();
  c.seconds = j.value("seconds", 0.0);
  if (j.contains("preservation") && !j.at("preservation").is_null()) {
    c.preservation = j.at("preservation").get<double>();
  }
  return c;
}

}  // namespace

std::optional<double> AblationTable::mean_miou(AblationArm arm) const {
  return mean_of(*this, arm, [](const AblationCell& c) {
    return std::optional<double>(c.report.miou);
  });
}

std::optional<double> AblationTable::mean_accuracy(AblationArm arm) const {
  return mean_of(*this, arm, [](const AblationCell& c) {
    return std::optional<double>(c.report.pixel_accuracy);
  });
}

std::optional<double> AblationTable::mean_preservation(AblationArm arm) const {
  return mean_of(*this, arm, [](const AblationCell& c) { return c.preservation; });
}

const std::vector<ReferenceRow>& published_reference() {
  static const std::vector<ReferenceRow> rows = {
      {'a', "Synthetic", 18.23, 60.43},
      {'b', "GAN + Sem", std::nullopt, std::nullopt},
      {'c', "GAN + Sem + Weight", std::nullopt, std::nullopt},
      {'d', "Cycle", 29.43, 79.20},
      {'e', "Cycle + Sem + Weight", 34.27, 84.48},
  };
  return rows;
}

AblationTable run_ablation(const fs::path& dataset_root, const AblationConfig& config,
                           const fs::path& out_dir) {
  config.validate();
  DomainPairDataset dataset = load_dataset(dataset_root);
  if (!dataset.target_eval || dataset.target_eval->empty()) {
    throw Error(ErrorCategory::kStructural,
                "ablation needs held-out target labels under target_eval/");
  }
  dataset.catalog = compute_class_frequencies(dataset.source, dataset.catalog);
  const auto world = read_toyworld_manifest(dataset_root);
  const std::string fingerprint = dataset_fingerprint(dataset_root);
  fs::create_directories(out_dir / "cells");

  SegTrainConfig seg_base = config.seg;
  seg_base.segmenter.num_classes = dataset.catalog.num_classes();

  std::optional<TrainedSegmenter> oracle;
  if (config.preservation && world) {
    const fs::path oracle_path = out_dir / "oracle.snap";
    if (fs::exists(oracle_path)) {
      oracle.emplace(TrainedSegmenter::load(oracle_path));
    } else {
      log_info("training oracle segmenter on target-style scenes");
      SegTrainConfig oc = config.oracle;
      oc.segmenter.num_classes = dataset.catalog.num_classes();
      oracle.emplace(train_oracle_segmenter(*world, config.oracle_images, oc));
      oracle->save(oracle_path, json{{"images", config.oracle_images}});
    }
  } else if (config.preservation) {
    log_warning("dataset is not a toy world; semantic preservation is skipped");
  }

  struct Job {
    AblationArm arm;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto arm : config.arms) {
    for (auto seed : config.seeds) jobs.push_back({arm, seed});
  }
  std::vector<std::optional<AblationCell>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;

  auto run_cell = [&](const Job& job) {
    const std::string name = std::string(1, arm_letter(job.arm)) + "_seed" +
                             std::to_string(job.seed);
    const fs::path cell_dir = out_dir / "cells" / name;
    const fs::path report_file = cell_dir / "report.json";
    if (fs::exists(report_file)) {
      std::ifstream in(report_file);
      json j = json::parse(in, nullptr, false);
      if (!j.is_discarded()) return cell_from_json(j);
    }
    fs::create_directories(cell_dir);
    const auto start = std::chrono::steady_clock::now();
    std::vector<LabeledImage> train_data = dataset.source;
    if (job.arm != AblationArm::kA) {
      TrainConfig gc = config.gan;
      gc.seed = job.seed;
      gc.ablation_arm = job.arm;
      TrainOptions opts;
      opts.run_dir = cell_dir / "gan";
      opts.dataset_fingerprint = fingerprint;
      log_info("cell " + name + ": training translation model");
      const TrainResult tr = train(gc, dataset, opts);
      std::vector<const RgbImage*> ims;
      for (const auto& s : dataset.source) ims.push_back(&s.image);
      auto adapted = translate(tr.final_snapshot, ims, Direction::kSourceToTarget);
      for (std::size_t i = 0; i < adapted.size(); ++i) {
        train_data[i].image = std::move(adapted[i]);
      }
      fs::create_directories(cell_dir / "preview");
      for (std::size_t i = 0; i < std::min<std::size_t>(4, train_data.size()); ++i) {
        write_png(cell_dir / "preview" / (train_data[i].id + ".png"),
                  to_raster(train_data[i].image));
      }
    }
    SegTrainConfig sc = seg_base;
    sc.seed = job.seed;
    log_info("cell " + name + ": training segmenter");
    TrainedSegmenter seg = train_segmenter(train_data, sc);
    seg.save(cell_dir / "segmenter.snap", json{{"arm", std::string(1, arm_letter(job.arm))}});
    AblationCell cell;
    cell.arm = job.arm;
    cell.seed = job.seed;
    cell.report = evaluate(seg, *dataset.target_eval, std::string(1, arm_letter(job.arm)));
    if (oracle) cell.preservation = semantic_preservation_score(*oracle, train_data);
    cell.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text(report_file, cell_json(cell).dump(2) + "\n");
    char line[160];
    std::snprintf(line, sizeof line, "cell %s: mIoU %.2f  Acc %.2f  (%.0f s)", name.c_str(),
                  100.0 * cell.report.miou, 100.0 * cell.report.pixel_accuracy, cell.seconds);
    log_info(line);
    return cell;
  };

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      try {
        results[i] = run_cell(jobs[i]);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(config.jobs, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  AblationTable table;
  for (const auto& e : dataset.catalog.entries) table.class_names.push_back(e.name);
  for (auto& r : results) table.cells.push_back(std::move(*r));
  write_text(out_dir / "ablation.txt", format_ablation(table));
  write_text(out_dir / "ablation.csv", ablation_csv(table));
  write_text(out_dir / "ablation.json", ablation_json(table).dump(2) + "\n");
  return table;
}

std::string format_ablation(const AblationTable& table) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %-22s %-28s %9s %9s %9s\n", "arm", "method",
                "mIoU per seed", "mIoU", "Acc.", "preserve");
  os << line;
  for (int a = 0; a < 5; ++a) {
    const auto arm = static_cast<AblationArm>(a);
    const auto cells = table.cells_for(arm);
    std::string per_seed;
    for (const auto* c : cells) {
      std::snprintf(line, sizeof line, "%s%.2f", per_seed.empty() ? "" : " ",
                    100.0 * c->report.miou);
      per_seed += line;
    }
    if (cells.empty()) per_seed = "-";
    auto fmt = [](std::optional<double> v) {
      char buf[32];
      if (v) {
        std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *v);
      } else {
        std::snprintf(buf, sizeof buf, "-");
      }
      return std::string(buf);
    };
    std::snprintf(line, sizeof line, "(%c)  %-22s %-28s %9s %9s %9s\n", arm_letter(arm),
                  arm_label(arm), per_seed.c_str(), fmt(table.mean_miou(arm)).c_str(),
                  fmt(table.mean_accuracy(arm)).c_str(),
                  fmt(table.mean_preservation(arm)).c_str());
    os << line;
  }
  os << "\nPer-class IoU (mean over seeds):\n";
  for (int a = 0; a < 5; ++a) {
    const auto arm = static_cast<AblationArm>(a);
    const auto cells = table.cells_for(arm);
    if (cells.empty()) continue;
    os << "(" << arm_letter(arm) << ")";
    const int c = cells.front()->report.num_classes;
    for (int k = 0; k < c; ++k) {
      double sum = 0.0;
      int n = 0;
      for (const auto* cell : cells) {
        if (cell->report.per_class_iou[k]) {
          sum += *cell->report.per_class_iou[k];
          ++n;
        }
      }
      const std::string name =
          k < static_cast<int>(table.class_names.size()) ? table.class_names[k] : "";
      if (n > 0) {
        std::snprintf(line, sizeof line, "  %s %.2f", name.c_str(), 100.0 * sum / n);
      } else {
        std::snprintf(line, sizeof line, "  %s n/a", name.c_str());
      }
      os << line;
    }
    os << "\n";
  }
  os << "\nReference values at full scale (street scenes, 19 classes), shown for\n"
        "context only; this run does not reproduce them:\n";
  for (const auto& r : published_reference()) {
    if (r.miou) {
      std::snprintf(line, sizeof line, "(%c)  %-22s mIoU %6.2f  Acc. %6.2f\n", r.arm, r.label,
                    *r.miou, *r.accuracy);
    } else {
      std::snprintf(line, sizeof line, "(%c)  %-22s not reported\n", r.arm, r.label);
    }
    os << line;
  }
  return os.str();
}

std::string ablation_csv(const AblationTable& table) {
  std::ostringstream os;
  os << "arm,seed,miou,pixel_accuracy,preservation,seconds";
  const int c = table.cells.empty() ? 0 : table.cells.front().report.num_classes;
  for (int k = 0; k < c; ++k) {
    os << ",iou_"
       << (k < static_cast<int>(table.class_names.size()) ? table.class_names[k]
                                                           : std::to_string(k));
  }
  os << "\n";
  char buf[64];
  for (const auto& cell : table.cells) {
    os << arm_letter(cell.arm) << "," << cell.seed;
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f", cell.report.miou, cell.report.pixel_accuracy);
    os << buf << ",";
    if (cell.preservation) {
      std::snprintf(buf, sizeof buf, "%.6f", *cell.preservation);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.1f", cell.seconds);
    os << buf;
    for (const auto& iou : cell.report.per_class_iou) {
      os << ",";
      if (iou) {
        std::snprintf(buf, sizeof buf, "%.6f", *iou);
        os << buf;
      }
    }
    os << "\n";
  }
  return os.str();
}

json ablation_json(const AblationTable& table) {
  json cells = json::array();
  for (const auto& c : table.cells) cells.push_back(cell_json(c));
  json means = json::object();
  for (int a = 0; a < 5; ++a) {
    const auto arm = static_cast<AblationArm>(a);
    if (table.cells_for(arm).empty()) continue;
    json m = {{"miou", *table.mean_miou(arm)}, {"pixel_accuracy", *table.mean_accuracy(arm)}};
    const auto p = table.mean_preservation(arm);
    m["preservation"] = p ? json(*p) : json(nullptr);
    means[std::string(1, arm_letter(arm))] = m;
  }
  json reference = json::array();
  for (const auto& r : published_reference()) {
    reference.push_back({{"arm", std::string(1, r.arm)},
                         {"label", r.label},
                         {"miou", r.miou ? json(*r.miou) : json(nullptr)},
                         {"pixel_accuracy", r.accuracy ? json(*r.accuracy) : json(nullptr)}});
  }
  return json{{"class_names", table.class_names},
              {"cells", cells},
              {"means", means},
              {"reference", reference}};
}

AblationTable ablation_from_json(const json& j) {
  AblationTable t;
  t.class_names = j.value("class_names", std::vector<std::string>{});
  for (const auto& c : j.at("cells")) t.cells.push_back(cell_from_json(c));
  return t;
}

}  // namespace semgan
