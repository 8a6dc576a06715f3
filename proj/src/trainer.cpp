#include "semgan/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "semgan/config.hpp"
#include "semgan/errors.hpp"
#include "semgan/log.hpp"
#include "semgan/manifest.hpp"
#include "semgan/weighting.hpp"

namespace semgan {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint64_t kBatchStream = 0x62617463;  // "batc"

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t role) {
  Rng rng = make_rng({seed, role, 0x6d6f64656c});
  return rng();
}

void positive(long long v, const char* what) {
  if (v < 1) {
    throw Error(ErrorCategory::kValidation,
                std::string("train.") + what + " must be >= 1, got " + std::to_string(v));
  }
}

}  // namespace

char arm_letter(AblationArm arm) { return static_cast<char>('a' + static_cast<int>(arm)); }

AblationArm parse_arm(const std::string& text) {
  if (text.size() == 1 && text[0] >= 'a' && text[0] <= 'e') {
    return static_cast<AblationArm>(text[0] - 'a');
  }
  throw Error(ErrorCategory::kValidation, "unknown ablation arm '" + text + "' (expected a-e)");
}

void TrainConfig::validate() const {
  weights.validate();
  positive(batch_size, "batch_size");
  positive(total_steps, "total_steps");
  positive(crop_size, "crop_size");
  positive(log_interval, "log_interval");
  positive(snapshot_interval, "snapshot_interval");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCategory::kValidation, "train.learning_rate must be > 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error(ErrorCategory::kValidation, "train.beta1/beta2 must be in [0, 1)");
  }
  generator.validate();
  discriminator.validate();
}

ArmLayout ArmLayout::of(const TrainConfig& config) {
  ArmLayout l;
  l.weights = config.weights;
  switch (config.ablation_arm) {
    case AblationArm::kA:
      l.trains = false;
      break;
    case AblationArm::kB:
      l.cycle = false;
      l.weighted = false;
      l.reconstruction = false;
      l.weights.lambda_rec = 0.0;
      break;
    case AblationArm::kC:
      l.cycle = false;
      break;
    case AblationArm::kD:
      l.semantic_head = false;
      l.weighted = false;
      l.weights.lambda_sem = 0.0;
      break;
    case AblationArm::kE:
      break;
  }
  return l;
}

// ------------------------------------------------------------------ models

template <typename T>
GanModels<T>::GanModels(const TrainConfig& config, int num_classes)
    : layout(ArmLayout::of(config)) {
  if (!layout.trains) return;
  DiscriminatorSpec dspec = config.discriminator;
  dspec.num_classes = num_classes;
  dspec.segmentation_head = layout.semantic_head;
  g_st.emplace(config.generator, derive_seed(config.seed, 1));
  d_t.emplace(dspec, derive_seed(config.seed, 2));
  if (layout.cycle) {
    g_ts.emplace(config.generator, derive_seed(config.seed, 3));
    d_s.emplace(dspec, derive_seed(config.seed, 4));
  }
}

template <typename T>
std::vector<Parameter<T>*> GanModels<T>::generator_parameters() {
  std::vector<Parameter<T>*> out;
  for (auto* gen : {g_st ? &*g_st : nullptr, g_ts ? &*g_ts : nullptr}) {
    if (gen == nullptr) continue;
    auto p = gen->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

template <typename T>
std::vector<Parameter<T>*> GanModels<T>::discriminator_parameters() {
  std::vector<Parameter<T>*> out;
  for (auto* d : {d_t ? &*d_t : nullptr, d_s ? &*d_s : nullptr}) {
    if (d == nullptr) continue;
    auto p = d->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

template <typename T>
void GanModels<T>::save(SnapshotFile& file) {
  if (g_st) put_parameters(file, "g_st/", g_st->parameters());
  if (g_ts) put_parameters(file, "g_ts/", g_ts->parameters());
  if (d_t) put_parameters(file, "d_t/", d_t->parameters());
  if (d_s) put_parameters(file, "d_s/", d_s->parameters());
}

template <typename T>
void GanModels<T>::load(const SnapshotFile& file) {
  if (g_st) get_parameters(file, "g_st/", g_st->parameters());
  if (g_ts) get_parameters(file, "g_ts/", g_ts->parameters());
  if (d_t) get_parameters(file, "d_t/", d_t->parameters());
  if (d_s) get_parameters(file, "d_s/", d_s->parameters());
}

// ------------------------------------------------------------------ losses

template <typename T>
LossGraph<T> build_losses(Graph<T>& g, GanModels<T>& m, bool saturating_adv,
                          const Tensor<T>& x_s, const LabelBatch& y_s, const Tensor<T>& x_t,
                          const Tensor<T>& source_weight) {
  const ArmLayout& l = m.layout;
  if (!l.trains) throw Error(ErrorCategory::kSpecMismatch, "arm a has no losses");
  const Var zero = g.constant(Tensor<T>(Shape::scalar()));
  const Heads heads = l.semantic_head ? Heads::kBoth : Heads::kDomain;
  LossGraph<T> out;
  out.adv_ts = out.g_adv_ts = out.sem_st = out.sem_ts = out.rec = zero;

  const Var xs = g.constant(x_s);
  const Var xt = g.constant(x_t);

  const Var fake_t = m.g_st->forward(g, xs);
  const auto dt_real = m.d_t->forward(g, xt, Heads::kDomain);
  const auto dt_fake = m.d_t->forward(g, fake_t, heads);
  const auto adv_st = adversarial_terms(g, dt_real.score, dt_fake.score, saturating_adv);
  out.adv_st = adv_st.objective;
  out.g_adv_st = adv_st.g_objective;
  if (l.semantic_head) out.sem_st = g.softmax_cross_entropy(dt_fake.seg_logits, y_s);

  if (l.cycle) {
    const Var fake_s = m.g_ts->forward(g, xt);
    const auto ds_real = m.d_s->forward(g, xs, heads);
    const auto ds_fake = m.d_s->forward(g, fake_s, Heads::kDomain);
    const auto adv_ts = adversarial_terms(g, ds_real.score, ds_fake.score, saturating_adv);
    out.adv_ts = adv_ts.objective;
    out.g_adv_ts = adv_ts.g_objective;
    if (l.semantic_head) out.sem_ts = g.softmax_cross_entropy(ds_real.seg_logits, y_s);
    const Var cycle_s = m.g_ts->forward(g, fake_t);
    const Var cycle_t = m.g_st->forward(g, fake_s);
    out.rec = weighted_cycle_term(g, cycle_t, xt, cycle_s, xs,
                                  l.weighted ? &source_weight : nullptr);
  } else if (l.reconstruction) {
    out.rec = g.weighted_l1(fake_t, xs, l.weighted ? &source_weight : nullptr);
  }

  const T ls = static_cast<T>(l.weights.lambda_sem);
  const T lr = static_cast<T>(l.weights.lambda_rec);
  const Var d_terms[] = {out.adv_st, out.adv_ts, out.sem_st, out.sem_ts};
  const T d_coef[] = {T{-1}, T{-1}, ls, ls};
  out.total_d = g.weighted_sum(d_terms, d_coef);
  const Var g_terms[] = {out.g_adv_st, out.g_adv_ts, out.sem_st, out.sem_ts, out.rec};
  const T g_coef[] = {T{1}, T{1}, ls, ls, lr};
  out.total_g = g.weighted_sum(g_terms, g_coef);
  return out;
}

template <typename T>
LossBreakdown read_breakdown(const Graph<T>& g, const LossGraph<T>& l) {
  auto v = [&](Var x) { return static_cast<double>(g.value(x).item()); };
  LossBreakdown b;
  b.adv_st = v(l.adv_st);
  b.adv_ts = v(l.adv_ts);
  b.g_adv_st = v(l.g_adv_st);
  b.g_adv_ts = v(l.g_adv_ts);
  b.sem_st = v(l.sem_st);
  b.sem_ts = v(l.sem_ts);
  b.rec = v(l.rec);
  b.total_d = v(l.total_d);
  b.total_g = v(l.total_g);
  return b;
}

// ------------------------------------------------------------------ batches

Tensor<float> images_to_tensor(const std::vector<const RgbImage*>& images) {
  if (images.empty()) throw Error(ErrorCategory::kValidation, "empty image batch");
  const int h = images.front()->height, w = images.front()->width;
  Tensor<float> t(Shape{static_cast<int>(images.size()), 3, h, w});
  for (std::size_t n = 0; n < images.size(); ++n) {
    const RgbImage& im = *images[n];
    if (im.height != h || im.width != w) {
      throw Error(ErrorCategory::kValidation, "images in a batch differ in size");
    }
    float* dst = t.sample(static_cast<int>(n));
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (std::size_t i = 0; i < plane; ++i) {
      for (int c = 0; c < 3; ++c) dst[c * plane + i] = im.pixels[i * 3 + c] * 2.0f - 1.0f;
    }
  }
  return t;
}

RgbImage tensor_to_image(const Tensor<float>& t, int n) {
  RgbImage im{t.shape().h, t.shape().w, {}};
  const std::size_t plane = t.shape().plane();
  im.pixels.resize(plane * 3);
  const float* src = t.sample(n);
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      const float v = (src[c * plane + i] + 1.0f) * 0.5f;
      im.pixels[i * 3 + c] = std::clamp(v, 0.0f, 1.0f);
    }
  }
  return im;
}

GanBatch assemble_batch(const DomainPairDataset& dataset, const ClassCatalog& weighted,
                        const TrainConfig& config, std::int64_t step) {
  if (dataset.source.empty() || dataset.target.empty()) {
    throw Error(ErrorCategory::kStructural, "training needs source and target images");
  }
  Rng rng = make_rng({config.seed, static_cast<std::uint64_t>(step), kBatchStream});
  const int b = config.batch_size;
  std::vector<LabeledImage> src;
  std::vector<UnlabeledImage> tgt;
  for (int i = 0; i < b; ++i) {
    const auto k = uniform_index(rng, dataset.source.size());
    src.push_back(random_crop(dataset.source[k], config.crop_size, rng));
  }
  for (int i = 0; i < b; ++i) {
    const auto k = uniform_index(rng, dataset.target.size());
    tgt.push_back(random_crop(dataset.target[k], config.crop_size, rng));
  }
  GanBatch batch;
  std::vector<const RgbImage*> ims;
  for (const auto& s : src) ims.push_back(&s.image);
  batch.x_s = images_to_tensor(ims);
  ims.clear();
  for (const auto& t : tgt) ims.push_back(&t.image);
  batch.x_t = images_to_tensor(ims);
  const int cs = config.crop_size;
  batch.y_s = LabelBatch{b, cs, cs, {}};
  std::vector<WeightMask> masks;
  for (const auto& s : src) {
    batch.y_s.ids.insert(batch.y_s.ids.end(), s.labels.ids.begin(), s.labels.ids.end());
    masks.push_back(build_weight_mask(s.labels, weighted, s.id));
  }
  batch.source_weight = reconstruction_weights<float>(masks);
  return batch;
}

// ------------------------------------------------------------------ trainer

GanTrainer::GanTrainer(TrainConfig config, ClassCatalog catalog)
    : config_((config.validate(), std::move(config))),
      catalog_(std::move(catalog)),
      models_(config_, catalog_.num_classes()),
      opt_d_(models_.discriminator_parameters(),
             AdamConfig{config_.learning_rate, config_.beta1, config_.beta2, 1e-8}),
      opt_g_(models_.generator_parameters(),
             AdamConfig{config_.learning_rate, config_.beta1, config_.beta2, 1e-8}) {
  if (models_.layout.trains && !catalog_.has_frequencies) {
    throw Error(ErrorCategory::kValidation, "trainer needs a catalog with class frequencies");
  }
}

LossBreakdown GanTrainer::train_step(const GanBatch& batch) {
  if (!models_.layout.trains) {
    ++step_;
    return LossBreakdown{};
  }
  Graph<float> g;
  const auto losses = build_losses(g, models_, config_.saturating_adv, batch.x_s, batch.y_s,
                                   batch.x_t, batch.source_weight);
  const LossBreakdown b = read_breakdown(g, losses);
  const std::pair<const char*, double> named[] = {
      {"adv_st", b.adv_st}, {"adv_ts", b.adv_ts}, {"g_adv_st", b.g_adv_st},
      {"g_adv_ts", b.g_adv_ts}, {"sem_st", b.sem_st}, {"sem_ts", b.sem_ts},
      {"rec", b.rec}, {"total_d", b.total_d}, {"total_g", b.total_g}};
  for (const auto& [name, value] : named) {
    if (!std::isfinite(value)) {
      throw Error(ErrorCategory::kNonFinite, std::string("loss term '") + name +
                                                 "' is not finite at step " +
                                                 std::to_string(step_ + 1));
    }
  }
  opt_d_.zero_grad();
  g.backward(losses.total_d, opt_d_.parameters());
  opt_g_.zero_grad();
  g.backward(losses.total_g, opt_g_.parameters());
  opt_d_.step();
  opt_g_.step();
  ++step_;
  return b;
}

LossBreakdown GanTrainer::train_step(const std::vector<LabeledImage>& batch_s,
                                     const std::vector<UnlabeledImage>& batch_t) {
  if (batch_s.empty() || batch_t.empty()) {
    throw Error(ErrorCategory::kValidation, "train_step: empty batch");
  }
  GanBatch batch;
  std::vector<const RgbImage*> ims;
  for (const auto& s : batch_s) ims.push_back(&s.image);
  batch.x_s = images_to_tensor(ims);
  ims.clear();
  for (const auto& t : batch_t) ims.push_back(&t.image);
  batch.x_t = images_to_tensor(ims);
  const auto& first = batch_s.front().labels;
  batch.y_s = LabelBatch{static_cast<int>(batch_s.size()), first.height, first.width, {}};
  std::vector<WeightMask> masks;
  for (const auto& s : batch_s) {
    batch.y_s.ids.insert(batch.y_s.ids.end(), s.labels.ids.begin(), s.labels.ids.end());
    masks.push_back(build_weight_mask(s.labels, catalog_, s.id));
  }
  batch.source_weight = reconstruction_weights<float>(masks);
  return train_step(batch);
}

void GanTrainer::save(const fs::path& path) {
  SnapshotFile file;
  file.meta()["kind"] = "gan";
  file.meta()["config"] = config_;
  file.meta()["num_classes"] = catalog_.num_classes();
  file.meta()["class_frequencies"] = catalog_.frequencies();
  file.meta()["step"] = step_;
  // Batch streams are keyed by (seed, step); this is the stream of the next
  // step, stored for inspection.
  file.meta()["rng_state"] =
      rng_state(make_rng({config_.seed, static_cast<std::uint64_t>(step_), kBatchStream}));
  models_.save(file);
  opt_d_.save(file, "opt_d");
  opt_g_.save(file, "opt_g");
  file.write(path);
}

void GanTrainer::load(const fs::path& path) {
  const SnapshotFile file = SnapshotFile::read(path);
  if (file.meta().value("kind", "") != "gan") {
    throw Error(ErrorCategory::kSpecMismatch, path.string() + " is not a GAN snapshot");
  }
  const TrainConfig saved = file.meta().at("config").get<TrainConfig>();
  if (saved.ablation_arm != config_.ablation_arm || !(saved.generator == config_.generator) ||
      !(saved.discriminator == config_.discriminator) ||
      file.meta().at("num_classes").get<int>() != catalog_.num_classes()) {
    throw Error(ErrorCategory::kSpecMismatch,
                path.string() + ": snapshot model layout differs from the config");
  }
  models_.load(file);
  opt_d_.load(file, "opt_d");
  opt_g_.load(file, "opt_g");
  step_ = file.meta().at("step").get<std::int64_t>();
}

// ------------------------------------------------------------------ train

namespace {

json breakdown_json(std::int64_t step, const LossBreakdown& b, double seconds) {
  return json{{"step", step},         {"adv_st", b.adv_st},     {"adv_ts", b.adv_ts},
              {"g_adv_st", b.g_adv_st}, {"g_adv_ts", b.g_adv_ts}, {"sem_st", b.sem_st},
              {"sem_ts", b.sem_ts},   {"rec", b.rec},           {"total_d", b.total_d},
              {"total_g", b.total_g}, {"wall_clock", seconds}};
}

// Keeps log records up to and including `step`, for resumed runs.
void truncate_log(const fs::path& log, std::int64_t step) {
  if (!fs::exists(log)) return;
  std::vector<std::string> kept;
  {
    std::ifstream in(log);
    std::string line;
    while (std::getline(in, line)) {
      const json j = json::parse(line, nullptr, false);
      if (!j.is_discarded() && j.value("step", std::int64_t{0}) <= step) kept.push_back(line);
    }
  }
  std::ofstream out(log, std::ios::trunc);
  for (const auto& line : kept) out << line << "\n";
}

void check_geometry(const TrainConfig& config, const DomainPairDataset& dataset) {
  const int cs = config.crop_size;
  check_divisible(cs, cs, config.generator.downsampling_stages, "generator crop");
  check_divisible(cs, cs, config.discriminator.encoder_stages, "discriminator crop");
  for (const auto& s : dataset.source) {
    if (s.image.height < cs || s.image.width < cs) {
      throw Error(ErrorCategory::kValidation,
                  "crop_size " + std::to_string(cs) + " exceeds source image " + s.id);
    }
  }
  for (const auto& t : dataset.target) {
    if (t.image.height < cs || t.image.width < cs) {
      throw Error(ErrorCategory::kValidation,
                  "crop_size " + std::to_string(cs) + " exceeds target image " + t.id);
    }
  }
}

}  // namespace

TrainResult train(const TrainConfig& config, const DomainPairDataset& dataset,
                  const TrainOptions& options) {
  config.validate();
  if (dataset.source.empty() || dataset.target.empty()) {
    throw Error(ErrorCategory::kStructural, "training needs source and target images");
  }
  const ClassCatalog catalog = dataset.catalog.has_frequencies
                                   ? dataset.catalog
                                   : compute_class_frequencies(dataset.source, dataset.catalog);
  const RunDirectory dir = RunDirectory::create(options.run_dir);
  RunManifest m;
  m.command = "train-gan";
  m.config = json{{"train", config}};
  m.dataset_fingerprint = options.dataset_fingerprint;
  m.class_frequencies = catalog.frequencies();
  m.dataset_path = options.dataset_path;
  ManifestWriter manifest(std::move(m), dir.manifest());

  TrainResult result;
  if (config.ablation_arm == AblationArm::kA) {
    manifest.manifest().outputs["note"] = "arm a trains no translation model";
    manifest.finish("complete");
    return result;
  }
  check_geometry(config, dataset);

  GanTrainer trainer(config, catalog);
  if (options.resume_from) {
    trainer.load(*options.resume_from);
    truncate_log(dir.log(), trainer.step());
    manifest.manifest().outputs["resumed_from"] = options.resume_from->string();
    manifest.manifest().outputs["resumed_at_step"] = trainer.step();
  } else {
    std::ofstream(dir.log(), std::ios::trunc);
  }
  std::ofstream log(dir.log(), std::ios::app);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  auto snapshot = [&](const fs::path& path) {
    try {
      trainer.save(path);
    } catch (const std::exception& e) {
      log.flush();
      manifest.finish("failed");
      throw Error(ErrorCategory::kIo, std::string("snapshot write failed: ") + e.what());
    }
  };

  try {
    while (trainer.step() < config.total_steps) {
      const GanBatch batch = assemble_batch(dataset, catalog, config, trainer.step());
      const LossBreakdown b = trainer.train_step(batch);
      const std::int64_t done = trainer.step();
      if (options.on_step) options.on_step(done, b);
      if (done % config.log_interval == 0 || done == config.total_steps) {
        log << breakdown_json(done, b, elapsed()).dump() << "\n";
        log.flush();
        result.log.emplace_back(done, b);
      }
      if (done % config.snapshot_interval == 0 && done != config.total_steps) {
        char name[32];
        std::snprintf(name, sizeof name, "step_%08lld.snap", static_cast<long long>(done));
        snapshot(dir.snapshots() / name);
      }
    }
  } catch (const Error& e) {
    log.flush();
    if (e.category() != ErrorCategory::kIo) manifest.finish("failed");
    throw;
  }
  result.final_snapshot = dir.snapshots() / "final.snap";
  snapshot(result.final_snapshot);
  manifest.manifest().outputs["final_snapshot"] = result.final_snapshot.string();
  manifest.manifest().outputs["steps"] = trainer.step();
  manifest.finish("complete");
  return result;
}

// ------------------------------------------------------------------ adapt

std::vector<RgbImage> translate(const fs::path& snapshot,
                                const std::vector<const RgbImage*>& images,
                                Direction direction) {
  const SnapshotFile file = SnapshotFile::read(snapshot);
  if (file.meta().value("kind", "") != "gan") {
    throw Error(ErrorCategory::kSpecMismatch, snapshot.string() + " is not a GAN snapshot");
  }
  const TrainConfig config = file.meta().at("config").get<TrainConfig>();
  GanModels<float> models(config, file.meta().at("num_classes").get<int>());
  models.load(file);
  auto& gen = direction == Direction::kSourceToTarget ? models.g_st : models.g_ts;
  if (!gen) {
    throw Error(ErrorCategory::kSpecMismatch,
                snapshot.string() + " holds no generator for the requested direction");
  }
  std::vector<RgbImage> out;
  out.reserve(images.size());
  for (const RgbImage* im : images) {
    check_divisible(im->height, im->width, config.generator.downsampling_stages,
                    "adapt_dataset");
    Graph<float> g;
    const Var y = gen->forward(g, g.constant(images_to_tensor({im})));
    out.push_back(tensor_to_image(g.value(y), 0));
  }
  return out;
}

void adapt_dataset(const fs::path& snapshot, const fs::path& input, const fs::path& output,
                   Direction direction) {
  if (!fs::exists(snapshot)) {
    throw Error(ErrorCategory::kMissingInput, "snapshot not found: " + snapshot.string());
  }
  if (fs::exists(output) && fs::equivalent(input, output)) {
    throw Error(ErrorCategory::kValidation, "adapt_dataset: output must differ from input");
  }
  const DomainPairDataset dataset = load_dataset(input);

  std::error_code ec;
  fs::create_directories(output, ec);
  for (const auto& entry : fs::recursive_directory_iterator(input)) {
    const fs::path rel = fs::relative(entry.path(), input);
    if (entry.is_directory()) {
      fs::create_directories(output / rel);
    } else if (entry.is_regular_file()) {
      fs::copy_file(entry.path(), output / rel, fs::copy_options::overwrite_existing);
    }
  }

  std::vector<const RgbImage*> images;
  std::vector<std::string> ids;
  if (direction == Direction::kSourceToTarget) {
    for (const auto& s : dataset.source) {
      images.push_back(&s.image);
      ids.push_back(s.id);
    }
  } else {
    for (const auto& t : dataset.target) {
      images.push_back(&t.image);
      ids.push_back(t.id);
    }
  }
  const auto translated = translate(snapshot, images, direction);
  const fs::path dir =
      output / (direction == Direction::kSourceToTarget ? "source" : "target") / "images";
  for (std::size_t i = 0; i < translated.size(); ++i) {
    write_png(dir / (ids[i] + ".png"), to_raster(translated[i]));
  }
  json note = {{"snapshot", fs::absolute(snapshot).string()},
               {"input", fs::absolute(input).string()},
               {"direction", direction == Direction::kSourceToTarget ? "s2t" : "t2s"},
               {"images", translated.size()}};
  std::ofstream(output / "adapted.json") << note.dump(2) << "\n";
  log_info("adapted " + std::to_string(translated.size()) + " images into " + output.string());
}

template struct GanModels<float>;
template struct GanModels<double>;
template LossGraph<float> build_losses(Graph<float>&, GanModels<float>&, bool,
                                       const Tensor<float>&, const LabelBatch&,
                                       const Tensor<float>&, const Tensor<float>&);
template LossGraph<double> build_losses(Graph<double>&, GanModels<double>&, bool,
                                        const Tensor<double>&, const LabelBatch&,
                                        const Tensor<double>&, const Tensor<double>&);
template LossBreakdown read_breakdown(const Graph<float>&, const LossGraph<float>&);
template LossBreakdown read_breakdown(const Graph<double>&, const LossGraph<double>&);

}  // namespace semgan
