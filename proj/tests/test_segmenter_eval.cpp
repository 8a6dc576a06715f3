#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "semgan/config.hpp"
#include "semgan/errors.hpp"
#include "semgan/segmenter_eval.hpp"
#include "semgan/toyworld.hpp"
#include "support.hpp"

using namespace semgan;
using namespace semgan::testing;
namespace fs = std::filesystem;

namespace {

SegTrainConfig tiny_seg(int iterations = 120) {
  SegTrainConfig c;
  c.iterations = iterations;
  c.batch_size = 4;
  c.learning_rate = 3e-3;
  c.crop_size = 16;
  c.seed = 4;
  c.log_interval = 40;
  c.segmenter = SegmenterSpec{6, 2, 5};
  return c;
}

SceneSpec small_scene() {
  SceneSpec s;
  s.image_size = 16;
  s.seed = 12;
  return s;
}

}  // namespace

TEST_CASE("segmenter config defaults and validation") {
  SegTrainConfig defaults;
  CHECK(defaults.iterations == 100000);
  CHECK(defaults.batch_size == 4);
  CHECK(defaults.learning_rate == 1e-4);
  CHECK(defaults.crop_size == 1024);
  defaults.validate();
  auto bad = tiny_seg();
  bad.iterations = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("equal seeds train identical segmenters") {
  const auto data = generate_labeled(small_scene(), default_target_style(5), 0, 12, kTargetTag);
  const auto eval = generate_labeled(small_scene(), default_target_style(5), 100, 6, kTargetTag);
  std::vector<std::pair<int, double>> log_a, log_b;
  auto a = train_segmenter(data, tiny_seg(), [&](int it, double l) { log_a.emplace_back(it, l); });
  auto b = train_segmenter(data, tiny_seg(), [&](int it, double l) { log_b.emplace_back(it, l); });
  CHECK(log_a.size() == 3);
  CHECK(log_a == log_b);
  const auto ra = evaluate(a, eval, "x"), rb = evaluate(b, eval, "x");
  CHECK(std::abs(ra.miou - rb.miou) <= 1e-4);
  CHECK(std::abs(ra.pixel_accuracy - rb.pixel_accuracy) <= 1e-4);
  CHECK(ra.confusion == rb.confusion);
  CHECK(ra.arm == "x");
  // learning happened: better than predicting background everywhere
  std::uint64_t background = 0, total = 0;
  for (const auto& s : eval) {
    for (auto id : s.labels.ids) background += id == 0;
    total += s.labels.ids.size();
  }
  CHECK(ra.pixel_accuracy > static_cast<double>(background) / total);
}

TEST_CASE("segmenter snapshots round trip") {
  TempDir dir("seg");
  const auto data = generate_labeled(small_scene(), default_target_style(5), 0, 6, kTargetTag);
  auto seg = train_segmenter(data, tiny_seg(30));
  seg.save(dir / "seg.snap");
  auto back = TrainedSegmenter::load(dir / "seg.snap");
  CHECK(back.spec() == seg.spec());
  for (const auto& s : data) CHECK(back.predict(s.image).ids == seg.predict(s.image).ids);

  TrainedSegmenter fresh(SegmenterSpec{6, 2, 5}, 1);
  const auto p = fresh.predict(data[0].image);
  CHECK(p.height == 16);
  CHECK(p.width == 16);
  for (auto id : p.ids) CHECK(id < 5);
}

TEST_CASE("evaluation needs data") {
  TrainedSegmenter seg(SegmenterSpec{4, 1, 5}, 1);
  CHECK_THROWS_AS(evaluate(seg, {}), Error);
  CHECK_THROWS_AS(semantic_preservation_score(seg, {}), Error);
  CHECK_THROWS_AS(train_segmenter({}, tiny_seg()), Error);
}

TEST_CASE("preservation score reference points") {
  const auto world_scene = small_scene();
  const auto style = default_target_style(5);
  auto oracle = train_segmenter(
      generate_labeled(world_scene, style, kAuxiliaryIndexBase, 24, kTargetTag), tiny_seg(200));

  const auto renders = generate_labeled(world_scene, style, 0, 10, kTargetTag);
  SUBCASE("untouched target renders give the oracle's own accuracy") {
    CHECK(semantic_preservation_score(oracle, renders) ==
          evaluate(oracle, renders).pixel_accuracy);
  }
  SUBCASE("noise images score at chance") {
    Rng rng = make_rng({77});
    std::vector<LabeledImage> noise;
    std::vector<double> freq(5, 0.0);
    double total = 0.0;
    for (const auto& r : renders) {
      noise.push_back({r.id, random_image(16, 16, rng), r.labels});
      for (auto id : r.labels.ids) freq[id] += 1.0;
      total += static_cast<double>(r.labels.ids.size());
    }
    const double own = evaluate(oracle, renders).pixel_accuracy;
    const double on_noise = semantic_preservation_score(oracle, noise);
    // Against scene labels a content-blind prediction can at best match the
    // most frequent class.
    CHECK(on_noise <= *std::max_element(freq.begin(), freq.end()) / total + 0.02);
    CHECK(on_noise < own);
    // Against uniformly distributed labels any content-blind prediction
    // agrees on 1/C of the pixels.
    for (auto& s : noise) s.labels = random_label_map(16, 16, 5, rng);
    for (int k = 0; k < 30; ++k) {
      noise.push_back({"n", random_image(16, 16, rng), random_label_map(16, 16, 5, rng)});
    }
    CHECK(std::abs(semantic_preservation_score(oracle, noise) - 0.2) < 0.02);
  }
}

TEST_CASE("ablation config validation and JSON") {
  AblationConfig c;
  CHECK(c.arms.size() == 2);
  c.validate();
  c.seeds.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  c = AblationConfig{};
  c.jobs = 0;
  CHECK_THROWS_AS(c.validate(), Error);

  AblationConfig d;
  d.arms = {AblationArm::kA, AblationArm::kD, AblationArm::kE};
  d.seeds = {0, 1, 2};
  const AblationConfig back = nlohmann::json(d).get<AblationConfig>();
  CHECK(back.arms == d.arms);
  CHECK(back.seeds == d.seeds);
}

TEST_CASE("ablation on a tiny toy world") {
  TempDir dir("ablate");
  SceneSpec spec = small_scene();
  generate_dataset(spec, default_source_style(5), default_target_style(5), 8, 8, 4,
                   dir / "data");
  AblationConfig c;
  c.arms = {AblationArm::kA, AblationArm::kE};
  c.seeds = {0};
  c.gan.total_steps = 3;
  c.gan.batch_size = 2;
  c.gan.crop_size = 16;
  c.gan.log_interval = 1;
  c.gan.generator = GeneratorSpec{4, 1, 1, 1.0};
  c.gan.discriminator = DiscriminatorSpec{4, 1, 5, true};
  c.seg = tiny_seg(10);
  c.oracle = tiny_seg(10);
  c.oracle_images = 8;

  const auto table = run_ablation(dir / "data", c, dir / "out");
  REQUIRE(table.cells.size() == 2);
  CHECK(table.mean_miou(AblationArm::kA).has_value());
  CHECK(table.mean_miou(AblationArm::kE).has_value());
  CHECK_FALSE(table.mean_miou(AblationArm::kD).has_value());
  CHECK(table.mean_preservation(AblationArm::kE).has_value());
  CHECK(fs::exists(dir / "out/ablation.txt"));
  CHECK(fs::exists(dir / "out/ablation.csv"));
  CHECK(fs::exists(dir / "out/cells/a_seed0/report.json"));
  CHECK_FALSE(fs::exists(dir / "out/cells/a_seed0/gan/snapshots/final.snap"));
  CHECK(fs::exists(dir / "out/cells/e_seed0/gan/snapshots/final.snap"));

  const std::string text = format_ablation(table);
  for (const char* needle : {"(a)", "(e)", "mIoU", "18.23", "34.27", "84.48"}) {
    CHECK(text.find(needle) != std::string::npos);
  }
  const auto round = ablation_from_json(ablation_json(table));
  CHECK(round.cells.size() == 2);
  CHECK(*round.mean_miou(AblationArm::kE) == *table.mean_miou(AblationArm::kE));

  // finished cells are reused
  const auto stamp = fs::last_write_time(dir / "out/cells/e_seed0/report.json");
  const auto again = run_ablation(dir / "data", c, dir / "out");
  CHECK(fs::last_write_time(dir / "out/cells/e_seed0/report.json") == stamp);
  CHECK(*again.mean_miou(AblationArm::kE) == *table.mean_miou(AblationArm::kE));
}

TEST_CASE("ablation needs held-out target labels") {
  TempDir dir("ablate");
  generate_dataset(small_scene(), default_source_style(5), default_target_style(5), 4, 4, 2,
                   dir / "data");
  fs::remove_all(dir / "data/target_eval");
  AblationConfig c;
  c.arms = {AblationArm::kA};
  c.seg = tiny_seg(5);
  CHECK_THROWS_AS(run_ablation(dir / "data", c, dir / "out"), Error);
}
