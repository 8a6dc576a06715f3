#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "semgan/errors.hpp"
#include "semgan/metrics.hpp"
#include "support.hpp"

using namespace semgan;
using namespace semgan::testing;

TEST_CASE("identical prediction scores one") {
  Rng rng = make_rng({41});
  const auto gt = random_label_map(8, 8, 4, rng);
  ConfusionMatrix cm(4);
  cm.add(gt, gt);
  const auto r = make_report(cm);
  CHECK(r.miou == 1.0);
  CHECK(r.pixel_accuracy == 1.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(cm.at(i, j) == 0);
}

TEST_CASE("half-and-half example") {
  LabelMap gt{2, 2, {0, 0, 1, 1}};
  LabelMap pred{2, 2, {0, 0, 0, 0}};
  ConfusionMatrix cm(2);
  cm.add(gt, pred);
  const auto r = make_report(cm);
  CHECK(r.pixel_accuracy == 0.5);
  CHECK(*r.per_class_iou[0] == 0.5);
  CHECK(*r.per_class_iou[1] == 0.0);
  CHECK(r.miou == 0.25);
}

TEST_CASE("classes absent from both maps are excluded") {
  ConfusionMatrix cm(3);
  cm.add(LabelMap{1, 2, {0, 1}}, LabelMap{1, 2, {0, 1}});
  const auto r = make_report(cm);
  CHECK_FALSE(r.per_class_iou[2].has_value());
  CHECK(r.miou == 1.0);
}

TEST_CASE("reports match a brute-force oracle") {
  Rng rng = make_rng({42});
  std::vector<LabelMap> gt, pred;
  ConfusionMatrix cm(6);
  for (int i = 0; i < 50; ++i) {
    gt.push_back(random_label_map(32, 32, 6, rng));
    pred.push_back(random_label_map(32, 32, 6, rng));
    cm.add(gt.back(), pred.back());
  }
  const auto r = make_report(cm);
  const auto o = metrics_oracle(gt, pred, 6);
  CHECK(r.confusion == o.confusion);
  CHECK(r.per_class_iou == o.iou);
  CHECK(r.miou == o.miou);
  CHECK(r.pixel_accuracy == o.accuracy);
  CHECK(cm.total() == 50u * 32 * 32);
}

TEST_CASE("merge is associative and matches single-pass accumulation") {
  Rng rng = make_rng({43});
  ConfusionMatrix a(4), b(4), c(4), all(4);
  for (auto* m : {&a, &b, &c}) {
    for (int i = 0; i < 3; ++i) {
      const auto g = random_label_map(5, 9, 4, rng), p = random_label_map(5, 9, 4, rng);
      m->add(g, p);
      all.add(g, p);
    }
  }
  ConfusionMatrix left = a;
  left.merge(b);
  left.merge(c);
  ConfusionMatrix bc = b;
  bc.merge(c);
  ConfusionMatrix right = a;
  right.merge(bc);
  CHECK(left == right);
  CHECK(left == all);
  CHECK(make_report(left).miou == make_report(all).miou);
}

TEST_CASE("relabeling by a permutation permutes the matrix") {
  Rng rng = make_rng({44});
  const int k = 5;
  std::vector<std::uint8_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  ConfusionMatrix cm(k), permuted(k);
  for (int i = 0; i < 10; ++i) {
    auto g = random_label_map(6, 6, k, rng), p = random_label_map(6, 6, k, rng);
    cm.add(g, p);
    for (auto& v : g.ids) v = perm[v];
    for (auto& v : p.ids) v = perm[v];
    permuted.add(g, p);
  }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) CHECK(permuted.at(perm[i], perm[j]) == cm.at(i, j));
  const auto r1 = make_report(cm), r2 = make_report(permuted);
  CHECK(r1.pixel_accuracy == r2.pixel_accuracy);
  CHECK(r1.miou == doctest::Approx(r2.miou).epsilon(1e-15));
}

TEST_CASE("IoU bounded by recall and precision") {
  Rng rng = make_rng({45});
  ConfusionMatrix cm(4);
  for (int i = 0; i < 5; ++i) cm.add(random_label_map(8, 8, 4, rng), random_label_map(8, 8, 4, rng));
  const auto r = make_report(cm);
  for (int c = 0; c < 4; ++c) {
    std::uint64_t row = 0, col = 0;
    for (int j = 0; j < 4; ++j) {
      row += cm.at(c, j);
      col += cm.at(j, c);
    }
    REQUIRE(r.per_class_iou[c].has_value());
    const double iou = *r.per_class_iou[c];
    CHECK(iou >= 0.0);
    CHECK(iou <= static_cast<double>(cm.at(c, c)) / row);
    CHECK(iou <= static_cast<double>(cm.at(c, c)) / col);
  }
}

TEST_CASE("metrics errors and JSON round trip") {
  ConfusionMatrix cm(3);
  CHECK_THROWS_AS(make_report(cm), Error);
  CHECK_THROWS_AS(cm.add(LabelMap{1, 1, {3}}, LabelMap{1, 1, {0}}), Error);
  CHECK_THROWS_AS(cm.add(LabelMap{1, 1, {0}}, LabelMap{1, 2, {0, 0}}), Error);
  CHECK_THROWS_AS(cm.merge(ConfusionMatrix(4)), Error);
  cm.add(LabelMap{1, 3, {0, 1, 1}}, LabelMap{1, 3, {0, 1, 0}});
  const auto r = make_report(cm, "e");
  const MetricsReport back = nlohmann::json(r).get<MetricsReport>();
  CHECK(back.arm == "e");
  CHECK(back.confusion == r.confusion);
  CHECK(back.per_class_iou == r.per_class_iou);
  CHECK(back.miou == r.miou);
  CHECK(format_report(r).find("mIoU") != std::string::npos);
}
