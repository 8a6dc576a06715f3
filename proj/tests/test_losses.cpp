#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "semgan/errors.hpp"
#include "semgan/losses.hpp"
#include "semgan/random.hpp"

using namespace semgan;

namespace {

Tensor<double> filled(Shape s, double v) { return Tensor<double>(s, v); }

WeightMask uniform_mask(int h, int w, double value) {
  WeightMask m;
  m.height = h;
  m.width = w;
  m.values.assign(static_cast<std::size_t>(h) * w, value);
  return m;
}

LabelBatch constant_labels(int n, int h, int w, int id) {
  return LabelBatch{n, h, w, std::vector<std::int32_t>(static_cast<std::size_t>(n) * h * w, id)};
}

// Per-pixel log-softmax written out directly.
double cross_entropy_oracle(const Tensor<double>& logits, const LabelBatch& y) {
  const Shape s = logits.shape();
  double total = 0.0;
  for (int n = 0; n < s.n; ++n) {
    for (int i = 0; i < s.h; ++i) {
      for (int j = 0; j < s.w; ++j) {
        double z = 0.0;
        for (int c = 0; c < s.c; ++c) z += std::exp(logits.at(n, c, i, j));
        const int label = y.ids[(static_cast<std::size_t>(n) * s.h + i) * s.w + j];
        total += std::log(z) - logits.at(n, label, i, j);
      }
    }
  }
  return total / (static_cast<double>(s.n) * s.h * s.w);
}

}  // namespace

TEST_CASE("adversarial objective at the 0.5 saddle") {
  const auto v = adversarial_loss_pair(filled({2, 1, 4, 4}, 0.5), filled({2, 1, 4, 4}, 0.5));
  CHECK(v.objective == doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-12));
  CHECK(v.d_objective == doctest::Approx(1.3862943611).epsilon(1e-9));
  // non-saturating generator term: -log 0.5
  CHECK(v.g_objective == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("saturating generator objective at 0.5 is ln 0.5") {
  const auto v =
      adversarial_loss_pair(filled({1, 1, 2, 2}, 0.5), filled({1, 1, 2, 2}, 0.5), true);
  CHECK(v.g_objective == doctest::Approx(-0.6931471806).epsilon(1e-9));
}

TEST_CASE("adversarial objective approaches its supremum at perfect scores") {
  const double eps = kProbEpsilon;
  const auto v = adversarial_loss_pair(filled({1, 1, 2, 2}, 1.0 - eps), filled({1, 1, 2, 2}, eps));
  CHECK(v.objective <= 0.0);
  CHECK(v.objective > -3e-7);
  // exact 0/1 scores are clamped rather than producing -inf
  const auto c = adversarial_loss_pair(filled({1, 1, 1, 1}, 0.0), filled({1, 1, 1, 1}, 1.0));
  CHECK(std::isfinite(c.objective));
  CHECK(c.objective == doctest::Approx(2.0 * std::log(eps)).epsilon(1e-9));
}

TEST_CASE("adversarial objective is never positive on probabilities") {
  Rng rng = make_rng({21});
  for (int trial = 0; trial < 50; ++trial) {
    Tensor<double> real({1, 1, 3, 3}), fake({1, 1, 3, 3});
    for (auto& x : real.values()) x = uniform01(rng);
    for (auto& x : fake.values()) x = uniform01(rng);
    CHECK(adversarial_loss_pair(real, fake).objective <= 0.0);
  }
}

TEST_CASE("scores outside [0,1] or NaN are rejected") {
  auto bad = filled({1, 1, 1, 2}, 0.5);
  bad[1] = 1.5;
  CHECK_THROWS_AS(adversarial_loss_pair(bad, filled({1, 1, 1, 2}, 0.5)), Error);
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  try {
    adversarial_loss_pair(filled({1, 1, 1, 2}, 0.5), bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::kValidation);
  }
}

TEST_CASE("uniform logits give ln C per head") {
  for (int classes : {2, 3, 5, 19}) {
    const auto logits = filled({2, classes, 4, 4}, 0.25);
    const auto y = constant_labels(2, 4, 4, classes - 1);
    CHECK(semantic_loss(logits, logits, y) ==
          doctest::Approx(2.0 * std::log(static_cast<double>(classes))).epsilon(1e-12));
  }
}

TEST_CASE("both heads uniform over five classes give 2 ln 5") {
  const auto logits = filled({1, 5, 3, 3}, 0.0);
  CHECK(semantic_loss(logits, logits, constant_labels(1, 3, 3, 2)) ==
        doctest::Approx(3.2188758249).epsilon(1e-9));
}

TEST_CASE("confident correct heads drive the semantic loss to zero") {
  Tensor<double> logits({1, 3, 2, 2}, -40.0);
  const auto y = constant_labels(1, 2, 2, 1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) logits.at(0, 1, i, j) = 40.0;
  const double l = semantic_loss(logits, logits, y);
  CHECK(l >= 0.0);
  CHECK(l < 1e-30);
}

TEST_CASE("semantic loss matches a per-pixel softmax oracle") {
  Rng rng = make_rng({22});
  for (int trial = 0; trial < 20; ++trial) {
    Tensor<double> a({2, 3, 8, 8}), b({2, 3, 8, 8});
    for (auto& x : a.values()) x = uniform_real(rng, -4.0, 4.0);
    for (auto& x : b.values()) x = uniform_real(rng, -4.0, 4.0);
    LabelBatch y{2, 8, 8, {}};
    for (int i = 0; i < 128; ++i) y.ids.push_back(static_cast<int>(uniform_index(rng, 3)));
    const double expect = cross_entropy_oracle(a, y) + cross_entropy_oracle(b, y);
    CHECK(semantic_loss(a, b, y) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("semantic loss shape mismatch is an error") {
  CHECK_THROWS_AS(semantic_loss(filled({1, 3, 2, 2}, 0), filled({1, 4, 2, 2}, 0),
                                constant_labels(1, 2, 2, 0)),
                  Error);
  CHECK_THROWS_AS(semantic_loss(filled({1, 3, 2, 2}, 0), filled({1, 3, 2, 2}, 0),
                                constant_labels(1, 3, 3, 0)),
                  Error);
}

TEST_CASE("cycle loss vanishes for identity generators") {
  Rng rng = make_rng({23});
  Tensor<double> xs({2, 3, 4, 4}), xt({2, 3, 4, 4});
  for (auto& x : xs.values()) x = uniform_real(rng, -1, 1);
  for (auto& x : xt.values()) x = uniform_real(rng, -1, 1);
  const std::vector<WeightMask> w(2, uniform_mask(4, 4, 0.3));
  CHECK(weighted_cycle_loss(xt, xt, xs, xs, w) == 0.0);
}

TEST_CASE("w equal to one leaves only the target term") {
  const auto xt = filled({1, 3, 2, 2}, 0.0);
  const auto ct = filled({1, 3, 2, 2}, 0.4);
  const auto xs = filled({1, 3, 2, 2}, -0.5);
  const auto cs = filled({1, 3, 2, 2}, 0.9);
  const std::vector<WeightMask> w{uniform_mask(2, 2, 1.0)};
  CHECK(weighted_cycle_loss(ct, xt, cs, xs, w) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("single-pixel weighted cycle example") {
  const auto zero = filled({1, 3, 1, 1}, 0.0);
  const std::vector<WeightMask> w{uniform_mask(1, 1, 0.75)};
  const double l = weighted_cycle_loss(zero, zero, filled({1, 3, 1, 1}, 0.5),
                                       filled({1, 3, 1, 1}, 0.2), w);
  CHECK(l == doctest::Approx(0.075).epsilon(1e-12));
}

TEST_CASE("cycle loss is non-negative and checks shapes") {
  Rng rng = make_rng({24});
  for (int trial = 0; trial < 20; ++trial) {
    Tensor<double> a({1, 3, 2, 2}), b({1, 3, 2, 2}), c({1, 3, 2, 2}), d({1, 3, 2, 2});
    for (auto* t : {&a, &b, &c, &d})
      for (auto& x : t->values()) x = uniform_real(rng, -1, 1);
    CHECK(weighted_cycle_loss(a, b, c, d, {uniform_mask(2, 2, uniform01(rng))}) >= 0.0);
  }
  CHECK_THROWS_AS(weighted_cycle_loss(filled({1, 3, 2, 2}, 0), filled({1, 3, 2, 3}, 0),
                                      filled({1, 3, 2, 2}, 0), filled({1, 3, 2, 2}, 0),
                                      {uniform_mask(2, 2, 0.5)}),
                  Error);
}

TEST_CASE("composition with the default weights") {
  const LossWeights w;
  CHECK(w.lambda_sem == 1.0);
  CHECK(w.lambda_rec == 3.0);
  const auto c = compose_losses(LossParts::faithful(-1.3863, 3.2189, 0.5), w);
  CHECK(c.generator == doctest::Approx(3.3326).epsilon(1e-12));
  CHECK(c.discriminator == doctest::Approx(1.3863 + 3.2189).epsilon(1e-12));
}

TEST_CASE("zero lambdas reduce to the adversarial objective") {
  const LossWeights w{0.0, 0.0};
  const auto c = compose_losses(LossParts::faithful(-0.9, 2.0, 7.0), w);
  CHECK(c.generator == -0.9);
  CHECK(c.discriminator == 0.9);
}

TEST_CASE("discriminator loss at the adversarial optimum is the weighted semantic term") {
  const auto c = compose_losses(LossParts::faithful(0.0, 1.7, 0.2), LossWeights{2.0, 3.0});
  CHECK(c.discriminator == 3.4);
}

TEST_CASE("composition is linear in the reconstruction part") {
  const LossWeights w;
  const auto base = compose_losses(LossParts::faithful(-1.0, 1.0, 0.0), w);
  const auto one = compose_losses(LossParts::faithful(-1.0, 1.0, 0.25), w);
  const auto two = compose_losses(LossParts::faithful(-1.0, 1.0, 0.5), w);
  CHECK(two.generator - base.generator == 2.0 * (one.generator - base.generator));
  CHECK(one.discriminator == base.discriminator);
}

TEST_CASE("non-finite parts are named") {
  LossParts p = LossParts::faithful(-1.0, 1.0, 1.0);
  p.sem = std::numeric_limits<double>::infinity();
  try {
    compose_losses(p, LossWeights{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::kNonFinite);
    CHECK(std::string(e.what()).find("sem") != std::string::npos);
  }
  CHECK_THROWS_AS(compose_losses(LossParts::faithful(-1, 1, 1), LossWeights{-1.0, 3.0}), Error);
}

TEST_CASE("reconstruction weights hold one minus w") {
  WeightMask m;
  m.height = 1;
  m.width = 2;
  m.values = {0.9, 0.1};
  const auto t = reconstruction_weights<double>({m});
  CHECK(t.shape() == Shape{1, 1, 1, 2});
  CHECK(t[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(t[1] == doctest::Approx(0.9).epsilon(1e-15));
}
