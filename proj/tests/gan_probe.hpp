#pragma once

// A complete GAN small enough for finite differences: two generators and two
// dual-head discriminators totalling well under a thousand parameters, fed
// with one random 8x8 batch in double precision.

#include <algorithm>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "semgan/optim.hpp"
#include "semgan/trainer.hpp"

namespace semgan::testing {

inline TrainConfig probe_config(AblationArm arm = AblationArm::kE) {
  TrainConfig c;
  c.ablation_arm = arm;
  c.weights = LossWeights{1.0, 3.0};
  c.batch_size = 2;
  c.crop_size = 8;
  c.seed = 17;
  c.generator = GeneratorSpec{1, 1, 1, 1.0};
  c.discriminator = DiscriminatorSpec{1, 1, 5, true};
  return c;
}

struct GanProbe {
  explicit GanProbe(const TrainConfig& c, std::uint64_t data_seed = 5)
      : config(c), models(c, c.discriminator.num_classes) {
    Rng rng = make_rng({data_seed});
    const Shape s{c.batch_size, 3, c.crop_size, c.crop_size};
    x_s = Tensor<double>(s);
    x_t = Tensor<double>(s);
    for (auto& v : x_s.values()) v = uniform_real(rng, -0.9, 0.9);
    for (auto& v : x_t.values()) v = uniform_real(rng, -0.9, 0.9);
    y_s = LabelBatch{c.batch_size, c.crop_size, c.crop_size, {}};
    weight = Tensor<double>(Shape{c.batch_size, 1, c.crop_size, c.crop_size});
    for (std::size_t i = 0; i < weight.size(); ++i) {
      const int label = static_cast<int>(uniform_index(rng, c.discriminator.num_classes));
      y_s.ids.push_back(label);
      weight[i] = 1.0 - 0.1 * (label + 1);
    }
  }

  LossGraph<double> build(Graph<double>& g) {
    return build_losses(g, models, config.saturating_adv, x_s, y_s, x_t, weight);
  }

  std::vector<Parameter<double>*> generator_params() { return models.generator_parameters(); }
  std::vector<Parameter<double>*> discriminator_params() {
    return models.discriminator_parameters();
  }
  std::vector<Parameter<double>*> all_params() {
    auto out = generator_params();
    for (auto* p : discriminator_params()) out.push_back(p);
    return out;
  }

  TrainConfig config;
  GanModels<double> models;
  Tensor<double> x_s, x_t, weight;
  LabelBatch y_s;
};

using TermPicker = Var (*)(Graph<double>&, const LossGraph<double>&);

inline Var pick_total_d(Graph<double>&, const LossGraph<double>& l) { return l.total_d; }
inline Var pick_total_g(Graph<double>&, const LossGraph<double>& l) { return l.total_g; }
inline Var pick_rec(Graph<double>&, const LossGraph<double>& l) { return l.rec; }
inline Var pick_sem(Graph<double>& g, const LossGraph<double>& l) {
  const Var t[] = {l.sem_st, l.sem_ts};
  const double c[] = {1.0, 1.0};
  return g.weighted_sum(t, c);
}
inline Var pick_adv(Graph<double>& g, const LossGraph<double>& l) {
  const Var t[] = {l.adv_st, l.adv_ts};
  const double c[] = {1.0, 1.0};
  return g.weighted_sum(t, c);
}

// Gradient of one loss term with respect to params, flattened.
inline std::vector<double> gradient_of(GanProbe& probe, TermPicker pick,
                                       const std::vector<Parameter<double>*>& params) {
  for (auto* p : probe.all_params()) p->zero_grad();
  Graph<double> g;
  const auto losses = probe.build(g);
  g.backward(pick(g, losses), params);
  std::vector<double> out;
  for (auto* p : params) out.insert(out.end(), p->grad.values().begin(), p->grad.values().end());
  return out;
}

inline bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}
inline bool any_nonzero(const std::vector<double>& v) { return !all_zero(v); }

inline std::vector<double> flat_values(const std::vector<Parameter<double>*>& params) {
  std::vector<double> out;
  for (auto* p : params) out.insert(out.end(), p->value.values().begin(), p->value.values().end());
  return out;
}

struct RoutingReport {
  bool rec_only_generators = false;
  bool sem_reaches_both = false;
  bool d_update_keeps_generators = false;
  bool g_update_keeps_discriminators = false;
  bool adversarial_sign_split = false;
  bool no_dead_parameters = false;
  std::vector<std::string> dead;

  bool ok() const {
    return rec_only_generators && sem_reaches_both && d_update_keeps_generators &&
           g_update_keeps_discriminators && adversarial_sign_split && no_dead_parameters;
  }
};

inline RoutingReport check_routing(GanProbe& probe) {
  RoutingReport r;
  const auto gp = probe.generator_params();
  const auto dp = probe.discriminator_params();
  const auto all = probe.all_params();

  r.rec_only_generators = all_zero(gradient_of(probe, pick_rec, dp)) &&
                          any_nonzero(gradient_of(probe, pick_rec, gp));
  r.sem_reaches_both = any_nonzero(gradient_of(probe, pick_sem, dp)) &&
                       any_nonzero(gradient_of(probe, pick_sem, gp));

  // The discriminator gradient of L_D is -dL_adv/dD plus the semantic part.
  {
    const auto gd = gradient_of(probe, pick_total_d, dp);
    const auto ga = gradient_of(probe, pick_adv, dp);
    const auto gs = gradient_of(probe, pick_sem, dp);
    const double ls = probe.models.layout.weights.lambda_sem;
    bool ok = true;
    for (std::size_t i = 0; i < gd.size(); ++i) {
      const double expect = -ga[i] + ls * gs[i];
      ok &= std::abs(gd[i] - expect) <= 1e-12 * std::max(1.0, std::abs(expect));
    }
    r.adversarial_sign_split = ok && any_nonzero(ga);
  }

  // One D step and one G step with real optimizers.
  {
    AdamConfig ac{1e-2, 0.5, 0.999, 1e-8};
    Adam<double> opt_d(dp, ac), opt_g(gp, ac);
    const auto g_before = flat_values(gp);
    const auto d_before = flat_values(dp);
    Graph<double> g;
    const auto losses = probe.build(g);
    opt_d.zero_grad();
    g.backward(losses.total_d, dp);
    opt_d.step();
    r.d_update_keeps_generators = flat_values(gp) == g_before && flat_values(dp) != d_before;
    const auto d_after = flat_values(dp);
    opt_g.zero_grad();
    g.backward(losses.total_g, gp);
    opt_g.step();
    r.g_update_keeps_discriminators = flat_values(dp) == d_after && flat_values(gp) != g_before;
    // restore
    std::size_t k = 0;
    for (auto* p : gp)
      for (auto& v : p->value.values()) v = g_before[k++];
    k = 0;
    for (auto* p : dp)
      for (auto& v : p->value.values()) v = d_before[k++];
  }

  // Every parameter tensor is reached by L_G (generators) or L_D (discriminators).
  for (auto* p : all) p->zero_grad();
  {
    Graph<double> g;
    const auto losses = probe.build(g);
    g.backward(losses.total_g, gp);
    g.backward(losses.total_d, dp);
  }
  for (auto* p : all) {
    bool nonzero = false;
    for (double v : p->grad.values()) nonzero |= v != 0.0;
    if (!nonzero) r.dead.push_back(p->name);
  }
  r.no_dead_parameters = r.dead.empty();
  return r;
}

// Finite-difference check of L_D and L_G over every parameter.
inline std::pair<GradCheckStats, GradCheckStats> check_gan_gradients(GanProbe& probe) {
  const auto all = probe.all_params();
  auto build_d = [&](Graph<double>& g) { return probe.build(g).total_d; };
  auto build_g = [&](Graph<double>& g) { return probe.build(g).total_g; };
  return {check_gradients(all, build_d), check_gradients(all, build_g)};
}

}  // namespace semgan::testing
