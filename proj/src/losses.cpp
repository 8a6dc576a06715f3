#include "semgan/losses.hpp"

#include <cmath>

#include "semgan/errors.hpp"

namespace semgan {

void LossWeights::validate() const {
  if (!(lambda_sem >= 0.0) || !(lambda_rec >= 0.0) || !std::isfinite(lambda_sem) ||
      !std::isfinite(lambda_rec)) {
    throw Error(ErrorCategory::kValidation, "loss weights must be finite and >= 0");
  }
}

LossParts LossParts::from(const LossBreakdown& b) {
  return LossParts{b.adv_st + b.adv_ts, b.g_adv_st + b.g_adv_ts, b.sem_st + b.sem_ts,
                   b.rec};
}

ComposedLosses compose_losses(const LossParts& parts, const LossWeights& weights) {
  weights.validate();
  const std::pair<const char*, double> named[] = {
      {"adv", parts.adv}, {"g_adv", parts.g_adv}, {"sem", parts.sem}, {"rec", parts.rec}};
  for (const auto& [name, value] : named) {
    if (!std::isfinite(value)) {
      throw Error(ErrorCategory::kNonFinite,
                  std::string("loss part '") + name + "' is not finite");
    }
  }
  ComposedLosses out;
  out.discriminator = -parts.adv + weights.lambda_sem * parts.sem;
  out.generator =
      parts.g_adv + weights.lambda_sem * parts.sem + weights.lambda_rec * parts.rec;
  return out;
}

template <typename T>
void check_probabilities(const Tensor<T>& scores, const std::string& what) {
  for (T v : scores.values()) {
    if (std::isnan(v) || v < T{0} || v > T{1}) {
      throw Error(ErrorCategory::kValidation,
                  what + ": score " + std::to_string(static_cast<double>(v)) +
                      " is not a probability");
    }
  }
}

template <typename T>
AdversarialTerms<T> adversarial_terms(Graph<T>& g, Var d_on_real, Var d_on_fake,
                                      bool saturating) {
  check_probabilities(g.value(d_on_real), "discriminator score on real");
  check_probabilities(g.value(d_on_fake), "discriminator score on fake");
  const T eps = static_cast<T>(kProbEpsilon);
  const Var log_real = g.mean_log(d_on_real, false, eps);
  const Var log_not_fake = g.mean_log(d_on_fake, true, eps);
  AdversarialTerms<T> out;
  const Var parts[] = {log_real, log_not_fake};
  const T plus[] = {T{1}, T{1}};
  const T minus[] = {T{-1}, T{-1}};
  out.objective = g.weighted_sum(parts, plus);
  out.d_objective = g.weighted_sum(parts, minus);
  if (saturating) {
    out.g_objective = log_not_fake;
  } else {
    const Var log_fake = g.mean_log(d_on_fake, false, eps);
    const Var terms[] = {log_fake};
    const T coef[] = {T{-1}};
    out.g_objective = g.weighted_sum(terms, coef);
  }
  return out;
}

template <typename T>
SemanticTerms<T> semantic_terms(Graph<T>& g, Var seg_logits_on_adapted,
                                Var seg_logits_on_source, const LabelBatch& labels) {
  if (!(g.value(seg_logits_on_adapted).shape() == g.value(seg_logits_on_source).shape())) {
    throw Error(ErrorCategory::kValidation, "semantic loss: logits shapes differ");
  }
  SemanticTerms<T> out;
  out.on_adapted = g.softmax_cross_entropy(seg_logits_on_adapted, labels);
  out.on_source = g.softmax_cross_entropy(seg_logits_on_source, labels);
  const Var parts[] = {out.on_adapted, out.on_source};
  const T coef[] = {T{1}, T{1}};
  out.total = g.weighted_sum(parts, coef);
  return out;
}

template <typename T>
Var weighted_cycle_term(Graph<T>& g, Var target_cycle, Var x_t, Var source_cycle, Var x_s,
                        const Tensor<T>* source_weight) {
  const Var target_term = g.weighted_l1(target_cycle, x_t, nullptr);
  const Var source_term = g.weighted_l1(source_cycle, x_s, source_weight);
  const Var parts[] = {target_term, source_term};
  const T coef[] = {T{1}, T{1}};
  return g.weighted_sum(parts, coef);
}

template <typename T>
Tensor<T> reconstruction_weights(const std::vector<WeightMask>& masks) {
  if (masks.empty()) throw Error(ErrorCategory::kValidation, "no weight masks");
  const int h = masks.front().height, w = masks.front().width;
  Tensor<T> out(Shape{static_cast<int>(masks.size()), 1, h, w});
  for (std::size_t n = 0; n < masks.size(); ++n) {
    if (masks[n].height != h || masks[n].width != w) {
      throw Error(ErrorCategory::kValidation, "weight masks differ in size");
    }
    T* dst = out.sample(static_cast<int>(n));
    for (std::size_t i = 0; i < masks[n].values.size(); ++i) {
      dst[i] = static_cast<T>(1.0 - masks[n].values[i]);
    }
  }
  return out;
}

AdversarialValues adversarial_loss_pair(const Tensor<double>& d_on_real,
                                        const Tensor<double>& d_on_fake, bool saturating) {
  Graph<double> g;
  const auto terms =
      adversarial_terms(g, g.constant(d_on_real), g.constant(d_on_fake), saturating);
  return {g.value(terms.objective).item(), g.value(terms.d_objective).item(),
          g.value(terms.g_objective).item()};
}

double semantic_loss(const Tensor<double>& seg_logits_on_adapted,
                     const Tensor<double>& seg_logits_on_source, const LabelBatch& labels) {
  Graph<double> g;
  try {
    const auto terms = semantic_terms(g, g.constant(seg_logits_on_adapted),
                                      g.constant(seg_logits_on_source), labels);
    return g.value(terms.total).item();
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCategory::kValidation, std::string("semantic loss: ") + e.what());
  }
}

double weighted_cycle_loss(const Tensor<double>& target_cycle, const Tensor<double>& x_t,
                           const Tensor<double>& source_cycle, const Tensor<double>& x_s,
                           const std::vector<WeightMask>& w) {
  const Tensor<double> weights = reconstruction_weights<double>(w);
  Graph<double> g;
  try {
    return g
        .value(weighted_cycle_term(g, g.constant(target_cycle), g.constant(x_t),
                                   g.constant(source_cycle), g.constant(x_s), &weights))
        .item();
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCategory::kValidation, std::string("cycle loss: ") + e.what());
  }
}

template void check_probabilities<float>(const Tensor<float>&, const std::string&);
template void check_probabilities<double>(const Tensor<double>&, const std::string&);
template AdversarialTerms<float> adversarial_terms(Graph<float>&, Var, Var, bool);
template AdversarialTerms<double> adversarial_terms(Graph<double>&, Var, Var, bool);
template SemanticTerms<float> semantic_terms(Graph<float>&, Var, Var, const LabelBatch&);
template SemanticTerms<double> semantic_terms(Graph<double>&, Var, Var, const LabelBatch&);
template Var weighted_cycle_term(Graph<float>&, Var, Var, Var, Var, const Tensor<float>*);
template Var weighted_cycle_term(Graph<double>&, Var, Var, Var, Var, const Tensor<double>*);
template Tensor<float> reconstruction_weights<float>(const std::vector<WeightMask>&);
template Tensor<double> reconstruction_weights<double>(const std::vector<WeightMask>&);

}  // namespace semgan
