#pragma once

// Training objectives. Each loss exists twice: as graph operations used for
// training (differentiable) and as plain value functions over tensors used
// by tools and tests. The value functions build a throwaway graph, so both
// paths share one implementation.

#include <string>

#include "semgan/graph.hpp"
#include "semgan/weighting.hpp"

namespace semgan {

// Probabilities are clamped to [eps, 1 - eps] before logarithms.
inline constexpr double kProbEpsilon = 1e-7;

struct LossWeights {
  double lambda_sem = 1.0;
  double lambda_rec = 3.0;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

// Per-step record of every loss term. adv_* are values of the adversarial
// objective  E[log D(real)] + E[log(1 - D(G(x)))]  per direction (always
// <= 0); g_adv_* are the generator-side adversarial objectives actually
// minimised (saturating or non-saturating); sem_st is the cross entropy of
// the target discriminator's segmentation head on adapted source images,
// sem_ts that of the source discriminator's head on raw source images.
struct LossBreakdown {
  double adv_st = 0.0;
  double adv_ts = 0.0;
  double g_adv_st = 0.0;
  double g_adv_ts = 0.0;
  double sem_st = 0.0;
  double sem_ts = 0.0;
  double rec = 0.0;
  double total_d = 0.0;
  double total_g = 0.0;
};

struct LossParts {
  double adv = 0.0;    // summed adversarial objective (both directions)
  double g_adv = 0.0;  // generator-side adversarial term
  double sem = 0.0;
  double rec = 0.0;

  // Generator-side term equal to the adversarial objective itself.
  static LossParts faithful(double adv, double sem, double rec) {
    return LossParts{adv, adv, sem, rec};
  }
  static LossParts from(const LossBreakdown& b);
};

struct ComposedLosses {
  double discriminator = 0.0;  // -adv + lambda_sem * sem
  double generator = 0.0;      // g_adv + lambda_sem * sem + lambda_rec * rec
};

// Throws NonFinite naming the offending part.
ComposedLosses compose_losses(const LossParts& parts, const LossWeights& weights);

// ---------------------------------------------------------- graph versions

template <typename T>
struct AdversarialTerms {
  Var objective;    // E[log D(real)] + E[log(1 - D(fake))]
  Var d_objective;  // -objective, minimised by the discriminator
  Var g_objective;  // minimised by the generator
};

template <typename T>
AdversarialTerms<T> adversarial_terms(Graph<T>& g, Var d_on_real, Var d_on_fake,
                                      bool saturating);

template <typename T>
struct SemanticTerms {
  Var on_adapted;  // target head on adapted source images
  Var on_source;   // source head on raw source images
  Var total;
};

template <typename T>
SemanticTerms<T> semantic_terms(Graph<T>& g, Var seg_logits_on_adapted,
                                Var seg_logits_on_source, const LabelBatch& labels);

// mean |target_cycle - x_t| + mean over pixels and channels of
// source_weight * |source_cycle - x_s|, source_weight = 1 - w broadcast over
// channels (N x 1 x H x W). A null weight means 1 everywhere.
template <typename T>
Var weighted_cycle_term(Graph<T>& g, Var target_cycle, Var x_t, Var source_cycle,
                        Var x_s, const Tensor<T>* source_weight);

// ---------------------------------------------------------- value versions

struct AdversarialValues {
  double objective = 0.0;
  double d_objective = 0.0;
  double g_objective = 0.0;
};

// Scores must be probabilities in [0, 1]; NaN or out-of-range values throw.
AdversarialValues adversarial_loss_pair(const Tensor<double>& d_on_real,
                                        const Tensor<double>& d_on_fake,
                                        bool saturating = false);

// Logits are N x C x H x W, labels N x H x W.
double semantic_loss(const Tensor<double>& seg_logits_on_adapted,
                     const Tensor<double>& seg_logits_on_source,
                     const LabelBatch& labels);

// Images are N x 3 x H x W; masks are one per sample, aligned with x_s.
double weighted_cycle_loss(const Tensor<double>& target_cycle, const Tensor<double>& x_t,
                           const Tensor<double>& source_cycle, const Tensor<double>& x_s,
                           const std::vector<WeightMask>& w);

// N x 1 x H x W tensor of (1 - w).
template <typename T>
Tensor<T> reconstruction_weights(const std::vector<WeightMask>& masks);

// Throws Validation when a score tensor holds NaN or values outside [0, 1].
template <typename T>
void check_probabilities(const Tensor<T>& scores, const std::string& what);

}  // namespace semgan
