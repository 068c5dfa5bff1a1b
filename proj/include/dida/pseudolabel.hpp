#ifndef DIDA_PSEUDOLABEL_HPP
#define DIDA_PSEUDOLABEL_HPP

#include <vector>

#include "dida/augment.hpp"
#include "dida/model.hpp"

namespace dida {

struct PseudoExample {
  AugmentedRecord variant;
  double p = 0.5;   // model probability of the fake class
  int y_tilde = 0;  // assigned pseudo-label
  int gate = 0;     // 1 = participates in the pseudo-label loss
};

struct ScoringContext {
  const EmbeddingTable* table;
  const EmotionLexicon* lexicon;
  const EmotionConfig* emotion;
  const ModelConfig* model;
};

// Fake-class probability per variant, order-preserving; variants that fail
// to encode are skipped and counted.
std::vector<std::pair<AugmentedRecord, double>> score_variants(
    const std::vector<AugmentedRecord>& variants, const ModelParams& params,
    const ScoringContext& ctx, std::size_t* skipped = nullptr);

// Class-wise confidence gate, one output per input in order: gate 1 with
// y_tilde 1 iff p >= tau_p, gate 1 with y_tilde 0 iff 1 - p >= tau_n, gate 0
// otherwise.  Thresholds are inclusive and must exceed 0.5 so the admission
// regions stay disjoint.
std::vector<PseudoExample> select(const std::vector<std::pair<AugmentedRecord, double>>& scored,
                                  double tau_p, double tau_n);

// Gated cross entropy, averaged over gated examples only; all gates zero
// yields 0.
double pseudo_loss(const std::vector<PseudoExample>& batch, const ModelParams& params,
                   const ScoringContext& ctx);

struct RoundReport {
  int round = 1;
  std::size_t variants = 0;
  std::size_t selected_pos = 0;
  std::size_t selected_neg = 0;
  std::size_t skipped = 0;
  double tau_p = 0.9;
  double tau_n = 0.9;

  std::string to_json() const;
};

struct LabeledExample {
  NewsRecord record;
  int label = 0;
  bool pseudo = false;
};

// One expand-score-select pass: augment the labeled set, score variants with
// the trained model, and admit the confident ones as pseudo-labeled
// supplements.  Zero selected returns the original set unchanged.
std::pair<std::vector<LabeledExample>, RoundReport> enhancement_round(
    const std::vector<NewsRecord>& labeled, const ModelParams& params, const AugmentPlan& plan,
    double tau_p, double tau_n, std::uint64_t seed, const AugmentResources& aug_res,
    const ScoringContext& ctx, TranslatorClient* translator = nullptr);

}  // namespace dida

#endif
