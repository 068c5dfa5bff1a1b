#include "dida/pseudolabel.hpp"

#include <cmath>

#include <json.hpp>

namespace dida {

std::vector<std::pair<AugmentedRecord, double>> score_variants(
    const std::vector<AugmentedRecord>& variants, const ModelParams& params,
    const ScoringContext& ctx, std::size_t* skipped) {
  std::vector<std::pair<AugmentedRecord, double>> scored;
  std::size_t skip_count = 0;
  for (const auto& variant : variants) {
    try {
      PreparedRecord prep =
          prepare_record(variant.record, *ctx.table, *ctx.lexicon, *ctx.emotion, *ctx.model);
      EncodedBundle bundle = encode_record(prep, params, *ctx.model);
      Vec prob = classify(bundle.x_nc, params);
      scored.emplace_back(variant, prob[1]);
    } catch (const std::exception&) {
      ++skip_count;
    }
  }
  if (skipped) *skipped = skip_count;
  return scored;
}

std::vector<PseudoExample> select(const std::vector<std::pair<AugmentedRecord, double>>& scored,
                                  double tau_p, double tau_n) {
  if (tau_p <= 0.5 || tau_p > 1.0 || tau_n <= 0.5 || tau_n > 1.0)
    throw ConfigError("pseudo-label thresholds must lie in (0.5, 1]");
  std::vector<PseudoExample> out;
  out.reserve(scored.size());
  for (const auto& [variant, p] : scored) {
    PseudoExample ex;
    ex.variant = variant;
    ex.p = p;
    if (p >= tau_p) {
      ex.y_tilde = 1;
      ex.gate = 1;
    } else if (1.0 - p >= tau_n) {
      ex.y_tilde = 0;
      ex.gate = 1;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

double pseudo_loss(const std::vector<PseudoExample>& batch, const ModelParams& params,
                   const ScoringContext& ctx) {
  double total = 0.0;
  std::size_t gated = 0;
  for (const auto& ex : batch) {
    if (!ex.gate) continue;
    PreparedRecord prep =
        prepare_record(ex.variant.record, *ctx.table, *ctx.lexicon, *ctx.emotion, *ctx.model);
    EncodedBundle bundle = encode_record(prep, params, *ctx.model);
    double y_hat = classify(bundle.x_nc, params)[1];
    total += supervised_loss(ex.y_tilde, y_hat);
    ++gated;
  }
  return gated == 0 ? 0.0 : total / static_cast<double>(gated);
}

std::string RoundReport::to_json() const {
  nlohmann::json j = {{"round", round},
                      {"variants", variants},
                      {"selected_pos", selected_pos},
                      {"selected_neg", selected_neg},
                      {"skipped", skipped},
                      {"tau_p", tau_p},
                      {"tau_n", tau_n}};
  return j.dump();
}

std::pair<std::vector<LabeledExample>, RoundReport> enhancement_round(
    const std::vector<NewsRecord>& labeled, const ModelParams& params, const AugmentPlan& plan,
    double tau_p, double tau_n, std::uint64_t seed, const AugmentResources& aug_res,
    const ScoringContext& ctx, TranslatorClient* translator) {
  RoundReport report;
  report.tau_p = tau_p;
  report.tau_n = tau_n;

  std::size_t aug_skipped = 0, score_skipped = 0;
  std::vector<AugmentedRecord> variants =
      augment_corpus(labeled, plan, seed, aug_res, translator, &aug_skipped);
  report.variants = variants.size();
  auto scored = score_variants(variants, params, ctx, &score_skipped);
  report.skipped = aug_skipped + score_skipped;
  auto selected = select(scored, tau_p, tau_n);

  std::vector<LabeledExample> expanded;
  for (const auto& rec : labeled) {
    if (!rec.label) continue;
    expanded.push_back({rec, *rec.label, false});
  }
  for (const auto& ex : selected) {
    if (!ex.gate) continue;
    if (ex.y_tilde == 1) ++report.selected_pos;
    else ++report.selected_neg;
    NewsRecord rec = ex.variant.record;
    rec.label = ex.y_tilde;
    expanded.push_back({std::move(rec), ex.y_tilde, true});
  }
  return {std::move(expanded), report};
}

}  // namespace dida
