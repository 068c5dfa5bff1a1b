#ifndef DIDA_TRAINING_HPP
#define DIDA_TRAINING_HPP

#include <vector>

#include "dida/corpus.hpp"
#include "dida/model.hpp"
#include "dida/pseudolabel.hpp"

namespace dida {

// Ablation ladder: dida_t = pooled features + chronological emotion,
// dida_d = dida_t + interactive co-attention, dida_a = dida_d + augmented
// variants inheriting parent labels, dida = dida_d + confidence-gated
// pseudo-labels.
enum class Variant { DidaT, DidaD, DidaA, Dida };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 50;
  int batch_size = 32;
  double l2 = 0.01;
  int max_text_len = 50;
  int max_comments = 345;
  int d_h = 32;
  std::uint64_t seed = 42;
  Variant variant = Variant::Dida;
  bool use_temporal = true;  // temporal-emotion ablation switch
  int enhance_epochs = -1;   // phase-3 epochs; -1 = same as epochs
};

struct Resources {
  EmbeddingTable embeddings;
  EmotionLexicon lexicon;
  EmotionConfig emotion;
};

ModelConfig model_config(const TrainConfig& cfg, const Resources& res);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0;
  double val_macro_f1 = 0;
  double val_accuracy = 0;
};

struct TrainResult {
  ModelParams params;  // best validation macro-F1 checkpoint
  ModelConfig model_cfg;
  std::vector<EpochStats> history;
  int best_epoch = -1;
  double best_val_macro_f1 = 0;
};

// Adam over shuffled mini-batches of the supervised objective.  Deterministic
// given seed; divergence (non-finite loss) is fatal with epoch/batch index.
TrainResult train(const DatasetSplit& split, const TrainConfig& cfg, const Resources& res);

struct MetricReport {
  double macro_f1 = 0;
  double rmse = 0;
  double accuracy = 0;
};

// argmax predictions; macro F1 averages per-class F1 with empty classes
// contributing 0; RMSE over the fake-class probability.
MetricReport evaluate(const ModelParams& params, const ModelConfig& cfg, const Resources& res,
                      const std::vector<NewsRecord>& records);

MetricReport compute_metrics(const std::vector<int>& labels, const std::vector<double>& p_fake);

struct EnhancedTrainResult {
  TrainResult result;
  RoundReport report;
};

// Phase 1 trains on the labeled split; phase 2 expands it (gated
// pseudo-labels, or label inheritance for the dida_a variant); phase 3
// continues training on the expanded set.  Best checkpoint by validation
// macro F1 across all phases.  An empty expansion returns the phase-1 result
// unchanged.
EnhancedTrainResult train_with_enhancement(const DatasetSplit& split, const TrainConfig& cfg,
                                           const Resources& res, const AugmentPlan& plan,
                                           double tau_p, double tau_n,
                                           const AugmentResources& aug_res,
                                           TranslatorClient* translator = nullptr);

struct CvReport {
  std::vector<MetricReport> folds;
  MetricReport mean;
};

// Five-fold protocol; the variant decides whether folds run plain training
// or the enhancement pipeline.
CvReport crossvalidate(const std::vector<NewsRecord>& records, const TrainConfig& cfg,
                       const Resources& res, int k = 5, const AugmentPlan* plan = nullptr,
                       double tau_p = 0.9, double tau_n = 0.9,
                       const AugmentResources* aug_res = nullptr,
                       TranslatorClient* translator = nullptr);

std::string metrics_to_json(const CvReport& report);
void write_history_csv(const std::string& path, const std::vector<EpochStats>& history);

}  // namespace dida

#endif
