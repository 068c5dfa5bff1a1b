#include "dida/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_map>

#include <json.hpp>

namespace dida {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::DidaT: return "dida_t";
    case Variant::DidaD: return "dida_d";
    case Variant::DidaA: return "dida_a";
    case Variant::Dida: return "dida";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  if (name == "dida_t") return Variant::DidaT;
  if (name == "dida_d") return Variant::DidaD;
  if (name == "dida_a") return Variant::DidaA;
  if (name == "dida") return Variant::Dida;
  throw ConfigError("unknown variant: " + name);
}

ModelConfig model_config(const TrainConfig& cfg, const Resources& res) {
  ModelConfig mc;
  mc.d_g = res.embeddings.dim;
  mc.d_emotion = emotion_dim(res.lexicon);
  mc.d_h = cfg.d_h;
  mc.max_text_len = cfg.max_text_len;
  mc.max_comments = cfg.max_comments;
  mc.l2 = cfg.l2;
  mc.use_coattention = cfg.variant != Variant::DidaT;
  mc.use_temporal = cfg.use_temporal;
  return mc;
}

MetricReport compute_metrics(const std::vector<int>& labels, const std::vector<double>& p_fake) {
  if (labels.empty() || labels.size() != p_fake.size())
    throw RuntimeError("compute_metrics needs matching non-empty labels and probabilities");
  // Confusion counts per class from argmax predictions.
  long tp[2] = {0, 0}, fp[2] = {0, 0}, fn[2] = {0, 0};
  long correct = 0;
  double sq_err = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int pred = p_fake[i] > 0.5 ? 1 : 0;
    int y = labels[i];
    if (pred == y) {
      ++correct;
      ++tp[y];
    } else {
      ++fp[pred];
      ++fn[y];
    }
    double diff = p_fake[i] - y;
    sq_err += diff * diff;
  }
  MetricReport m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  double f1_sum = 0;
  for (int c = 0; c < 2; ++c) {
    double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    f1_sum += denom > 0 ? 2.0 * tp[c] / denom : 0.0;
  }
  m.macro_f1 = f1_sum / 2.0;
  m.rmse = std::sqrt(sq_err / static_cast<double>(labels.size()));
  return m;
}

namespace {

std::vector<PreparedRecord> prepare_all(const std::vector<NewsRecord>& records,
                                        const Resources& res, const ModelConfig& mc) {
  std::vector<PreparedRecord> out;
  out.reserve(records.size());
  for (const auto& rec : records)
    out.push_back(prepare_record(rec, res.embeddings, res.lexicon, res.emotion, mc));
  return out;
}

MetricReport evaluate_prepared(const std::vector<PreparedRecord>& records,
                               const ModelParams& params, const ModelConfig& mc) {
  std::vector<int> labels;
  std::vector<double> probs;
  for (const auto& rec : records) {
    labels.push_back(rec.label);
    probs.push_back(classify(encode_record(rec, params, mc).x_nc, params)[1]);
  }
  return compute_metrics(labels, probs);
}

struct Adam {
  Vec m, v;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  explicit Adam(int n) : m(Vec::Zero(n)), v(Vec::Zero(n)) {}

  void update(Vec& theta, const Vec& grad, double lr) {
    ++step;
    m = beta1 * m + (1 - beta1) * grad;
    v = beta2 * v + (1 - beta2) * grad.cwiseProduct(grad);
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    theta -= (lr / bc1) * m.cwiseQuotient(((v / bc2).cwiseSqrt().array() + eps).matrix());
  }
};

// Shared optimization loop; phase-specific callers differ only in data and
// epoch count.
void run_epochs(std::vector<PreparedRecord>& train_set,
                const std::vector<PreparedRecord>& val_set, const TrainConfig& cfg,
                const ModelConfig& mc, int epochs, std::mt19937_64& shuffle_rng, Adam& adam,
                Vec& theta, TrainResult& result, int epoch_offset) {
  std::vector<int> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    ModelParams params = unflatten_params(theta, mc);
    double loss_sum = 0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::vector<PreparedRecord> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i)
        batch.push_back(train_set[order[i]]);
      ModelParams grads = zero_params(mc);
      double loss = batch_loss_and_gradients(batch, params, mc, &grads);
      if (!std::isfinite(loss))
        throw RuntimeError("training diverged at epoch " +
                           std::to_string(epoch_offset + epoch + 1) + ", batch " +
                           std::to_string(batches));
      loss_sum += loss;
      ++batches;
      adam.update(theta, flatten_params(grads), cfg.learning_rate);
      params = unflatten_params(theta, mc);
    }

    EpochStats stats;
    stats.epoch = epoch_offset + epoch + 1;
    stats.train_loss = batches > 0 ? loss_sum / batches : 0.0;
    if (!val_set.empty()) {
      MetricReport val = evaluate_prepared(val_set, params, mc);
      stats.val_macro_f1 = val.macro_f1;
      stats.val_accuracy = val.accuracy;
    }
    result.history.push_back(stats);
    // >= keeps the latest epoch among ties: same validation score, lower
    // training loss and sharper probabilities.
    if (result.best_epoch < 0 || stats.val_macro_f1 >= result.best_val_macro_f1) {
      result.best_epoch = stats.epoch;
      result.best_val_macro_f1 = stats.val_macro_f1;
      result.params = params;
    }
  }
}

}  // namespace

TrainResult train(const DatasetSplit& split, const TrainConfig& cfg, const Resources& res) {
  ModelConfig mc = model_config(cfg, res);
  std::vector<PreparedRecord> train_set = prepare_all(split.train, res, mc);
  std::vector<PreparedRecord> val_set = prepare_all(split.validation, res, mc);
  if (train_set.empty()) throw RuntimeError("empty training split");

  TrainResult result;
  result.model_cfg = mc;
  result.params = init_params(mc, cfg.seed);
  Vec theta = flatten_params(result.params);
  Adam adam(static_cast<int>(theta.size()));
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x5e11a9u);
  run_epochs(train_set, val_set, cfg, mc, cfg.epochs, shuffle_rng, adam, theta, result, 0);
  return result;
}

MetricReport evaluate(const ModelParams& params, const ModelConfig& cfg, const Resources& res,
                      const std::vector<NewsRecord>& records) {
  if (records.empty()) throw RuntimeError("evaluate needs a non-empty record list");
  std::vector<int> labels;
  std::vector<double> probs;
  for (const auto& rec : records) {
    if (!rec.label) throw RuntimeError("evaluate needs labeled records: " + rec.id);
    PreparedRecord prep = prepare_record(rec, res.embeddings, res.lexicon, res.emotion, cfg);
    labels.push_back(*rec.label);
    probs.push_back(classify(encode_record(prep, params, cfg).x_nc, params)[1]);
  }
  return compute_metrics(labels, probs);
}

EnhancedTrainResult train_with_enhancement(const DatasetSplit& split, const TrainConfig& cfg,
                                           const Resources& res, const AugmentPlan& plan,
                                           double tau_p, double tau_n,
                                           const AugmentResources& aug_res,
                                           TranslatorClient* translator) {
  EnhancedTrainResult out;
  out.result = train(split, cfg, res);
  const ModelConfig& mc = out.result.model_cfg;

  std::vector<LabeledExample> expanded;
  if (cfg.variant == Variant::DidaA) {
    // Ablation row: every variant inherits its parent label, no selection.
    std::size_t skipped = 0;
    auto variants = augment_corpus(split.train, plan, cfg.seed, aug_res, translator, &skipped);
    out.report.variants = variants.size();
    out.report.skipped = skipped;
    out.report.tau_p = tau_p;
    out.report.tau_n = tau_n;
    std::unordered_map<std::string, int> parent_label;
    for (const auto& rec : split.train)
      if (rec.label) parent_label[rec.id] = *rec.label;
    for (const auto& rec : split.train)
      if (rec.label) expanded.push_back({rec, *rec.label, false});
    for (const auto& v : variants) {
      int label = parent_label.at(v.parent_id);
      NewsRecord rec = v.record;
      rec.label = label;
      if (label == 1) ++out.report.selected_pos;
      else ++out.report.selected_neg;
      expanded.push_back({std::move(rec), label, true});
    }
  } else {
    ScoringContext ctx{&res.embeddings, &res.lexicon, &res.emotion, &mc};
    auto [set, report] = enhancement_round(split.train, out.result.params, plan, tau_p, tau_n,
                                           cfg.seed, aug_res, ctx, translator);
    expanded = std::move(set);
    out.report = report;
  }

  if (expanded.size() <= split.train.size()) return out;  // nothing admitted

  ModelConfig mc2 = mc;
  std::vector<PreparedRecord> train_set;
  for (const auto& ex : expanded) {
    PreparedRecord prep = prepare_record(ex.record, res.embeddings, res.lexicon, res.emotion, mc2);
    prep.label = ex.label;
    prep.pseudo = ex.pseudo;
    train_set.push_back(std::move(prep));
  }
  std::vector<PreparedRecord> val_set = prepare_all(split.validation, res, mc2);

  Vec theta = flatten_params(out.result.params);
  Adam adam(static_cast<int>(theta.size()));
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0xe44a4cu);
  int epochs = cfg.enhance_epochs >= 0 ? cfg.enhance_epochs : cfg.epochs;
  run_epochs(train_set, val_set, cfg, mc2, epochs, shuffle_rng, adam, theta, out.result,
             cfg.epochs);
  return out;
}

CvReport crossvalidate(const std::vector<NewsRecord>& records, const TrainConfig& cfg,
                       const Resources& res, int k, const AugmentPlan* plan, double tau_p,
                       double tau_n, const AugmentResources* aug_res,
                       TranslatorClient* translator) {
  auto splits = make_splits(records, SplitScheme::kfold(k), cfg.seed);
  CvReport report;
  bool enhance = (cfg.variant == Variant::Dida || cfg.variant == Variant::DidaA) && plan;
  for (const auto& split : splits) {
    TrainResult result;
    if (enhance) {
      result = train_with_enhancement(split, cfg, res, *plan, tau_p, tau_n, *aug_res, translator)
                   .result;
    } else {
      result = train(split, cfg, res);
    }
    report.folds.push_back(evaluate(result.params, result.model_cfg, res, split.test));
  }
  for (const auto& fold : report.folds) {
    report.mean.macro_f1 += fold.macro_f1;
    report.mean.rmse += fold.rmse;
    report.mean.accuracy += fold.accuracy;
  }
  double n = static_cast<double>(report.folds.size());
  report.mean.macro_f1 /= n;
  report.mean.rmse /= n;
  report.mean.accuracy /= n;
  return report;
}

std::string metrics_to_json(const CvReport& report) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : report.folds) {
    folds.push_back({{"macro_f1", f.macro_f1}, {"rmse", f.rmse}, {"accuracy", f.accuracy}});
  }
  nlohmann::json j = {{"folds", folds},
                      {"mean",
                       {{"macro_f1", report.mean.macro_f1},
                        {"rmse", report.mean.rmse},
                        {"rmse_x100", 100.0 * report.mean.rmse},
                        {"accuracy", report.mean.accuracy}}}};
  return j.dump(2);
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path);
  out << "epoch,train_loss,val_macro_f1,val_accuracy\n";
  for (const auto& h : history) {
    out << h.epoch << ',' << h.train_loss << ',' << h.val_macro_f1 << ',' << h.val_accuracy
        << "\n";
  }
}

}  // namespace dida
