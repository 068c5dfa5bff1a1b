// Command-line front end: synth / prepare / train / enhance / evaluate /
// predict / crossval.  Every run is reproducible from its resolved
// configuration plus seed; --dump-config persists that resolution.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "dida/training.hpp"

using namespace dida;

namespace {

struct ResourceArgs {
  std::string embeddings_path;
  std::string lexicon_path;
  bool synthetic = false;
  int emb_dim = 32;
  std::uint64_t emb_seed = 13;
};

void add_resource_options(CLI::App* cmd, ResourceArgs& args) {
  cmd->add_option("--embeddings", args.embeddings_path, "word vector file (token v1 ... vd)");
  cmd->add_option("--lexicon", args.lexicon_path, "emotion lexicon directory");
  cmd->add_flag("--synthetic-resources", args.synthetic,
                "use the built-in synthetic embeddings and lexicon");
  cmd->add_option("--emb-dim", args.emb_dim, "synthetic embedding width")->check(CLI::PositiveNumber);
  cmd->add_option("--emb-seed", args.emb_seed, "synthetic embedding seed");
}

Resources load_resources(const ResourceArgs& args) {
  Resources res;
  if (args.synthetic) {
    res.embeddings = synthetic_embeddings(args.emb_dim, args.emb_seed);
    res.lexicon = synthetic_lexicon();
    return res;
  }
  if (args.embeddings_path.empty() || args.lexicon_path.empty())
    throw ConfigError("--embeddings and --lexicon are required unless --synthetic-resources");
  res.embeddings = load_embeddings(args.embeddings_path);
  res.lexicon = load_lexicon(args.lexicon_path);
  return res;
}

struct TrainArgs {
  TrainConfig cfg;
  std::string variant = "dida";
  bool no_temporal = false;
  double train_ratio = 0.7, val_ratio = 0.15, test_ratio = 0.15;
};

void add_train_options(CLI::App* cmd, TrainArgs& args) {
  cmd->add_option("--lr", args.cfg.learning_rate, "learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", args.cfg.epochs, "training epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", args.cfg.batch_size, "mini-batch size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--l2", args.cfg.l2, "weight decay")->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-text-len", args.cfg.max_text_len, "token cap per text")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-comments", args.cfg.max_comments, "comment cap per record")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--d-h", args.cfg.d_h, "GRU hidden width per direction")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", args.cfg.seed, "run seed");
  cmd->add_option("--variant", args.variant, "dida_t | dida_d | dida_a | dida");
  cmd->add_flag("--no-temporal", args.no_temporal, "ablate the chronological emotion feature");
  cmd->add_option("--train-ratio", args.train_ratio, "train split fraction");
  cmd->add_option("--val-ratio", args.val_ratio, "validation split fraction");
  cmd->add_option("--test-ratio", args.test_ratio, "test split fraction");
}

TrainConfig resolve_train_config(const TrainArgs& args) {
  TrainConfig cfg = args.cfg;
  cfg.variant = parse_variant(args.variant);
  cfg.use_temporal = !args.no_temporal;
  return cfg;
}

struct EnhanceArgs {
  std::string strategies = "embedding:1";
  double rate = 0.1;
  double tau_p = 0.9;
  double tau_n = 0.9;
  std::string translator = "stub";
  std::string mt_host;
  int mt_port = 443;
  std::string mt_path = "/translate";
  std::string synonyms_path;
  std::string pivot_lang = "fr";
  std::string source_lang = "en";
  int enhance_epochs = -1;
  std::string report_path;
};

void add_enhance_options(CLI::App* cmd, EnhanceArgs& args) {
  cmd->add_option("--strategies", args.strategies,
                  "comma list of strategy:multiplier (synonym, embedding, masked_lm, "
                  "back_translation)");
  cmd->add_option("--rate", args.rate, "substitution rate in (0, 0.3]");
  cmd->add_option("--tau-p", args.tau_p, "fake-class admission threshold");
  cmd->add_option("--tau-n", args.tau_n, "true-class admission threshold");
  cmd->add_option("--translator", args.translator, "stub | http");
  cmd->add_option("--mt-host", args.mt_host, "translation service host");
  cmd->add_option("--mt-port", args.mt_port, "translation service port");
  cmd->add_option("--mt-path", args.mt_path, "translation service path");
  cmd->add_option("--synonyms", args.synonyms_path, "synonym tsv for the synonym strategy");
  cmd->add_option("--pivot-lang", args.pivot_lang, "back-translation pivot language");
  cmd->add_option("--source-lang", args.source_lang, "corpus language");
  cmd->add_option("--enhance-epochs", args.enhance_epochs,
                  "phase-3 epochs (-1 = same as --epochs)");
  cmd->add_option("--report", args.report_path, "write the selection round report here");
}

AugmentPlan parse_plan(const EnhanceArgs& args) {
  AugmentPlan plan;
  plan.rate = args.rate;
  plan.pivot_lang = args.pivot_lang;
  plan.source_lang = args.source_lang;
  std::stringstream ss(args.strategies);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto colon = item.find(':');
    std::string name = item.substr(0, colon);
    int mult = 1;
    if (colon != std::string::npos) mult = std::stoi(item.substr(colon + 1));
    if (mult <= 0) throw ConfigError("strategy multiplier must be positive: " + item);
    plan.entries.emplace_back(parse_strategy(name), mult);
  }
  if (plan.entries.empty()) throw ConfigError("--strategies resolved to an empty plan");
  return plan;
}

std::unique_ptr<TranslatorClient> make_translator(const EnhanceArgs& args) {
  if (args.translator == "stub") return std::make_unique<StubTranslator>();
  if (args.translator == "http") {
    auto t = std::make_unique<HttpTranslator>();
    if (args.mt_host.empty()) throw ConfigError("--translator http requires --mt-host");
    t->host = args.mt_host;
    t->port = args.mt_port;
    t->path = args.mt_path;
    return t;
  }
  throw ConfigError("unknown translator: " + args.translator);
}

DatasetFormat parse_format(const std::string& name) {
  if (name == "jsonl") return DatasetFormat::Jsonl;
  if (name == "rumoureval19") return DatasetFormat::RumourEval19;
  if (name == "weibo16") return DatasetFormat::Weibo16;
  throw ConfigError("unknown dataset format: " + name);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path);
  out << content;
}

std::string single_metrics_json(const MetricReport& m) {
  nlohmann::json j = {{"macro_f1", m.macro_f1},
                      {"macro_f1_x100", 100 * m.macro_f1},
                      {"rmse", m.rmse},
                      {"rmse_x100", 100 * m.rmse},
                      {"accuracy", m.accuracy},
                      {"accuracy_x100", 100 * m.accuracy}};
  return j.dump(2) + "\n";
}

void maybe_dump_config(const CLI::App* cmd, const std::string& path) {
  if (!path.empty()) write_text(path, cmd->config_to_str(true, false));
}

void export_emotion_series(const std::string& path, const std::vector<NewsRecord>& records,
                           const EmotionLexicon& lex, const EmotionConfig& emo) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path);
  EmotionLayout lay = emotion_layout(lex);
  out << "record_id,comment_index,timestamp,score,intensity\n";
  for (const auto& rec : records) {
    Mat ec = comment_emotion_matrix(rec, lex, emo);
    for (int i = 0; i < ec.rows(); ++i) {
      out << rec.id << ',' << i << ',' << rec.comments[i].timestamp << ','
          << ec(i, lay.score_begin()) << ',' << ec(i, lay.int_begin()) << '\n';
    }
  }
}

int run(int argc, char** argv) {
  CLI::App app{"dual-channel fake news detector"};
  app.require_subcommand(1);

  // --- synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate the synthetic benchmark corpus");
  synth->set_config("--config");
  int synth_n = 200;
  std::uint64_t synth_seed = 13;
  std::string synth_out, synth_emb_out, synth_lex_out, synth_dump;
  int synth_emb_dim = 32;
  synth->add_option("--n", synth_n, "record count (even, >= 20)");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output jsonl")->required();
  synth->add_option("--emb-out", synth_emb_out, "also write synthetic embeddings here");
  synth->add_option("--emb-dim", synth_emb_dim, "synthetic embedding width");
  synth->add_option("--lexicon-out", synth_lex_out, "also write the synthetic lexicon here");
  synth->add_option("--dump-config", synth_dump, "persist the resolved configuration");
  synth->callback([&] {
    auto records = generate_synthetic(synth_n, synth_seed);
    save_jsonl(synth_out, records);
    if (!synth_emb_out.empty())
      save_embeddings(synth_emb_out, synthetic_embeddings(synth_emb_dim, synth_seed));
    if (!synth_lex_out.empty()) save_lexicon(synth_lex_out, synthetic_lexicon());
    maybe_dump_config(synth, synth_dump);
    std::printf("wrote %d records to %s\n", synth_n, synth_out.c_str());
  });

  // --- prepare -------------------------------------------------------------
  auto* prepare = app.add_subcommand("prepare", "normalize a dataset into canonical jsonl");
  prepare->set_config("--config");
  std::string prep_in, prep_out, prep_format = "jsonl", prep_dump;
  prepare->add_option("--data", prep_in, "input dataset")->required();
  prepare->add_option("--format", prep_format, "jsonl | rumoureval19 | weibo16");
  prepare->add_option("--out", prep_out, "canonical jsonl output")->required();
  prepare->add_option("--dump-config", prep_dump, "persist the resolved configuration");
  prepare->callback([&] {
    LoadReport rep;
    auto records = load_dataset(prep_in, parse_format(prep_format), &rep);
    save_jsonl(prep_out, records);
    maybe_dump_config(prepare, prep_dump);
    std::printf("kept %zu records (%zu lines skipped, %zu empty comments dropped)\n",
                records.size(), rep.skipped, rep.dropped_comments);
  });

  // --- train ---------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train on a labeled corpus");
  train_cmd->set_config("--config");
  std::string tr_data, tr_model = "model.bin", tr_history, tr_metrics, tr_dump;
  ResourceArgs tr_res;
  TrainArgs tr_args;
  train_cmd->add_option("--data", tr_data, "labeled jsonl corpus")->required();
  add_resource_options(train_cmd, tr_res);
  add_train_options(train_cmd, tr_args);
  train_cmd->add_option("--model-out", tr_model, "checkpoint path");
  train_cmd->add_option("--history", tr_history, "per-epoch csv");
  train_cmd->add_option("--metrics", tr_metrics, "test metrics json");
  train_cmd->add_option("--dump-config", tr_dump, "persist the resolved configuration");
  train_cmd->callback([&] {
    auto records = load_dataset(tr_data, DatasetFormat::Jsonl);
    auto res = load_resources(tr_res);
    TrainConfig cfg = resolve_train_config(tr_args);
    auto split = make_splits(records,
                             SplitScheme::ratio(tr_args.train_ratio, tr_args.val_ratio,
                                                tr_args.test_ratio),
                             cfg.seed)[0];
    auto out = train(split, cfg, res);
    save_checkpoint(tr_model, out.params, out.model_cfg);
    if (!tr_history.empty()) write_history_csv(tr_history, out.history);
    auto metrics = evaluate(out.params, out.model_cfg, res, split.test);
    if (!tr_metrics.empty()) write_text(tr_metrics, single_metrics_json(metrics));
    maybe_dump_config(train_cmd, tr_dump);
    std::printf("best epoch %d (val macro F1 %.4f); test macro F1 %.4f, acc %.4f, rmse %.4f\n",
                out.best_epoch, out.best_val_macro_f1, metrics.macro_f1, metrics.accuracy,
                metrics.rmse);
  });

  // --- enhance -------------------------------------------------------------
  auto* enhance = app.add_subcommand("enhance",
                                     "train, expand with pseudo-labeled variants, train again");
  enhance->set_config("--config");
  std::string en_data, en_model = "model.bin", en_history, en_metrics, en_dump;
  ResourceArgs en_res;
  TrainArgs en_args;
  EnhanceArgs en_extra;
  enhance->add_option("--data", en_data, "labeled jsonl corpus")->required();
  add_resource_options(enhance, en_res);
  add_train_options(enhance, en_args);
  add_enhance_options(enhance, en_extra);
  enhance->add_option("--model-out", en_model, "checkpoint path");
  enhance->add_option("--history", en_history, "per-epoch csv");
  enhance->add_option("--metrics", en_metrics, "test metrics json");
  enhance->add_option("--dump-config", en_dump, "persist the resolved configuration");
  enhance->callback([&] {
    auto records = load_dataset(en_data, DatasetFormat::Jsonl);
    auto res = load_resources(en_res);
    TrainConfig cfg = resolve_train_config(en_args);
    cfg.enhance_epochs = en_extra.enhance_epochs;
    auto split = make_splits(records,
                             SplitScheme::ratio(en_args.train_ratio, en_args.val_ratio,
                                                en_args.test_ratio),
                             cfg.seed)[0];
    AugmentPlan plan = parse_plan(en_extra);
    SynonymDict synonyms;
    if (!en_extra.synonyms_path.empty()) synonyms = SynonymDict::load(en_extra.synonyms_path);
    AugmentResources aug;
    aug.synonyms = en_extra.synonyms_path.empty() ? nullptr : &synonyms;
    aug.embeddings = &res.embeddings;
    aug.lexicon = &res.lexicon;
    auto translator = make_translator(en_extra);
    auto out = train_with_enhancement(split, cfg, res, plan, en_extra.tau_p, en_extra.tau_n, aug,
                                      translator.get());
    save_checkpoint(en_model, out.result.params, out.result.model_cfg);
    if (!en_history.empty()) write_history_csv(en_history, out.result.history);
    auto metrics = evaluate(out.result.params, out.result.model_cfg, res, split.test);
    if (!en_metrics.empty()) write_text(en_metrics, single_metrics_json(metrics));
    if (!en_extra.report_path.empty()) write_text(en_extra.report_path, out.report.to_json() + "\n");
    maybe_dump_config(enhance, en_dump);
    std::printf("selected %zu pseudo-labeled variants (+%zu / -%zu); test macro F1 %.4f\n",
                out.report.selected_pos + out.report.selected_neg, out.report.selected_pos,
                out.report.selected_neg, metrics.macro_f1);
  });

  // --- evaluate ------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint on a labeled corpus");
  eval_cmd->set_config("--config");
  std::string ev_data, ev_model, ev_metrics, ev_dump;
  ResourceArgs ev_res;
  TrainArgs ev_args;
  eval_cmd->add_option("--data", ev_data, "labeled jsonl corpus")->required();
  eval_cmd->add_option("--model", ev_model, "checkpoint path")->required();
  add_resource_options(eval_cmd, ev_res);
  add_train_options(eval_cmd, ev_args);
  eval_cmd->add_option("--metrics", ev_metrics, "metrics json output");
  eval_cmd->add_option("--dump-config", ev_dump, "persist the resolved configuration");
  eval_cmd->callback([&] {
    auto records = load_dataset(ev_data, DatasetFormat::Jsonl);
    auto res = load_resources(ev_res);
    ModelConfig mc = model_config(resolve_train_config(ev_args), res);
    ModelParams params = load_checkpoint(ev_model, mc);
    auto metrics = evaluate(params, mc, res, records);
    std::string json = single_metrics_json(metrics);
    if (!ev_metrics.empty()) write_text(ev_metrics, json);
    maybe_dump_config(eval_cmd, ev_dump);
    std::fputs(json.c_str(), stdout);
  });

  // --- predict -------------------------------------------------------------
  auto* predict = app.add_subcommand("predict", "per-record fake probabilities");
  predict->set_config("--config");
  std::string pr_data, pr_model, pr_out, pr_series, pr_dump;
  ResourceArgs pr_res;
  TrainArgs pr_args;
  predict->add_option("--data", pr_data, "jsonl corpus (labels optional)")->required();
  predict->add_option("--model", pr_model, "checkpoint path")->required();
  add_resource_options(predict, pr_res);
  add_train_options(predict, pr_args);
  predict->add_option("--out", pr_out, "prediction csv (id,p_fake,prediction)");
  predict->add_option("--export-emotion-series", pr_series,
                      "write the per-comment emotion time series csv here");
  predict->add_option("--dump-config", pr_dump, "persist the resolved configuration");
  predict->callback([&] {
    auto records = load_dataset(pr_data, DatasetFormat::Jsonl);
    auto res = load_resources(pr_res);
    ModelConfig mc = model_config(resolve_train_config(pr_args), res);
    ModelParams params = load_checkpoint(pr_model, mc);
    std::ostringstream csv;
    csv << "id,p_fake,prediction\n";
    for (const auto& rec : records) {
      auto prep = prepare_record(rec, res.embeddings, res.lexicon, res.emotion, mc);
      auto bundle = encode_record(prep, params, mc);
      double p = classify(bundle.x_nc, params)[1];
      csv << rec.id << ',' << p << ',' << (p > 0.5 ? 1 : 0) << '\n';
    }
    if (pr_out.empty())
      std::fputs(csv.str().c_str(), stdout);
    else
      write_text(pr_out, csv.str());
    if (!pr_series.empty()) export_emotion_series(pr_series, records, res.lexicon, res.emotion);
    maybe_dump_config(predict, pr_dump);
  });

  // --- crossval ------------------------------------------------------------
  auto* cv = app.add_subcommand("crossval", "k-fold evaluation of one variant");
  cv->set_config("--config");
  std::string cv_data, cv_metrics, cv_dump;
  int cv_k = 5;
  ResourceArgs cv_res;
  TrainArgs cv_args;
  EnhanceArgs cv_extra;
  cv->add_option("--data", cv_data, "labeled jsonl corpus")->required();
  cv->add_option("--k", cv_k, "fold count")->check(CLI::PositiveNumber);
  add_resource_options(cv, cv_res);
  add_train_options(cv, cv_args);
  add_enhance_options(cv, cv_extra);
  cv->add_option("--metrics", cv_metrics, "fold + mean metrics json");
  cv->add_option("--dump-config", cv_dump, "persist the resolved configuration");
  cv->callback([&] {
    auto records = load_dataset(cv_data, DatasetFormat::Jsonl);
    auto res = load_resources(cv_res);
    TrainConfig cfg = resolve_train_config(cv_args);
    cfg.enhance_epochs = cv_extra.enhance_epochs;
    CvReport report;
    if (cfg.variant == Variant::Dida || cfg.variant == Variant::DidaA) {
      AugmentPlan plan = parse_plan(cv_extra);
      SynonymDict synonyms;
      if (!cv_extra.synonyms_path.empty()) synonyms = SynonymDict::load(cv_extra.synonyms_path);
      AugmentResources aug;
      aug.synonyms = cv_extra.synonyms_path.empty() ? nullptr : &synonyms;
      aug.embeddings = &res.embeddings;
      aug.lexicon = &res.lexicon;
      auto translator = make_translator(cv_extra);
      report = crossvalidate(records, cfg, res, cv_k, &plan, cv_extra.tau_p, cv_extra.tau_n, &aug,
                             translator.get());
    } else {
      report = crossvalidate(records, cfg, res, cv_k);
    }
    std::string json = metrics_to_json(report);
    if (!cv_metrics.empty()) write_text(cv_metrics, json + "\n");
    maybe_dump_config(cv, cv_dump);
    std::printf("%s\n", json.c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const CLI::ParseError&) {
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
