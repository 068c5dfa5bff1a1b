#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dida/training.hpp"
#include "test_util.hpp"

using namespace dida;

namespace {

Resources small_resources() {
  Resources res;
  res.embeddings = synthetic_embeddings(8, 21);
  res.lexicon = synthetic_lexicon();
  return res;
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.d_h = 4;
  cfg.max_text_len = 12;
  cfg.max_comments = 12;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("variant names round trip") {
  for (auto v : {Variant::DidaT, Variant::DidaD, Variant::DidaA, Variant::Dida})
    CHECK(parse_variant(variant_name(v)) == v);
  CHECK_THROWS_AS(parse_variant("nope"), ConfigError);
}

TEST_CASE("compute_metrics on a hand-worked example") {
  // labels (0, 1), both predicted true with p = 0.2:
  //   accuracy 0.5; class 0 F1 = 2/3, class 1 F1 = 0 -> macro 1/3;
  //   rmse = sqrt((0.04 + 0.64) / 2)
  auto m = compute_metrics({0, 1}, {0.2, 0.2});
  CHECK(m.accuracy == doctest::Approx(0.5));
  CHECK(m.macro_f1 == doctest::Approx(1.0 / 3));
  CHECK(m.rmse == doctest::Approx(std::sqrt(0.34)));
}

TEST_CASE("compute_metrics extremes") {
  auto perfect = compute_metrics({0, 1, 1, 0}, {0.1, 0.9, 0.8, 0.2});
  CHECK(perfect.accuracy == doctest::Approx(1.0));
  CHECK(perfect.macro_f1 == doctest::Approx(1.0));
  CHECK(perfect.rmse == doctest::Approx(std::sqrt((0.01 + 0.01 + 0.04 + 0.04) / 4)));

  auto inverted = compute_metrics({0, 1}, {0.9, 0.1});
  CHECK(inverted.accuracy == doctest::Approx(0.0));
  CHECK(inverted.macro_f1 == doctest::Approx(0.0));

  // all predictions on one class: the empty class contributes zero F1
  auto onesided = compute_metrics({1, 1, 1}, {0.9, 0.9, 0.9});
  CHECK(onesided.accuracy == doctest::Approx(1.0));
  CHECK(onesided.macro_f1 == doctest::Approx(0.5));
}

TEST_CASE("compute_metrics validates its inputs") {
  CHECK_THROWS_AS(compute_metrics({0, 1}, {0.5}), RuntimeError);
  CHECK_THROWS_AS(compute_metrics({}, {}), RuntimeError);
}

TEST_CASE("training is deterministic in the seed and records history") {
  auto res = small_resources();
  auto cfg = small_config();
  auto records = generate_synthetic(24, 9);
  auto split = make_splits(records, SplitScheme::ratio(0.5, 0.25, 0.25), cfg.seed)[0];
  auto a = train(split, cfg, res);
  auto b = train(split, cfg, res);
  CHECK(flatten_params(a.params) == flatten_params(b.params));
  REQUIRE(a.history.size() == 3);
  for (int e = 0; e < 3; ++e) {
    CHECK(a.history[e].epoch == e + 1);
    CHECK(a.history[e].train_loss == b.history[e].train_loss);
    CHECK(std::isfinite(a.history[e].train_loss));
  }
  CHECK(a.best_epoch >= 1);
  CHECK(a.best_val_macro_f1 == b.best_val_macro_f1);

  cfg.seed = 8;
  auto c = train(split, cfg, res);
  CHECK(flatten_params(c.params) != flatten_params(a.params));
}

TEST_CASE("a few epochs reduce the training loss") {
  auto res = small_resources();
  auto cfg = small_config();
  cfg.epochs = 8;
  auto records = generate_synthetic(24, 9);
  auto split = make_splits(records, SplitScheme::ratio(0.5, 0.25, 0.25), cfg.seed)[0];
  auto out = train(split, cfg, res);
  CHECK(out.history.back().train_loss < out.history.front().train_loss);
}

TEST_CASE("evaluate agrees with compute_metrics on the same predictions") {
  auto res = small_resources();
  auto cfg = small_config();
  auto records = generate_synthetic(24, 9);
  auto split = make_splits(records, SplitScheme::ratio(0.5, 0.25, 0.25), cfg.seed)[0];
  auto out = train(split, cfg, res);
  auto report = evaluate(out.params, out.model_cfg, res, split.test);

  std::vector<int> labels;
  std::vector<double> p_fake;
  for (const auto& rec : split.test) {
    auto prep = prepare_record(rec, res.embeddings, res.lexicon, res.emotion, out.model_cfg);
    auto bundle = encode_record(prep, out.params, out.model_cfg);
    labels.push_back(*rec.label);
    p_fake.push_back(classify(bundle.x_nc, out.params)[1]);
  }
  auto direct = compute_metrics(labels, p_fake);
  CHECK(report.macro_f1 == doctest::Approx(direct.macro_f1));
  CHECK(report.rmse == doctest::Approx(direct.rmse));
  CHECK(report.accuracy == doctest::Approx(direct.accuracy));
}

TEST_CASE("the pooled variant drops the attention parameters from use") {
  auto res = small_resources();
  auto cfg = small_config();
  cfg.variant = Variant::DidaT;
  auto mc = model_config(cfg, res);
  CHECK_FALSE(mc.use_coattention);
  cfg.variant = Variant::DidaD;
  CHECK(model_config(cfg, res).use_coattention);
  cfg.use_temporal = false;
  CHECK_FALSE(model_config(cfg, res).use_temporal);
}

TEST_CASE("impossible thresholds leave enhancement as plain training") {
  auto res = small_resources();
  auto cfg = small_config();
  auto records = generate_synthetic(24, 9);
  auto split = make_splits(records, SplitScheme::ratio(0.5, 0.25, 0.25), cfg.seed)[0];
  AugmentPlan plan;
  plan.entries = {{AugmentStrategy::Embedding, 1}};
  AugmentResources aug;
  aug.embeddings = &res.embeddings;
  aug.lexicon = &res.lexicon;
  auto plain = train(split, cfg, res);
  auto enhanced = train_with_enhancement(split, cfg, res, plan, 1.0, 1.0, aug);
  CHECK(flatten_params(enhanced.result.params) == flatten_params(plain.params));
  CHECK(enhanced.result.history.size() == plain.history.size());
  CHECK(enhanced.report.selected_pos + enhanced.report.selected_neg == 0);
}

TEST_CASE("permissive enhancement extends training") {
  auto res = small_resources();
  auto cfg = small_config();
  cfg.enhance_epochs = 2;
  auto records = generate_synthetic(24, 9);
  auto split = make_splits(records, SplitScheme::ratio(0.5, 0.25, 0.25), cfg.seed)[0];
  AugmentPlan plan;
  plan.entries = {{AugmentStrategy::Embedding, 1}};
  AugmentResources aug;
  aug.embeddings = &res.embeddings;
  aug.lexicon = &res.lexicon;
  auto enhanced = train_with_enhancement(split, cfg, res, plan, 0.5001, 0.5001, aug);
  CHECK(enhanced.report.selected_pos + enhanced.report.selected_neg > 0);
  CHECK(enhanced.result.history.size() == std::size_t(cfg.epochs + cfg.enhance_epochs));
  // phase-3 epochs continue the numbering
  CHECK(enhanced.result.history.back().epoch == cfg.epochs + cfg.enhance_epochs);
}

TEST_CASE("the label-inheritance variant copies parent labels") {
  auto res = small_resources();
  auto cfg = small_config();
  cfg.variant = Variant::DidaA;
  cfg.enhance_epochs = 1;
  auto records = generate_synthetic(24, 9);
  auto split = make_splits(records, SplitScheme::ratio(0.5, 0.25, 0.25), cfg.seed)[0];
  AugmentPlan plan;
  plan.entries = {{AugmentStrategy::Embedding, 1}};
  AugmentResources aug;
  aug.embeddings = &res.embeddings;
  aug.lexicon = &res.lexicon;
  auto enhanced = train_with_enhancement(split, cfg, res, plan, 0.9, 0.9, aug);
  // every labeled record spawns one inherited variant
  CHECK(enhanced.report.selected_pos + enhanced.report.selected_neg == split.train.size());
  CHECK(enhanced.report.selected_pos > 0);
  CHECK(enhanced.report.selected_neg > 0);
}

TEST_CASE("cross validation averages fold metrics") {
  auto res = small_resources();
  auto cfg = small_config();
  cfg.epochs = 2;
  cfg.variant = Variant::DidaD;
  auto records = generate_synthetic(20, 9);
  auto report = crossvalidate(records, cfg, res, 5);
  REQUIRE(report.folds.size() == 5);
  double f1 = 0, rmse = 0, acc = 0;
  for (const auto& f : report.folds) {
    f1 += f.macro_f1;
    rmse += f.rmse;
    acc += f.accuracy;
  }
  CHECK(report.mean.macro_f1 == doctest::Approx(f1 / 5));
  CHECK(report.mean.rmse == doctest::Approx(rmse / 5));
  CHECK(report.mean.accuracy == doctest::Approx(acc / 5));

  auto json = metrics_to_json(report);
  CHECK(json.find("macro_f1") != std::string::npos);
  CHECK(json.find("rmse_x100") != std::string::npos);
  CHECK(json.find("folds") != std::string::npos);
}

TEST_CASE("history csv lists one row per epoch") {
  std::vector<EpochStats> history = {{1, 0.9, 0.5, 0.5}, {2, 0.7, 0.6, 0.6}};
  auto dir = test::temp_dir("hist");
  auto path = (dir / "history.csv").string();
  write_history_csv(path, history);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,train_loss,val_macro_f1,val_accuracy");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
}
