#include <doctest.h>

#include <cmath>
#include <random>

#include "dida/model.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dida;

namespace {

Mat random_mat(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> uni(-scale, scale);
  Mat m(rows, cols);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = uni(rng);
  return m;
}

std::vector<std::vector<double>> to_rows(const Mat& m) {
  std::vector<std::vector<double>> out;
  for (int i = 0; i < m.rows(); ++i) {
    out.emplace_back(m.row(i).begin(), m.row(i).end());
  }
  return out;
}

}  // namespace

TEST_CASE("gru_forward matches the scalar recurrence") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    int d_in = 2 + static_cast<int>(rng() % 4);
    int d_h = 1 + static_cast<int>(rng() % 4);
    int L = 1 + static_cast<int>(rng() % 6);
    auto w = GruWeights::init(d_in, d_h, rng);
    w.bz = random_mat(d_h, 1, rng, 0.3);
    w.br = random_mat(d_h, 1, rng, 0.3);
    w.bh = random_mat(d_h, 1, rng, 0.3);
    Mat seq = random_mat(L, d_in, rng);
    Mat h = gru_forward(w, seq);
    auto ref = oracle::gru_scalar(w, to_rows(seq));
    REQUIRE(h.rows() == L);
    REQUIRE(h.cols() == d_h);
    for (int t = 0; t < L; ++t)
      for (int i = 0; i < d_h; ++i) CHECK(h(t, i) == doctest::Approx(ref[t][i]).epsilon(1e-12));
  }
}

TEST_CASE("bigru_forward concatenates both directions") {
  std::mt19937_64 rng(32);
  auto w = BiGruWeights::init(3, 2, rng);
  Mat seq = random_mat(5, 3, rng);
  Mat h = bigru_forward(w, seq);
  auto ref = oracle::bigru_scalar(w, to_rows(seq));
  REQUIRE(h.rows() == 5);
  REQUIRE(h.cols() == 4);
  for (int t = 0; t < 5; ++t)
    for (int i = 0; i < 4; ++i) CHECK(h(t, i) == doctest::Approx(ref[t][i]).epsilon(1e-12));

  CHECK(bigru_forward(w, Mat(0, 3)).rows() == 0);
}

TEST_CASE("gru rejects non-finite input") {
  std::mt19937_64 rng(33);
  auto w = GruWeights::init(2, 2, rng);
  Mat seq = Mat::Zero(2, 2);
  seq(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(gru_forward(w, seq), RuntimeError);
}

TEST_CASE("co_attention matches the scalar oracle") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    int T = 1 + static_cast<int>(rng() % 5);
    int C = static_cast<int>(rng() % 5);  // C = 0 exercised too
    int w_dim = 2 + static_cast<int>(rng() % 3);
    int wc_dim = 2 + static_cast<int>(rng() % 3);
    Mat target = random_mat(T, w_dim, rng);
    Mat context = random_mat(C, wc_dim, rng);
    Mat W = random_mat(w_dim, wc_dim, rng);
    double b = 0.1 * trial - 0.4;
    auto res = co_attention(target, context, W, b);
    auto ref = oracle::co_attention_scalar(to_rows(target), to_rows(context), to_rows(W), b);
    REQUIRE(res.alpha.size() == T);
    CHECK(res.alpha.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.alpha.minCoeff() > 0);
    for (int t = 0; t < T; ++t) CHECK(res.alpha[t] == doctest::Approx(ref.alpha[t]).epsilon(1e-12));
    for (int i = 0; i < w_dim; ++i)
      CHECK(res.attended[i] == doctest::Approx(ref.attended[i]).epsilon(1e-12));
  }
}

TEST_CASE("co_attention degenerate shapes") {
  std::mt19937_64 rng(42);
  Mat target = random_mat(1, 3, rng);
  Mat W = random_mat(3, 2, rng);
  // single target row attends fully to itself
  auto res = co_attention(target, random_mat(4, 2, rng), W, 0.0);
  CHECK(res.alpha[0] == doctest::Approx(1.0));
  CHECK((res.attended.transpose() - target.row(0)).cwiseAbs().maxCoeff() < 1e-15);
  // empty target is fatal
  CHECK_THROWS_AS(co_attention(Mat(0, 3), Mat(2, 2), W, 0.0), RuntimeError);
}

TEST_CASE("make_batch pads to the longest sequence with a prefix mask") {
  auto table = make_embedding_table({{"one", Vec::Ones(3)}, {"two", 2 * Vec::Ones(3)}});
  auto batch = make_batch({"one two one", "two"}, table, 4);
  REQUIRE(batch.token_ids.size() == 2);
  REQUIRE(batch.token_ids[0].size() == 3);
  CHECK(batch.mask[0] == std::vector<char>{1, 1, 1});
  CHECK(batch.mask[1] == std::vector<char>{1, 0, 0});
  // truncation at max_len
  auto trunc = make_batch({"one two one two one"}, table, 2);
  CHECK(trunc.mask[0] == std::vector<char>{1, 1});

  auto mats = embed(batch, table);
  CHECK(mats[0].row(0) == table.vectors.row(table.row_of("one")));
  CHECK(mats[1].row(0) == table.vectors.row(table.row_of("two")));
  CHECK(mats[1].row(1).isZero());  // padded rows are zero regardless of id
  CHECK(mats[1].row(2).isZero());
}

TEST_CASE("bigru_masked ignores padded rows entirely") {
  std::mt19937_64 rng(51);
  auto w = BiGruWeights::init(3, 2, rng);
  Mat real = random_mat(3, 3, rng);
  Mat padded(5, 3);
  padded.topRows(3) = real;
  padded.bottomRows(2) = random_mat(2, 3, rng, 10.0);  // garbage beyond the mask
  std::vector<char> mask = {1, 1, 1, 0, 0};
  Mat h_masked = bigru_masked(w, padded, mask);
  Mat h_plain = bigru_forward(w, real);
  REQUIRE(h_masked.rows() == 5);
  CHECK((h_masked.topRows(3) - h_plain).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(h_masked.bottomRows(2).isZero());

  std::vector<char> holes = {1, 0, 1, 0, 0};
  CHECK_THROWS_AS(bigru_masked(w, padded, holes), RuntimeError);
}

namespace {

// A record assembled from random activations; bypasses tokenization so the
// network contracts can be probed at arbitrary widths.
PreparedRecord random_record(int d_g, int d_emotion, int L, int M, int label,
                             std::mt19937_64& rng) {
  PreparedRecord rec;
  rec.id = "r";
  rec.news_emb = random_mat(L, d_g, rng);
  for (int j = 0; j < M; ++j)
    rec.comment_emb.push_back(random_mat(1 + static_cast<int>(rng() % L), d_g, rng));
  rec.e_c = random_mat(M, d_emotion, rng);
  rec.e_news = random_mat(d_emotion, 1, rng);
  rec.e_dual = random_mat(5 * d_emotion, 1, rng);
  rec.label = label;
  return rec;
}

ModelConfig tiny_config(int d_g = 5, int d_emotion = 7, int d_h = 3) {
  ModelConfig cfg;
  cfg.d_g = d_g;
  cfg.d_emotion = d_emotion;
  cfg.d_h = d_h;
  cfg.l2 = 0.01;
  return cfg;
}

}  // namespace

TEST_CASE("encode_record produces the documented widths and ordering") {
  std::mt19937_64 rng(61);
  ModelConfig cfg = tiny_config();
  ModelParams params = init_params(cfg, 7);
  PreparedRecord rec = random_record(cfg.d_g, cfg.d_emotion, 4, 3, 1, rng);
  auto bundle = encode_record(rec, params, cfg);
  CHECK(bundle.v_sn.size() == 2 * cfg.d_h);
  CHECK(bundle.v_sc.size() == 2 * cfg.d_h);
  CHECK(bundle.a_en.size() == cfg.d_emotion);
  CHECK(bundle.a_ec.size() == cfg.d_emotion);
  CHECK(bundle.e_tc.size() == 2 * cfg.d_h);
  CHECK(bundle.e_dual.size() == 5 * cfg.d_emotion);
  REQUIRE(bundle.x_nc.size() == cfg.x_dim());
  int off = 0;
  for (const Vec* part : {&bundle.v_sn, &bundle.v_sc, &bundle.a_en, &bundle.a_ec, &bundle.e_tc,
                          &bundle.e_dual}) {
    CHECK(bundle.x_nc.segment(off, part->size()) == *part);
    off += static_cast<int>(part->size());
  }
  CHECK(off == cfg.x_dim());
}

TEST_CASE("encode_record handles a record with no comments") {
  std::mt19937_64 rng(62);
  ModelConfig cfg = tiny_config();
  ModelParams params = init_params(cfg, 7);
  PreparedRecord rec = random_record(cfg.d_g, cfg.d_emotion, 4, 0, 0, rng);
  auto bundle = encode_record(rec, params, cfg);
  CHECK(bundle.v_sc.isZero());
  CHECK(bundle.a_ec.isZero());
  CHECK(bundle.e_tc.isZero());
  CHECK(bundle.v_sn.size() == 2 * cfg.d_h);
  CHECK(std::isfinite(batch_loss({rec}, params, cfg)));
}

TEST_CASE("disabling the temporal feature zeroes e_tc only") {
  std::mt19937_64 rng(63);
  ModelConfig cfg = tiny_config();
  ModelParams params = init_params(cfg, 7);
  PreparedRecord rec = random_record(cfg.d_g, cfg.d_emotion, 4, 3, 1, rng);
  auto with = encode_record(rec, params, cfg);
  cfg.use_temporal = false;
  auto without = encode_record(rec, params, cfg);
  CHECK_FALSE(with.e_tc.isZero());
  CHECK(without.e_tc.isZero());
  CHECK(without.v_sn == with.v_sn);
  CHECK(without.a_en == with.a_en);
}

TEST_CASE("unattended variant pools instead of attending") {
  std::mt19937_64 rng(64);
  ModelConfig cfg = tiny_config();
  cfg.use_coattention = false;
  ModelParams params = init_params(cfg, 7);
  PreparedRecord rec = random_record(cfg.d_g, cfg.d_emotion, 4, 3, 1, rng);
  EncodeTrace trace;
  auto bundle = encode_record(rec, params, cfg, &trace);
  // v_sn is the plain mean of the news hidden states
  Vec mean_sn = trace.h_sn.colwise().mean();
  CHECK((bundle.v_sn - mean_sn).cwiseAbs().maxCoeff() < 1e-15);
  // a_en falls back to the raw news emotion vector
  CHECK(bundle.a_en == rec.e_news);
  // e_tc is still the temporal summary
  CHECK_FALSE(bundle.e_tc.isZero());
}

TEST_CASE("classify closed forms") {
  ModelConfig cfg = tiny_config();
  ModelParams params = zero_params(cfg);
  Vec x = Vec::Ones(cfg.x_dim());
  Vec p = classify(x, params);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));

  params.b_X << 1.0, -1.0;
  p = classify(x, params);
  double e2 = std::exp(2.0);
  CHECK(p[0] == doctest::Approx(e2 / (e2 + 1)));
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(p.minCoeff() > 0);

  params.b_X << 1000.0, -1000.0;  // stable under extreme logits
  p = classify(x, params);
  CHECK(std::isfinite(p[0]));
  CHECK(p[0] == doctest::Approx(1.0));
}

TEST_CASE("supervised_loss closed forms and clamping") {
  CHECK(supervised_loss(1, 0.5) == doctest::Approx(std::log(2.0)));
  CHECK(supervised_loss(0, 0.5) == doctest::Approx(std::log(2.0)));
  CHECK(supervised_loss(1, 0.9) == doctest::Approx(-std::log(0.9)));
  CHECK(supervised_loss(0, 0.9) == doctest::Approx(-std::log(0.1)));
  CHECK(supervised_loss(1, 0.0) == doctest::Approx(-std::log(kProbEps)));
  CHECK(std::isfinite(supervised_loss(0, 1.0)));
}

TEST_CASE("parameter flatten/unflatten round trip and layout") {
  ModelConfig cfg = tiny_config();
  ModelParams params = init_params(cfg, 99);
  Vec flat = flatten_params(params);
  auto layout = param_layout(cfg);
  int total = 0;
  for (const auto& blk : layout) {
    CHECK(blk.offset == total);
    total += blk.size;
  }
  CHECK(total == flat.size());
  ModelParams back = unflatten_params(flat, cfg);
  CHECK(flatten_params(back) == flat);
  // determinism of init
  CHECK(flatten_params(init_params(cfg, 99)) == flat);
  CHECK(flatten_params(init_params(cfg, 100)) != flat);
}

namespace {

void fd_check(const ModelConfig& cfg, std::uint64_t seed, double tol = 1e-4) {
  std::mt19937_64 rng(seed);
  std::vector<PreparedRecord> batch = {random_record(cfg.d_g, cfg.d_emotion, 4, 3, 1, rng),
                                       random_record(cfg.d_g, cfg.d_emotion, 4, 3, 0, rng)};
  ModelParams params = init_params(cfg, seed + 1);
  ModelParams grads = zero_params(cfg);
  batch_loss_and_gradients(batch, params, cfg, &grads);
  Vec analytic = flatten_params(grads);
  Vec flat = flatten_params(params);
  const double h = 1e-5;
  double worst = 0;
  for (int i = 0; i < flat.size(); ++i) {
    Vec plus = flat, minus = flat;
    plus[i] += h;
    minus[i] -= h;
    double f = (batch_loss(batch, unflatten_params(plus, cfg), cfg) -
                batch_loss(batch, unflatten_params(minus, cfg), cfg)) /
               (2 * h);
    double rel = std::abs(analytic[i] - f) / std::max(std::abs(analytic[i]) + std::abs(f), 1e-6);
    worst = std::max(worst, rel);
  }
  CHECK(worst <= tol);
}

}  // namespace

TEST_CASE("analytic gradients agree with central differences") {
  SUBCASE("full model") { fd_check(tiny_config(), 71); }
  SUBCASE("without co-attention") {
    ModelConfig cfg = tiny_config();
    cfg.use_coattention = false;
    fd_check(cfg, 72);
  }
  SUBCASE("without the temporal feature") {
    ModelConfig cfg = tiny_config();
    cfg.use_temporal = false;
    fd_check(cfg, 73);
  }
  SUBCASE("with zero weight decay") {
    ModelConfig cfg = tiny_config();
    cfg.l2 = 0.0;
    fd_check(cfg, 74);
  }
}

TEST_CASE("disabled paths receive zero gradient") {
  std::mt19937_64 rng(81);
  ModelConfig cfg = tiny_config();
  cfg.l2 = 0.0;  // so decay does not touch unused blocks
  cfg.use_temporal = false;
  std::vector<PreparedRecord> batch = {random_record(cfg.d_g, cfg.d_emotion, 4, 3, 1, rng)};
  ModelParams params = init_params(cfg, 5);
  ModelParams grads = zero_params(cfg);
  batch_loss_and_gradients(batch, params, cfg, &grads);
  CHECK(grads.temporal.fwd.Wz.isZero());
  CHECK(grads.temporal.bwd.Uh.isZero());
  CHECK_FALSE(grads.W_X.isZero());

  cfg.use_temporal = true;
  cfg.use_coattention = false;
  grads = zero_params(cfg);
  batch_loss_and_gradients(batch, params, cfg, &grads);
  CHECK(grads.W_S.isZero());
  CHECK(grads.W_E.isZero());
  CHECK(grads.b_S.isZero());
  CHECK_FALSE(grads.temporal.fwd.Wz.isZero());
}

TEST_CASE("batch gradients rejects unlabeled records") {
  std::mt19937_64 rng(82);
  ModelConfig cfg = tiny_config();
  ModelParams params = init_params(cfg, 5);
  ModelParams grads = zero_params(cfg);
  std::vector<PreparedRecord> batch = {random_record(cfg.d_g, cfg.d_emotion, 3, 2, -1, rng)};
  CHECK_THROWS_AS(batch_loss_and_gradients(batch, params, cfg, &grads), RuntimeError);
}

TEST_CASE("checkpoints round trip and refuse mismatched configs") {
  ModelConfig cfg = tiny_config();
  ModelParams params = init_params(cfg, 17);
  auto dir = test::temp_dir("ckpt");
  auto path = (dir / "model.bin").string();
  save_checkpoint(path, params, cfg);
  ModelParams loaded = load_checkpoint(path, cfg);
  CHECK(flatten_params(loaded) == flatten_params(params));

  ModelConfig other = cfg;
  other.d_h = cfg.d_h + 1;
  CHECK_THROWS_AS(load_checkpoint(path, other), RuntimeError);
  CHECK_THROWS_AS(load_checkpoint((dir / "missing.bin").string(), cfg), RuntimeError);
}

TEST_CASE("prepare_record caps comments and embeds text") {
  auto table = synthetic_embeddings(6, 3);
  auto lex = synthetic_lexicon();
  ModelConfig cfg = tiny_config(6, emotion_dim(lex));
  cfg.max_text_len = 4;
  cfg.max_comments = 2;
  NewsRecord rec;
  rec.id = "r";
  rec.news_text = "river park market station harbor";  // 5 words, trimmed to 4
  rec.comments = {{"glad", 10, 0}, {"angry", 20, 1}, {"cheer", 30, 2}};
  rec.label = 1;
  auto prep = prepare_record(rec, table, lex, {}, cfg);
  CHECK(prep.news_emb.rows() == 4);
  CHECK(prep.comment_emb.size() == 2);  // earliest two kept
  CHECK(prep.e_c.rows() == 2);
  CHECK(prep.e_news.size() == emotion_dim(lex));
  CHECK(prep.e_dual.size() == 5 * emotion_dim(lex));
  CHECK(prep.label == 1);

  NewsRecord empty;
  empty.id = "e";
  empty.news_text = "   ";  // no tokens at all
  CHECK_THROWS_AS(prepare_record(empty, table, lex, {}, cfg), RuntimeError);
}
