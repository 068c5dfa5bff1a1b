#include <doctest.h>

#include <random>

#include "dida/emotion.hpp"
#include "test_util.hpp"

using namespace dida;

namespace {

const EmotionLexicon& lex() {
  static const EmotionLexicon l = test::minimal_lexicon();
  return l;
}

}  // namespace

TEST_CASE("emotion vector of the empty string is zero") {
  Vec v = emotion_vector("", lex());
  CHECK(v.size() == emotion_dim(lex()));
  CHECK(v.isZero());
  CHECK(emotion_vector("   ", lex()).isZero());
}

TEST_CASE("single emotion word, hand-counted") {
  // "good": joy, intensity 0.8, polarity +0.6, one token.
  EmotionLayout lay = emotion_layout(lex());
  Vec v = emotion_vector("good", lex());
  CHECK(v[lay.cate_begin() + 0] == doctest::Approx(1.0));  // joy
  CHECK(v[lay.cate_begin() + 1] == doctest::Approx(0.0));
  CHECK(v[lay.lex_begin() + 0] == doctest::Approx(1.0));  // 1 hit / 1 token
  CHECK(v[lay.int_begin()] == doctest::Approx(0.8));
  CHECK(v[lay.score_begin()] == doctest::Approx(0.6));
  CHECK(v.tail(5).isZero());
}

TEST_CASE("duplication keeps normalized spans, averages intensity") {
  EmotionLayout lay = emotion_layout(lex());
  Vec one = emotion_vector("good", lex());
  Vec two = emotion_vector("good good", lex());
  CHECK(two.segment(lay.cate_begin(), 2) == one.segment(lay.cate_begin(), 2));
  CHECK(two[lay.lex_begin()] == doctest::Approx(1.0));  // 2 hits / 2 tokens
  CHECK(two[lay.int_begin()] == doctest::Approx(0.8));  // mean over hits
  CHECK(two[lay.score_begin()] == doctest::Approx(0.6));  // 1.2 / 2 tokens
}

TEST_CASE("mixed text, hand-counted against the fixture") {
  // tokens: good(joy,+0.6) bad(anger,-0.5) city -> 3 tokens
  EmotionLayout lay = emotion_layout(lex());
  Vec v = emotion_vector("good bad city", lex());
  CHECK(v[lay.cate_begin() + 0] == doctest::Approx(0.5));
  CHECK(v[lay.cate_begin() + 1] == doctest::Approx(0.5));
  CHECK(v[lay.lex_begin() + 0] == doctest::Approx(1.0 / 3));
  CHECK(v[lay.lex_begin() + 1] == doctest::Approx(1.0 / 3));
  CHECK(v[lay.int_begin()] == doctest::Approx((0.8 + 0.7) / 2));
  CHECK(v[lay.score_begin()] == doctest::Approx((0.6 - 0.5) / 3));
}

TEST_CASE("negation flips polarity within the window") {
  EmotionLayout lay = emotion_layout(lex());
  // "not good": 2 tokens, score = -0.6 / 2
  CHECK(emotion_vector("not good", lex())[lay.score_begin()] == doctest::Approx(-0.3));
  // "not so good": negation 2 tokens back still flips
  CHECK(emotion_vector("not so good", lex())[lay.score_begin()] == doctest::Approx(-0.2));
  // out of window: no flip, 4 tokens
  CHECK(emotion_vector("not so very good", lex())[lay.score_begin()] == doctest::Approx(0.15));
  // negation fraction in aux
  CHECK(emotion_vector("not good", lex())[lay.aux_begin() + 4] == doctest::Approx(0.5));
}

TEST_CASE("aux fractions count punctuation, emoticons and pronouns") {
  EmotionLayout lay = emotion_layout(lex());
  // tokens: i, think, !, ?, :) -> 5 tokens
  Vec v = emotion_vector("i think ! ? :)", lex());
  CHECK(v[lay.aux_begin() + 0] == doctest::Approx(0.2));  // exclamation
  CHECK(v[lay.aux_begin() + 1] == doctest::Approx(0.2));  // question
  CHECK(v[lay.aux_begin() + 2] == doctest::Approx(0.2));  // emoticon
  CHECK(v[lay.aux_begin() + 3] == doctest::Approx(0.2));  // pronoun
}

TEST_CASE("comment emotion matrix composes per-comment vectors") {
  NewsRecord rec;
  rec.id = "r";
  rec.news_text = "n";
  rec.comments = {{"good", 10, 0}, {"bad", 20, 1}, {"city", 30, 2}};
  Mat ec = comment_emotion_matrix(rec, lex());
  REQUIRE(ec.rows() == 3);
  CHECK(Vec(ec.row(0)) == emotion_vector("good", lex()));
  CHECK(Vec(ec.row(1)) == emotion_vector("bad", lex()));
  CHECK(Vec(ec.row(2)) == emotion_vector("city", lex()));

  NewsRecord empty;
  empty.news_text = "n";
  Mat none = comment_emotion_matrix(empty, lex());
  CHECK(none.rows() == 0);
  CHECK(none.cols() == emotion_dim(lex()));
}

TEST_CASE("pooled emotion arithmetic") {
  Mat rows(2, 2);
  rows << 0, 1, 2, 3;
  auto pooled = pooled_comment_emotion(rows);
  CHECK(pooled.mean[0] == doctest::Approx(1));
  CHECK(pooled.mean[1] == doctest::Approx(2));
  CHECK(pooled.max[0] == doctest::Approx(2));
  CHECK(pooled.max[1] == doctest::Approx(3));
  CHECK(pooled.comment.size() == 4);

  Mat constant(3, 2);
  constant << 5, -1, 5, -1, 5, -1;
  auto same = pooled_comment_emotion(constant);
  CHECK(same.mean == same.max);

  auto degenerate = pooled_comment_emotion(Mat(0, 4));
  CHECK(degenerate.mean.isZero());
  CHECK(degenerate.max.isZero());
  CHECK(degenerate.comment.size() == 8);
}

TEST_CASE("pooling is permutation invariant and bracketed by min/max") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(-1, 1);
  Mat rows(5, 3);
  for (int i = 0; i < rows.size(); ++i) rows.data()[i] = uni(rng);
  auto pooled = pooled_comment_emotion(rows);
  Mat shuffled = rows;
  shuffled.row(0).swap(shuffled.row(3));
  shuffled.row(1).swap(shuffled.row(4));
  auto pooled2 = pooled_comment_emotion(shuffled);
  CHECK((pooled.comment - pooled2.comment).cwiseAbs().maxCoeff() < 1e-15);
  for (int j = 0; j < rows.cols(); ++j) {
    CHECK(rows.col(j).minCoeff() <= pooled.mean[j] + 1e-15);
    CHECK(pooled.mean[j] <= pooled.max[j] + 1e-15);
  }
}

TEST_CASE("gap emotion arithmetic and antisymmetry") {
  Vec news(2), mean(2), mx(2);
  news << 1, 0;
  mean << 0, 0;
  mx << 1, 1;
  Vec gap = gap_emotion(news, mean, mx);
  REQUIRE(gap.size() == 4);
  CHECK(gap[0] == 1);
  CHECK(gap[1] == 0);
  CHECK(gap[2] == 0);
  CHECK(gap[3] == -1);

  CHECK(gap_emotion(news, news, news).isZero());
  Vec swapped = gap_emotion(mean, news, mx);
  CHECK(swapped.head(2) == Vec(-gap.head(2)));

  Vec wrong(3);
  CHECK_THROWS_AS(gap_emotion(news, wrong, mx), RuntimeError);
}

TEST_CASE("dual emotion concatenates and slices back") {
  Vec news(2), comment(4), gap(4);
  news << 1, 2;
  comment << 3, 4, 5, 6;
  gap << 7, 8, 9, 10;
  Vec dual = dual_emotion(news, comment, gap);
  REQUIRE(dual.size() == 10);
  CHECK(dual.head(2) == news);
  CHECK(dual.segment(2, 4) == comment);
  CHECK(dual.tail(4) == gap);
  CHECK(dual_emotion(Vec::Zero(2), Vec::Zero(4), Vec::Zero(4)).isZero());
  CHECK_THROWS_AS(dual_emotion(news, gap, Vec(3)), RuntimeError);
}
