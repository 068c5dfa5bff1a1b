#ifndef DIDA_EMOTION_HPP
#define DIDA_EMOTION_HPP

#include "dida/corpus.hpp"
#include "dida/resources.hpp"
#include "dida/types.hpp"

namespace dida {

struct EmotionConfig {
  int negation_window = 2;  // tokens looked back for a negation word
};

// Fixed layout of the concatenated emotion feature:
//   [category distribution | per-category density | intensity | score | aux]
// aux packs fractions of (exclamation, question, emoticon, pronoun, negation)
// tokens.
struct EmotionLayout {
  int n_cate = 0;
  int d_cate() const { return n_cate; }
  int d_lex() const { return n_cate; }
  static constexpr int d_int() { return 1; }
  static constexpr int d_score() { return 1; }
  static constexpr int d_aux() { return 5; }
  int d() const { return d_cate() + d_lex() + d_int() + d_score() + d_aux(); }

  int cate_begin() const { return 0; }
  int lex_begin() const { return d_cate(); }
  int int_begin() const { return d_cate() + d_lex(); }
  int score_begin() const { return int_begin() + 1; }
  int aux_begin() const { return score_begin() + 1; }
};

inline EmotionLayout emotion_layout(const EmotionLexicon& lex) {
  return EmotionLayout{lex.n_cate()};
}
inline int emotion_dim(const EmotionLexicon& lex) { return emotion_layout(lex).d(); }

// Five-part emotion feature of one text; pure in (text, lexicon, config).
Vec emotion_vector(std::string_view text, const EmotionLexicon& lex,
                   const EmotionConfig& config = {});

// M x d, row i = emotion_vector(comment i) in comment time order.
Mat comment_emotion_matrix(const NewsRecord& record, const EmotionLexicon& lex,
                           const EmotionConfig& config = {});

struct PooledEmotion {
  Vec mean;     // d
  Vec max;      // d
  Vec comment;  // mean concat max, 2d
};

// Column-wise pools; M = 0 yields zeros.
PooledEmotion pooled_comment_emotion(const Mat& comment_matrix);

// (news - mean) concat (news - max), 2d.
Vec gap_emotion(const Vec& news, const Vec& comment_mean, const Vec& comment_max);

// news concat comment concat gap, 5d.
Vec dual_emotion(const Vec& news, const Vec& comment, const Vec& gap);

}  // namespace dida

#endif
