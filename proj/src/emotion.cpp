#include "dida/emotion.hpp"

#include <algorithm>

#include "dida/tokenize.hpp"

namespace dida {

Vec emotion_vector(std::string_view text, const EmotionLexicon& lex,
                   const EmotionConfig& config) {
  EmotionLayout lay = emotion_layout(lex);
  Vec out = Vec::Zero(lay.d());
  std::vector<Token> tokens = tokenize(text);
  if (tokens.empty()) return out;
  double n_tokens = static_cast<double>(tokens.size());

  Vec cate_counts = Vec::Zero(lay.n_cate);
  double intensity_sum = 0.0;
  int intensity_hits = 0;
  double score_sum = 0.0;
  double n_excl = 0, n_quest = 0, n_emoticon = 0, n_pronoun = 0, n_negation = 0;

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (!t.is_word) {
      if (t.text.find('!') != std::string::npos) ++n_excl;
      if (t.text.find('?') != std::string::npos) ++n_quest;
      if (lex.emoticons.count(t.text)) ++n_emoticon;
      continue;
    }
    if (lex.pronouns.count(t.text)) ++n_pronoun;
    if (lex.negation_words.count(t.text)) ++n_negation;
    if (auto it = lex.word_categories.find(t.text); it != lex.word_categories.end()) {
      for (int c : it->second) cate_counts[c] += 1.0;
    }
    if (auto it = lex.intensity.find(t.text); it != lex.intensity.end()) {
      intensity_sum += it->second;
      ++intensity_hits;
    }
    if (auto it = lex.polarity.find(t.text); it != lex.polarity.end()) {
      double v = it->second;
      // Flip the sign when a negation word sits within the lookback window.
      for (int back = 1; back <= config.negation_window && back <= static_cast<int>(i); ++back) {
        const Token& prev = tokens[i - back];
        if (prev.is_word && lex.negation_words.count(prev.text)) {
          v = -v;
          break;
        }
      }
      score_sum += v;
    }
  }

  double cate_total = cate_counts.sum();
  if (cate_total > 0) out.segment(lay.cate_begin(), lay.d_cate()) = cate_counts / cate_total;
  out.segment(lay.lex_begin(), lay.d_lex()) = cate_counts / n_tokens;
  if (intensity_hits > 0) out[lay.int_begin()] = intensity_sum / intensity_hits;
  out[lay.score_begin()] = score_sum / n_tokens;
  out[lay.aux_begin() + 0] = n_excl / n_tokens;
  out[lay.aux_begin() + 1] = n_quest / n_tokens;
  out[lay.aux_begin() + 2] = n_emoticon / n_tokens;
  out[lay.aux_begin() + 3] = n_pronoun / n_tokens;
  out[lay.aux_begin() + 4] = n_negation / n_tokens;
  return out;
}

Mat comment_emotion_matrix(const NewsRecord& record, const EmotionLexicon& lex,
                           const EmotionConfig& config) {
  EmotionLayout lay = emotion_layout(lex);
  Mat ec(static_cast<int>(record.comments.size()), lay.d());
  for (int i = 0; i < ec.rows(); ++i) {
    ec.row(i) = emotion_vector(record.comments[i].text, lex, config);
  }
  return ec;
}

PooledEmotion pooled_comment_emotion(const Mat& comment_matrix) {
  PooledEmotion pooled;
  int d = static_cast<int>(comment_matrix.cols());
  if (comment_matrix.rows() == 0) {
    pooled.mean = Vec::Zero(d);
    pooled.max = Vec::Zero(d);
  } else {
    pooled.mean = comment_matrix.colwise().mean();
    pooled.max = comment_matrix.colwise().maxCoeff();
  }
  pooled.comment.resize(2 * d);
  pooled.comment << pooled.mean, pooled.max;
  return pooled;
}

Vec gap_emotion(const Vec& news, const Vec& comment_mean, const Vec& comment_max) {
  if (news.size() != comment_mean.size() || news.size() != comment_max.size())
    throw RuntimeError("gap_emotion width mismatch");
  Vec gap(2 * news.size());
  gap << (news - comment_mean), (news - comment_max);
  return gap;
}

Vec dual_emotion(const Vec& news, const Vec& comment, const Vec& gap) {
  if (comment.size() != 2 * news.size() || gap.size() != 2 * news.size())
    throw RuntimeError("dual_emotion width mismatch");
  Vec dual(5 * news.size());
  dual << news, comment, gap;
  return dual;
}

}  // namespace dida
