#ifndef DIDA_RESOURCES_HPP
#define DIDA_RESOURCES_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dida/types.hpp"

namespace dida {

// Pretrained word vectors, immutable after load.  Row `oov_row` is reserved
// all-zeros and serves both unknown tokens and padding.
struct EmbeddingTable {
  std::unordered_map<std::string, int> vocab;
  Mat vectors;  // (|V|+1) x dim, last row all zeros
  int dim = 0;
  int oov_row = 0;
  std::size_t duplicate_warnings = 0;

  int row_of(const std::string& token) const {
    auto it = vocab.find(token);
    return it == vocab.end() ? oov_row : it->second;
  }
  Vec vector_of(const std::string& token) const { return vectors.row(row_of(token)); }
};

// Plain-text "token v1 ... vd" layout, one entry per line.
EmbeddingTable load_embeddings(const std::string& path);
void save_embeddings(const std::string& path, const EmbeddingTable& table);

// Build a table from explicit (token, vector) rows; used by tests and the
// synthetic pipeline.
EmbeddingTable make_embedding_table(const std::vector<std::pair<std::string, Vec>>& entries);

struct EmotionLexicon {
  std::vector<std::string> categories;
  std::unordered_map<std::string, std::vector<int>> word_categories;
  std::unordered_map<std::string, double> intensity;  // [0,1]
  std::unordered_map<std::string, double> polarity;   // [-1,1]
  std::unordered_set<std::string> negation_words;
  std::unordered_set<std::string> pronouns;
  std::unordered_set<std::string> emoticons;

  int n_cate() const { return static_cast<int>(categories.size()); }
  int category_id(const std::string& name) const;
  bool is_emotion_word(const std::string& w) const;
  bool operator==(const EmotionLexicon&) const;
};

// Directory layout: categories.tsv, intensity.tsv, polarity.tsv,
// negation.txt, pronouns.txt, emoticons.txt.  Every intensity-scored word
// must belong to at least one category.
EmotionLexicon load_lexicon(const std::string& dir_path);
void save_lexicon(const std::string& dir_path, const EmotionLexicon& lex);

// --- built-in synthetic resources -----------------------------------------
// Two categories (joy/anger), ten words each with symmetric polarities, plus
// small negation/pronoun/emoticon sets.  Paired with a neutral filler
// vocabulary for the synthetic corpus.

EmotionLexicon synthetic_lexicon();
const std::vector<std::string>& synthetic_filler_words();
const std::vector<std::string>& synthetic_positive_words();
const std::vector<std::string>& synthetic_negative_words();

// Random unit-norm vectors for every synthetic token, deterministic in seed.
EmbeddingTable synthetic_embeddings(int dim, std::uint64_t seed);

}  // namespace dida

#endif
