#ifndef DIDA_AUGMENT_HPP
#define DIDA_AUGMENT_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dida/corpus.hpp"
#include "dida/resources.hpp"

namespace dida {

enum class AugmentStrategy { Synonym, Embedding, MaskedLm, BackTranslation };

std::string strategy_name(AugmentStrategy s);
AugmentStrategy parse_strategy(const std::string& name);

// TSV: word<TAB>comma-separated synonyms.
struct SynonymDict {
  std::map<std::string, std::vector<std::string>> entries;

  static SynonymDict load(const std::string& path);
  const std::vector<std::string>* lookup(const std::string& word) const;
};

// Pluggable masked-LM substitution backend; absent in the hermetic setup, in
// which case the embedding strategy is the fallback.
struct MaskedLmProvider {
  virtual ~MaskedLmProvider() = default;
  virtual std::optional<std::string> predict(const std::vector<std::string>& tokens,
                                             std::size_t masked_index) = 0;
};

struct AugmentResources {
  const SynonymDict* synonyms = nullptr;
  const EmbeddingTable* embeddings = nullptr;
  const EmotionLexicon* lexicon = nullptr;  // its words are never substituted
  MaskedLmProvider* masked_lm = nullptr;
};

struct SubstituteResult {
  std::string text;
  int edit_count = 0;
};

// One-for-one replacement of ceil(rate * eligible) word tokens; stop-words,
// punctuation and lexicon emotion words are ineligible.  Deterministic given
// seed; tokens without a candidate are skipped.
SubstituteResult substitute(const std::string& text, AugmentStrategy strategy, double rate,
                            std::uint64_t seed, const AugmentResources& res);

struct TranslatorClient {
  virtual ~TranslatorClient() = default;
  virtual std::string translate(const std::string& text, const std::string& src,
                                const std::string& dst) = 0;
};

// Offline deterministic client; the transform runs on every call.
struct StubTranslator : TranslatorClient {
  std::function<std::string(const std::string&, const std::string&, const std::string&)> fn;
  StubTranslator();  // identity
  std::string translate(const std::string& text, const std::string& src,
                        const std::string& dst) override;
};

// LibreTranslate-style HTTP client; reads the API key from DIDA_MT_KEY.
struct HttpTranslator : TranslatorClient {
  std::string host;
  int port = 443;
  std::string path = "/translate";
  std::string translate(const std::string& text, const std::string& src,
                        const std::string& dst) override;
};

struct TranslationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Round trip through the pivot language, retrying each leg up to `attempts`
// times before giving up with TranslationError.
std::string back_translate(const std::string& text, TranslatorClient& client,
                           const std::string& source_lang, const std::string& pivot_lang,
                           int attempts = 3);

struct AugmentedRecord {
  std::string parent_id;
  NewsRecord record;  // variant texts; label always absent
  AugmentStrategy strategy;
  int edit_count = 0;
  std::string pivot_lang;  // back-translation provenance
};

struct AugmentPlan {
  std::vector<std::pair<AugmentStrategy, int>> entries;  // (strategy, multiplier)
  double rate = 0.1;
  bool augment_news = true;
  bool augment_comments = true;
  std::string source_lang = "en";
  std::string pivot_lang = "fr";
};

// Variants for every labeled record and plan entry.  Labels are never copied
// onto variants; pseudo-labeling is the only path that assigns them.
// Translation failures skip the variant and bump *skipped.
std::vector<AugmentedRecord> augment_corpus(const std::vector<NewsRecord>& records,
                                            const AugmentPlan& plan, std::uint64_t seed,
                                            const AugmentResources& res,
                                            TranslatorClient* translator = nullptr,
                                            std::size_t* skipped = nullptr);

}  // namespace dida

#endif
