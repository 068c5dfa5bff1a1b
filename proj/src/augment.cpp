#include "dida/augment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "dida/tokenize.hpp"
#include "dida/types.hpp"

namespace dida {

std::string strategy_name(AugmentStrategy s) {
  switch (s) {
    case AugmentStrategy::Synonym: return "synonym";
    case AugmentStrategy::Embedding: return "embedding";
    case AugmentStrategy::MaskedLm: return "masked_lm";
    case AugmentStrategy::BackTranslation: return "back_translation";
  }
  return "?";
}

AugmentStrategy parse_strategy(const std::string& name) {
  if (name == "synonym") return AugmentStrategy::Synonym;
  if (name == "embedding") return AugmentStrategy::Embedding;
  if (name == "masked_lm") return AugmentStrategy::MaskedLm;
  if (name == "back_translation") return AugmentStrategy::BackTranslation;
  throw ConfigError("unknown augmentation strategy: " + name);
}

SynonymDict SynonymDict::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open synonym dictionary: " + path);
  SynonymDict dict;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    std::string word = lowercase(line.substr(0, tab));
    std::vector<std::string> syns;
    std::istringstream iss(line.substr(tab + 1));
    for (std::string s; std::getline(iss, s, ',');) {
      if (!s.empty()) syns.push_back(lowercase(s));
    }
    if (!syns.empty()) dict.entries[word] = std::move(syns);
  }
  return dict;
}

const std::vector<std::string>* SynonymDict::lookup(const std::string& word) const {
  auto it = entries.find(word);
  return it == entries.end() ? nullptr : &it->second;
}

namespace {

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> words = {
      "a",  "an", "the", "and", "or",  "but", "of", "in", "on", "at",  "to", "for",
      "is", "am", "are", "was", "were", "be",  "it", "this", "that", "with", "as", "by"};
  return words;
}

bool eligible(const Token& t, const AugmentResources& res) {
  if (!t.is_word) return false;
  if (stopwords().count(t.text)) return false;
  if (res.lexicon && (res.lexicon->is_emotion_word(t.text) || res.lexicon->pronouns.count(t.text)))
    return false;
  return true;
}

// Nearest vocabulary neighbor by cosine, excluding the token itself.
std::optional<std::string> embedding_candidate(const std::string& word,
                                               const EmbeddingTable& table) {
  auto it = table.vocab.find(word);
  if (it == table.vocab.end()) return std::nullopt;
  Vec v = table.vectors.row(it->second);
  double vn = v.norm();
  if (vn == 0) return std::nullopt;
  std::string best;
  double best_cos = -2.0;
  for (const auto& [cand, row] : table.vocab) {
    if (cand == word) continue;
    Vec u = table.vectors.row(row);
    double un = u.norm();
    if (un == 0) continue;
    double c = v.dot(u) / (vn * un);
    if (c > best_cos || (c == best_cos && cand < best)) {
      best_cos = c;
      best = cand;
    }
  }
  if (best.empty()) return std::nullopt;
  return best;
}

}  // namespace

SubstituteResult substitute(const std::string& text, AugmentStrategy strategy, double rate,
                            std::uint64_t seed, const AugmentResources& res) {
  if (rate <= 0.0 || rate > 0.3) throw ConfigError("substitution rate must be in (0, 0.3]");
  SubstituteResult out{text, 0};
  if (text.empty()) return out;

  std::vector<Token> tokens = tokenize(text);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (eligible(tokens[i], res)) candidates.push_back(i);
  }
  if (candidates.empty()) return out;
  std::size_t budget = static_cast<std::size_t>(
      std::ceil(rate * static_cast<double>(candidates.size())));

  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(std::min(budget, candidates.size()));

  std::vector<std::pair<std::size_t, std::string>> edits;  // token index -> replacement
  std::vector<std::string> words;
  for (const auto& t : tokens) words.push_back(t.text);
  for (std::size_t idx : candidates) {
    const std::string& word = tokens[idx].text;
    std::optional<std::string> repl;
    switch (strategy) {
      case AugmentStrategy::Synonym: {
        if (!res.synonyms) throw RuntimeError("synonym strategy needs a dictionary");
        if (const auto* syns = res.synonyms->lookup(word)) {
          repl = (*syns)[rng() % syns->size()];
        }
        break;
      }
      case AugmentStrategy::Embedding: {
        if (!res.embeddings) throw RuntimeError("embedding strategy needs an embedding table");
        repl = embedding_candidate(word, *res.embeddings);
        break;
      }
      case AugmentStrategy::MaskedLm: {
        if (res.masked_lm) {
          repl = res.masked_lm->predict(words, idx);
        } else if (res.embeddings) {
          repl = embedding_candidate(word, *res.embeddings);  // deterministic fallback
        } else {
          throw RuntimeError("masked_lm strategy needs a provider or an embedding table");
        }
        break;
      }
      case AugmentStrategy::BackTranslation:
        throw ConfigError("back_translation is not a substitution strategy");
    }
    if (repl && *repl != word) edits.emplace_back(idx, *repl);
  }

  // Splice right-to-left so byte offsets stay valid.
  std::sort(edits.begin(), edits.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [idx, repl] : edits) {
    out.text.replace(tokens[idx].begin, tokens[idx].end - tokens[idx].begin, repl);
    ++out.edit_count;
  }
  return out;
}

StubTranslator::StubTranslator() {
  fn = [](const std::string& text, const std::string&, const std::string&) { return text; };
}

std::string StubTranslator::translate(const std::string& text, const std::string& src,
                                      const std::string& dst) {
  return fn(text, src, dst);
}

std::string HttpTranslator::translate(const std::string& text, const std::string& src,
                                      const std::string& dst) {
  httplib::Client client(host, port);
  client.set_read_timeout(10, 0);
  nlohmann::json body = {{"q", text}, {"source", src}, {"target", dst}};
  if (const char* key = std::getenv("DIDA_MT_KEY")) body["api_key"] = key;
  auto resp = client.Post(path, body.dump(), "application/json");
  if (!resp || resp->status != 200)
    throw TranslationError("translation request failed for host " + host);
  return nlohmann::json::parse(resp->body).at("translatedText").get<std::string>();
}

std::string back_translate(const std::string& text, TranslatorClient& client,
                           const std::string& source_lang, const std::string& pivot_lang,
                           int attempts) {
  auto with_retry = [&](const std::string& input, const std::string& src,
                        const std::string& dst) {
    for (int attempt = 0;; ++attempt) {
      try {
        return client.translate(input, src, dst);
      } catch (const std::exception& e) {
        if (attempt + 1 >= attempts) throw TranslationError(e.what());
        std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
      }
    }
  };
  std::string pivot = with_retry(text, source_lang, pivot_lang);
  return with_retry(pivot, pivot_lang, source_lang);
}

std::vector<AugmentedRecord> augment_corpus(const std::vector<NewsRecord>& records,
                                            const AugmentPlan& plan, std::uint64_t seed,
                                            const AugmentResources& res,
                                            TranslatorClient* translator,
                                            std::size_t* skipped) {
  std::vector<AugmentedRecord> variants;
  std::size_t skip_count = 0;
  std::uint64_t counter = 0;
  for (const auto& record : records) {
    if (!record.label) continue;
    for (const auto& [strategy, multiplier] : plan.entries) {
      for (int v = 0; v < multiplier; ++v) {
        std::uint64_t variant_seed = seed * 1000003ull + counter++;
        AugmentedRecord aug;
        aug.parent_id = record.id;
        aug.strategy = strategy;
        aug.record = record;
        aug.record.label.reset();  // variants are unlabeled by construction
        aug.record.id = record.id + "#" + strategy_name(strategy) + "-" + std::to_string(v);
        try {
          if (strategy == AugmentStrategy::BackTranslation) {
            if (!translator) throw RuntimeError("back_translation needs a translator client");
            aug.pivot_lang = plan.pivot_lang;
            if (plan.augment_news) {
              aug.record.news_text =
                  back_translate(record.news_text, *translator, plan.source_lang, plan.pivot_lang);
            }
            if (plan.augment_comments) {
              for (auto& c : aug.record.comments) {
                c.text = back_translate(c.text, *translator, plan.source_lang, plan.pivot_lang);
              }
            }
          } else {
            std::uint64_t sub_seed = variant_seed;
            if (plan.augment_news) {
              auto r = substitute(record.news_text, strategy, plan.rate, sub_seed++, res);
              aug.record.news_text = r.text;
              aug.edit_count += r.edit_count;
            }
            if (plan.augment_comments) {
              for (auto& c : aug.record.comments) {
                auto r = substitute(c.text, strategy, plan.rate, sub_seed++, res);
                c.text = r.text;
                aug.edit_count += r.edit_count;
              }
            }
          }
        } catch (const TranslationError&) {
          ++skip_count;
          continue;
        }
        variants.push_back(std::move(aug));
      }
    }
  }
  if (skipped) *skipped = skip_count;
  return variants;
}

}  // namespace dida
