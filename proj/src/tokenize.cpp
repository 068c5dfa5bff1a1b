#include "dida/tokenize.hpp"

#include <cctype>

namespace dida {

std::string lowercase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
  }
  return out;
}

namespace {

enum class CharClass { Space, Word, Punct };

// Byte-level classification.  Any byte of a multi-byte UTF-8 sequence is
// treated as a word character; ASCII splits into alnum vs punctuation.
CharClass classify(unsigned char c) {
  if (c >= 0x80) return CharClass::Word;
  if (std::isspace(c)) return CharClass::Space;
  if (std::isalnum(c) || c == '_') return CharClass::Word;
  return CharClass::Punct;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    CharClass cls = classify(static_cast<unsigned char>(text[i]));
    if (cls == CharClass::Space) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && classify(static_cast<unsigned char>(text[j])) == cls) ++j;
    std::string_view raw = text.substr(i, j - i);
    Token t;
    t.is_word = (cls == CharClass::Word);
    t.text = t.is_word ? lowercase(raw) : std::string(raw);
    t.begin = i;
    t.end = j;
    tokens.push_back(std::move(t));
    i = j;
  }
  return tokens;
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> words;
  for (auto& t : tokenize(text)) {
    if (t.is_word) words.push_back(t.text);
  }
  return words;
}

}  // namespace dida
