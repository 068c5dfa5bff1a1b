#ifndef DIDA_TOKENIZE_HPP
#define DIDA_TOKENIZE_HPP

#include <string>
#include <string_view>
#include <vector>

namespace dida {

// One normalization path feeds both the embedding lookup and the lexicon
// matching, so feature extraction and encoding always see the same tokens.
struct Token {
  std::string text;   // lowercased for word tokens
  bool is_word;       // false for punctuation/symbol runs
  std::size_t begin;  // byte offset into the original string
  std::size_t end;    // one past the last byte
};

// Unicode-aware split: maximal runs of letters/digits (non-ASCII codepoints
// count as letters) become word tokens, maximal runs of punctuation/symbols
// become one token each.  Whitespace separates.
std::vector<Token> tokenize(std::string_view text);

// Word-token texts only, in order.
std::vector<std::string> word_tokens(std::string_view text);

std::string lowercase(std::string_view s);

}  // namespace dida

#endif
