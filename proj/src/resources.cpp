#include "dida/resources.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dida/tokenize.hpp"

namespace dida {

namespace fs = std::filesystem;

int EmotionLexicon::category_id(const std::string& name) const {
  auto it = std::find(categories.begin(), categories.end(), name);
  return it == categories.end() ? -1 : static_cast<int>(it - categories.begin());
}

bool EmotionLexicon::is_emotion_word(const std::string& w) const {
  return word_categories.count(w) || intensity.count(w) || polarity.count(w) ||
         negation_words.count(w);
}

bool EmotionLexicon::operator==(const EmotionLexicon& o) const {
  return categories == o.categories && word_categories == o.word_categories &&
         intensity == o.intensity && polarity == o.polarity &&
         negation_words == o.negation_words && pronouns == o.pronouns &&
         emoticons == o.emoticons;
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open embedding file: " + path);
  std::vector<std::pair<std::string, Vec>> entries;
  std::unordered_set<std::string> seen;
  std::size_t dupes = 0;
  int dim = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream iss(line);
    std::string token;
    iss >> token;
    std::vector<double> vals;
    double v;
    while (iss >> v) vals.push_back(v);
    if (dim < 0) {
      dim = static_cast<int>(vals.size());
      if (dim == 0) throw RuntimeError(path + ":" + std::to_string(lineno) + ": no vector values");
    } else if (static_cast<int>(vals.size()) != dim) {
      throw RuntimeError(path + ":" + std::to_string(lineno) + ": inconsistent vector width");
    }
    if (!seen.insert(token).second) {
      ++dupes;  // keep first occurrence
      continue;
    }
    Vec row = Eigen::Map<Vec>(vals.data(), dim);
    entries.emplace_back(std::move(token), std::move(row));
  }
  if (entries.empty()) throw RuntimeError("empty embedding file: " + path);
  EmbeddingTable table = make_embedding_table(entries);
  table.duplicate_warnings = dupes;
  return table;
}

void save_embeddings(const std::string& path, const EmbeddingTable& table) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path);
  out.precision(17);
  std::vector<std::pair<std::string, int>> sorted(table.vocab.begin(), table.vocab.end());
  std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.second < b.second; });
  for (const auto& [token, row] : sorted) {
    out << token;
    for (int j = 0; j < table.dim; ++j) out << ' ' << table.vectors(row, j);
    out << "\n";
  }
}

EmbeddingTable make_embedding_table(const std::vector<std::pair<std::string, Vec>>& entries) {
  if (entries.empty()) throw RuntimeError("embedding table needs at least one entry");
  EmbeddingTable table;
  table.dim = static_cast<int>(entries.front().second.size());
  table.vectors = Mat::Zero(static_cast<int>(entries.size()) + 1, table.dim);
  int row = 0;
  for (const auto& [token, vec] : entries) {
    if (static_cast<int>(vec.size()) != table.dim)
      throw RuntimeError("inconsistent embedding width for token " + token);
    table.vocab[token] = row;
    table.vectors.row(row) = vec;
    ++row;
  }
  table.oov_row = row;  // reserved zero row
  return table;
}

namespace {

std::vector<std::pair<std::string, std::string>> read_tsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("missing lexicon file: " + path.string());
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw RuntimeError(path.string() + ":" + std::to_string(lineno) + ": expected word<TAB>value");
    rows.emplace_back(lowercase(line.substr(0, tab)), line.substr(tab + 1));
  }
  return rows;
}

std::unordered_set<std::string> read_word_set(const fs::path& path, bool lower = true) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("missing lexicon file: " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    words.insert(lower ? lowercase(line) : line);
  }
  return words;
}

double parse_score(const std::string& s, const std::string& where, double lo, double hi) {
  double v = std::stod(s);
  if (v < lo || v > hi)
    throw RuntimeError(where + ": score " + s + " out of [" + std::to_string(lo) + "," +
                       std::to_string(hi) + "]");
  return v;
}

}  // namespace

EmotionLexicon load_lexicon(const std::string& dir_path) {
  fs::path dir(dir_path);
  EmotionLexicon lex;

  std::size_t lineno = 0;
  for (const auto& [word, cat] : read_tsv(dir / "categories.tsv")) {
    ++lineno;
    int id = lex.category_id(cat);
    if (id < 0) {
      lex.categories.push_back(cat);
      id = lex.n_cate() - 1;
    }
    auto& cats = lex.word_categories[word];
    if (std::find(cats.begin(), cats.end(), id) == cats.end()) cats.push_back(id);
  }
  lineno = 0;
  for (const auto& [word, val] : read_tsv(dir / "intensity.tsv")) {
    ++lineno;
    std::string where = (dir / "intensity.tsv").string() + ":" + std::to_string(lineno);
    lex.intensity[word] = parse_score(val, where, 0.0, 1.0);
    if (!lex.word_categories.count(word))
      throw RuntimeError(where + ": intensity word '" + word + "' has no category");
  }
  lineno = 0;
  for (const auto& [word, val] : read_tsv(dir / "polarity.tsv")) {
    ++lineno;
    std::string where = (dir / "polarity.tsv").string() + ":" + std::to_string(lineno);
    lex.polarity[word] = parse_score(val, where, -1.0, 1.0);
  }
  lex.negation_words = read_word_set(dir / "negation.txt");
  lex.pronouns = read_word_set(dir / "pronouns.txt");
  lex.emoticons = read_word_set(dir / "emoticons.txt", /*lower=*/false);
  return lex;
}

void save_lexicon(const std::string& dir_path, const EmotionLexicon& lex) {
  fs::create_directories(dir_path);
  fs::path dir(dir_path);
  {
    // Category-major so a reload rebuilds the category order (it assigns ids
    // by first appearance).
    std::ofstream out(dir / "categories.tsv");
    for (int c = 0; c < lex.n_cate(); ++c) {
      std::vector<std::string> words;
      for (const auto& [word, cats] : lex.word_categories)
        if (std::find(cats.begin(), cats.end(), c) != cats.end()) words.push_back(word);
      std::sort(words.begin(), words.end());
      for (const auto& word : words) out << word << '\t' << lex.categories[c] << "\n";
    }
  }
  auto write_scores = [&](const char* name, const std::unordered_map<std::string, double>& m) {
    std::ofstream out(dir / name);
    out.precision(17);
    std::vector<std::pair<std::string, double>> sorted(m.begin(), m.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [word, v] : sorted) out << word << '\t' << v << "\n";
  };
  write_scores("intensity.tsv", lex.intensity);
  write_scores("polarity.tsv", lex.polarity);
  auto write_set = [&](const char* name, const std::unordered_set<std::string>& s) {
    std::ofstream out(dir / name);
    std::vector<std::string> sorted(s.begin(), s.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& w : sorted) out << w << "\n";
  };
  write_set("negation.txt", lex.negation_words);
  write_set("pronouns.txt", lex.pronouns);
  write_set("emoticons.txt", lex.emoticons);
}

// --- synthetic resources ---------------------------------------------------

const std::vector<std::string>& synthetic_positive_words() {
  static const std::vector<std::string> words = {
      "great", "happy", "wonderful", "love",  "hope",
      "glad",  "calm",  "relief",    "bravo", "cheer"};
  return words;
}

const std::vector<std::string>& synthetic_negative_words() {
  static const std::vector<std::string> words = {
      "awful", "angry", "terrible", "hate",  "fear",
      "grim",  "panic", "dread",    "lousy", "bitter"};
  return words;
}

const std::vector<std::string>& synthetic_filler_words() {
  static const std::vector<std::string> words = {
      "report",  "city",    "today",   "people",  "event",   "street", "group",  "plan",
      "meeting", "update",  "local",   "center",  "station", "market", "school", "office",
      "water",   "road",    "weather", "north",   "south",   "area",   "public", "service",
      "council", "morning", "evening", "project", "building", "river", "park",   "train",
      "company", "program", "member",  "season",  "record",  "number", "harbor",  "detail"};
  return words;
}

EmotionLexicon synthetic_lexicon() {
  EmotionLexicon lex;
  lex.categories = {"joy", "anger"};
  const auto& pos = synthetic_positive_words();
  const auto& neg = synthetic_negative_words();
  // Symmetric polarity magnitudes so alternating sequences pool to zero.
  for (std::size_t i = 0; i < pos.size(); ++i) {
    double mag = 0.6 + 0.03 * static_cast<double>(i);
    lex.word_categories[pos[i]] = {0};
    lex.polarity[pos[i]] = mag;
    lex.intensity[pos[i]] = 0.5;
    lex.word_categories[neg[i]] = {1};
    lex.polarity[neg[i]] = -mag;
    lex.intensity[neg[i]] = 0.5;
  }
  lex.negation_words = {"not", "no", "never", "none"};
  lex.pronouns = {"i", "you", "we", "me", "my", "your", "us"};
  lex.emoticons = {":)", ":(", ":D", ":-)", ":-("};
  return lex;
}

EmbeddingTable synthetic_embeddings(int dim, std::uint64_t seed) {
  std::vector<std::string> vocab = synthetic_filler_words();
  auto append = [&](const std::vector<std::string>& more) {
    vocab.insert(vocab.end(), more.begin(), more.end());
  };
  append(synthetic_positive_words());
  append(synthetic_negative_words());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::pair<std::string, Vec>> entries;
  for (const auto& token : vocab) {
    Vec v(dim);
    for (int j = 0; j < dim; ++j) v[j] = gauss(rng);
    v.normalize();
    entries.emplace_back(token, std::move(v));
  }
  return make_embedding_table(entries);
}

}  // namespace dida
