#ifndef DIDA_CORPUS_HPP
#define DIDA_CORPUS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dida {

struct Comment {
  std::string text;
  std::int64_t timestamp = 0;  // epoch seconds
  int source_order = 0;        // position in the raw file, tie-break key
};

struct NewsRecord {
  std::string id;
  std::string news_text;
  std::vector<Comment> comments;       // ascending (timestamp, source_order)
  std::optional<int> label;            // 1 = fake, 0 = true, absent = unlabeled
};

struct DatasetSplit {
  std::vector<NewsRecord> train;
  std::vector<NewsRecord> validation;
  std::vector<NewsRecord> test;
  std::optional<int> fold_id;
};

enum class DatasetFormat { Jsonl, RumourEval19, Weibo16 };

DatasetFormat parse_format(const std::string& name);

struct LoadReport {
  std::size_t records = 0;
  std::size_t skipped = 0;           // malformed or empty-news records
  std::size_t dropped_comments = 0;  // empty after trimming
};

// Reads one record per line; comments come back time-sorted and empty-text
// comments dropped.  Zero usable records is fatal.
std::vector<NewsRecord> load_dataset(const std::string& path, DatasetFormat format,
                                     LoadReport* report = nullptr, int max_records = -1);

// Canonical JSONL writer:
// {"id": str, "news": str, "label": 0|1|null, "comments": [{"text": str, "ts": int}]}
void save_jsonl(const std::string& path, const std::vector<NewsRecord>& records);

void sort_comments(NewsRecord& record);

struct SplitScheme {
  enum class Kind { Ratio, KFold } kind = Kind::Ratio;
  double train = 0.7, validation = 0.2, test = 0.1;
  int k = 5;

  static SplitScheme ratio(double train, double validation, double test);
  static SplitScheme kfold(int k);
};

// Deterministic stratified splits.  Ratio scheme yields one DatasetSplit,
// kfold(k) yields k of them whose test sets partition the records.
std::vector<DatasetSplit> make_splits(const std::vector<NewsRecord>& records,
                                      const SplitScheme& scheme, std::uint64_t seed);

struct SyntheticParams {
  int comments_per_record = 12;   // even
  int news_len_min = 6, news_len_max = 10;
  int comment_len_min = 3, comment_len_max = 5;
  // Chance of inverting a comment's polarity, applied identically to both
  // classes; keeps order-invariant statistics class-balanced while capping
  // the achievable accuracy below 1.
  double sign_flip_prob = 0.1;
};

// Corpus where chronological comment order is the only class signal: fake
// records alternate comment polarity (+,-,+,-,...), true records hold one
// polarity with occasional flips.  News text and filler tokens come from a
// shared neutral vocabulary; pooled emotion statistics match across classes
// in expectation.
std::vector<NewsRecord> generate_synthetic(int n_records, std::uint64_t seed,
                                           const SyntheticParams& params = {});

}  // namespace dida

#endif
