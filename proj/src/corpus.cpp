#include "dida/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dida/resources.hpp"
#include "dida/types.hpp"

namespace dida {

using nlohmann::json;

DatasetFormat parse_format(const std::string& name) {
  if (name == "jsonl") return DatasetFormat::Jsonl;
  if (name == "rumoureval19") return DatasetFormat::RumourEval19;
  if (name == "weibo16") return DatasetFormat::Weibo16;
  throw ConfigError("unknown dataset format: " + name);
}

void sort_comments(NewsRecord& record) {
  std::stable_sort(record.comments.begin(), record.comments.end(),
                   [](const Comment& a, const Comment& b) {
                     if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                     return a.source_order < b.source_order;
                   });
}

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<int> parse_label(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_boolean()) return j.get<bool>() ? 1 : 0;
  if (j.is_number()) {
    int v = j.get<int>();
    if (v != 0 && v != 1) throw RuntimeError("label must be 0 or 1");
    return v;
  }
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "fake" || s == "false" || s == "1") return 1;
    if (s == "true" || s == "real" || s == "0") return 0;
    throw RuntimeError("unrecognized label string: " + s);
  }
  throw RuntimeError("unrecognized label type");
}

NewsRecord parse_record(const json& j, DatasetFormat format, LoadReport& report) {
  NewsRecord rec;
  switch (format) {
    case DatasetFormat::Jsonl: {
      rec.id = j.at("id").get<std::string>();
      rec.news_text = j.at("news").get<std::string>();
      rec.label = parse_label(j.at("label"));
      int order = 0;
      for (const auto& cj : j.at("comments")) {
        Comment c;
        c.text = trimmed(cj.at("text").get<std::string>());
        c.timestamp = cj.at("ts").get<std::int64_t>();
        c.source_order = order++;
        if (c.text.empty()) {
          ++report.dropped_comments;
          continue;
        }
        rec.comments.push_back(std::move(c));
      }
      break;
    }
    case DatasetFormat::RumourEval19: {
      // Flattened RumourEval export: source tweet plus its reply thread.
      rec.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                      : std::to_string(j.at("id").get<std::int64_t>());
      rec.news_text = j.at("text").get<std::string>();
      rec.label = j.contains("label") ? parse_label(j.at("label")) : std::nullopt;
      int order = 0;
      if (j.contains("replies")) {
        for (const auto& cj : j.at("replies")) {
          Comment c;
          c.text = trimmed(cj.at("text").get<std::string>());
          c.timestamp = cj.contains("created") ? cj.at("created").get<std::int64_t>() : order;
          c.source_order = order++;
          if (c.text.empty()) {
            ++report.dropped_comments;
            continue;
          }
          rec.comments.push_back(std::move(c));
        }
      }
      break;
    }
    case DatasetFormat::Weibo16: {
      rec.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                      : std::to_string(j.at("id").get<std::int64_t>());
      rec.news_text = j.at("text").get<std::string>();
      rec.label = j.contains("label") ? parse_label(j.at("label")) : std::nullopt;
      int order = 0;
      if (j.contains("comments")) {
        for (const auto& cj : j.at("comments")) {
          Comment c;
          if (cj.is_array()) {  // ["text", ts]
            c.text = trimmed(cj.at(0).get<std::string>());
            c.timestamp = cj.size() > 1 ? cj.at(1).get<std::int64_t>() : order;
          } else {
            c.text = trimmed(cj.at("text").get<std::string>());
            c.timestamp = cj.contains("ts") ? cj.at("ts").get<std::int64_t>() : order;
          }
          c.source_order = order++;
          if (c.text.empty()) {
            ++report.dropped_comments;
            continue;
          }
          rec.comments.push_back(std::move(c));
        }
      }
      break;
    }
  }
  if (trimmed(rec.news_text).empty()) throw RuntimeError("empty news text");
  sort_comments(rec);
  return rec;
}

}  // namespace

std::vector<NewsRecord> load_dataset(const std::string& path, DatasetFormat format,
                                     LoadReport* report, int max_records) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open dataset file: " + path);
  LoadReport local;
  std::vector<NewsRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (trimmed(line).empty()) continue;
    if (max_records >= 0 && static_cast<int>(records.size()) >= max_records) break;
    try {
      json j = json::parse(line);
      records.push_back(parse_record(j, format, local));
    } catch (const std::exception&) {
      ++local.skipped;
    }
  }
  local.records = records.size();
  if (report) *report = local;
  if (records.empty()) throw RuntimeError("no usable records in " + path);
  return records;
}

void save_jsonl(const std::string& path, const std::vector<NewsRecord>& records) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path);
  for (const auto& rec : records) {
    json j;
    j["id"] = rec.id;
    j["news"] = rec.news_text;
    if (rec.label) j["label"] = *rec.label; else j["label"] = nullptr;
    json comments = json::array();
    for (const auto& c : rec.comments) {
      comments.push_back({{"text", c.text}, {"ts", c.timestamp}});
    }
    j["comments"] = std::move(comments);
    out << j.dump() << "\n";
  }
}

SplitScheme SplitScheme::ratio(double train, double validation, double test) {
  SplitScheme s;
  s.kind = Kind::Ratio;
  s.train = train;
  s.validation = validation;
  s.test = test;
  if (std::abs(train + validation + test - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1");
  return s;
}

SplitScheme SplitScheme::kfold(int k) {
  if (k < 2) throw ConfigError("kfold requires k >= 2");
  SplitScheme s;
  s.kind = Kind::KFold;
  s.k = k;
  return s;
}

namespace {

// Shuffle indices per label class so every split keeps the global fake/true
// ratio to within one record.
std::array<std::vector<int>, 2> stratified_indices(const std::vector<NewsRecord>& records,
                                                   std::uint64_t seed) {
  std::array<std::vector<int>, 2> by_label;
  for (int i = 0; i < static_cast<int>(records.size()); ++i) {
    if (!records[i].label) throw RuntimeError("make_splits requires labeled records: " + records[i].id);
    by_label[*records[i].label].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(by_label[0].begin(), by_label[0].end(), rng);
  std::shuffle(by_label[1].begin(), by_label[1].end(), rng);
  return by_label;
}

}  // namespace

std::vector<DatasetSplit> make_splits(const std::vector<NewsRecord>& records,
                                      const SplitScheme& scheme, std::uint64_t seed) {
  auto by_label = stratified_indices(records, seed);

  if (scheme.kind == SplitScheme::Kind::Ratio) {
    DatasetSplit split;
    for (const auto& ids : by_label) {
      std::size_t n = ids.size();
      std::size_t n_train = static_cast<std::size_t>(std::lround(scheme.train * n));
      std::size_t n_val = static_cast<std::size_t>(std::lround(scheme.validation * n));
      n_train = std::min(n_train, n);
      n_val = std::min(n_val, n - n_train);
      for (std::size_t i = 0; i < n; ++i) {
        const NewsRecord& r = records[ids[i]];
        if (i < n_train) split.train.push_back(r);
        else if (i < n_train + n_val) split.validation.push_back(r);
        else split.test.push_back(r);
      }
    }
    return {std::move(split)};
  }

  int k = scheme.k;
  if (static_cast<int>(records.size()) < k) throw RuntimeError("fewer records than folds");
  // Deal class-shuffled indices round-robin into k folds.
  std::vector<std::vector<int>> folds(k);
  for (const auto& ids : by_label) {
    for (std::size_t i = 0; i < ids.size(); ++i) folds[i % k].push_back(ids[i]);
  }
  std::vector<DatasetSplit> splits;
  for (int f = 0; f < k; ++f) {
    DatasetSplit split;
    split.fold_id = f;
    int val_fold = (f + 1) % k;
    for (int g = 0; g < k; ++g) {
      for (int idx : folds[g]) {
        if (g == f) split.test.push_back(records[idx]);
        else if (g == val_fold) split.validation.push_back(records[idx]);
        else split.train.push_back(records[idx]);
      }
    }
    splits.push_back(std::move(split));
  }
  return splits;
}

std::vector<NewsRecord> generate_synthetic(int n_records, std::uint64_t seed,
                                           const SyntheticParams& params) {
  if (n_records < 20 || n_records % 2 != 0)
    throw ConfigError("generate_synthetic requires an even n_records >= 20");
  std::mt19937_64 rng(seed);
  const auto& filler = synthetic_filler_words();
  const auto& pos = synthetic_positive_words();
  const auto& neg = synthetic_negative_words();

  auto pick = [&](const std::vector<std::string>& words) {
    return words[rng() % words.size()];
  };
  auto make_text = [&](int len_min, int len_max) {
    int len = len_min + static_cast<int>(rng() % (len_max - len_min + 1));
    std::string text;
    for (int i = 0; i < len; ++i) {
      if (i) text += ' ';
      text += pick(filler);
    }
    return text;
  };

  std::vector<NewsRecord> records;
  for (int r = 0; r < n_records; ++r) {
    NewsRecord rec;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "synth-%04d", r);
    rec.id = buf;
    int label = (r % 2 == 0) ? 1 : 0;  // even index = fake
    rec.label = label;
    rec.news_text = make_text(params.news_len_min, params.news_len_max);

    // Both classes carry the same half-positive half-negative comment
    // multiset; only the arrangement differs.  Fake comment emotions swing
    // every step, real ones switch polarity once mid-thread, so every
    // order-invariant statistic matches across classes and the chronological
    // encoder is the only channel that can separate them.  The starting sign
    // alternates across records within each class.
    const int half = params.comments_per_record / 2;
    const int start = (r / 2) % 2 == 0 ? 1 : -1;
    for (int m = 0; m < params.comments_per_record; ++m) {
      int sign;
      if (label == 1) {
        sign = (m % 2 == 0) ? start : -start;  // strict alternation: + - + - ...
      } else {
        sign = (m < half) ? start : -start;  // one drift: + + + ... - - -
      }
      double u = static_cast<double>(rng() % 1000000) / 1000000.0;
      if (u < params.sign_flip_prob) sign = -sign;
      std::string text = make_text(params.comment_len_min, params.comment_len_max);
      const std::string& emo = sign > 0 ? pick(pos) : pick(neg);
      // Insert the emotion word at a random whitespace boundary.
      std::vector<std::string> toks;
      std::istringstream iss(text);
      for (std::string w; iss >> w;) toks.push_back(w);
      std::size_t slot = rng() % (toks.size() + 1);
      toks.insert(toks.begin() + slot, emo);
      std::string joined;
      for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) joined += ' ';
        joined += toks[i];
      }
      Comment c;
      c.text = joined;
      c.timestamp = 1600000000 + 60 * m;
      c.source_order = m;
      rec.comments.push_back(std::move(c));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace dida
