#pragma once

// Dataset TSV, resource files and the key = value configuration file.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hashseg/baselines.hpp"
#include "hashseg/candidate_gen.hpp"
#include "hashseg/features.hpp"
#include "hashseg/ngram_lm.hpp"
#include "hashseg/ranker.hpp"
#include "hashseg/supervision.hpp"

namespace hashseg {

enum class Split { Train, Dev, Test };

inline std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "";
}

inline std::optional<Split> parse_split(std::string_view s) {
  for (auto v : {Split::Train, Split::Dev, Split::Test})
    if (split_name(v) == s) return v;
  return std::nullopt;
}

struct DatasetRecord {
  std::string hashtag;             // as written, '#' stripped
  std::vector<std::string> golds;  // space-joined words, 1 or 2
  std::optional<std::string> tweet;
  Split split = Split::Test;

  GoldEntry entry() const { return GoldEntry::from_texts(Hashtag::parse(hashtag), golds); }
  bool operator==(const DatasetRecord&) const = default;
};

struct Dataset {
  std::vector<DatasetRecord> records;
  std::size_t skipped_invalid = 0;  // rows whose hashtag has characters outside [A-Za-z0-9_]

  std::vector<GoldEntry> entries() const {
    std::vector<GoldEntry> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.entry());
    return out;
  }

  std::vector<GoldEntry> entries(Split s) const {
    std::vector<GoldEntry> out;
    for (const auto& r : records)
      if (r.split == s) out.push_back(r.entry());
    return out;
  }
};

inline constexpr std::string_view kGoldSeparator = "||";

namespace detail {

inline std::vector<std::string> split_golds(std::string_view field) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = field.find(kGoldSeparator, start);
    out.emplace_back(trim(field.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + kGoldSeparator.size();
  }
  return out;
}

}  // namespace detail

/// Reads `hashtag<TAB>gold1[||gold2][<TAB>tweet][<TAB>split]`. A hashtag
/// repeated within a split with one new gold per row is merged into a
/// two-gold record; any other repetition is an error. Blank lines and a
/// leading `hashtag<TAB>segmentation` header are ignored.
inline Dataset load_dataset(std::istream& in, Split default_split = Split::Test) {
  Dataset ds;
  std::map<std::pair<Split, std::string>, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto at = [&](const std::string& msg) { return Error("line " + std::to_string(lineno) + ": " + msg); };
    const auto fields = split(line, "\t");
    if (fields.size() < 2 || fields.size() > 4) throw at("expected 2 to 4 tab-separated fields");
    if (lineno == 1 && casefold(fields[0]) == "hashtag" &&
        (casefold(fields[1]) == "segmentation" || casefold(fields[1]) == "gold"))
      continue;

    const std::string tag(trim(fields[0]));
    if (!Hashtag::is_valid(tag)) {
      ++ds.skipped_invalid;
      continue;
    }
    const Hashtag h = Hashtag::parse(tag);
    DatasetRecord rec;
    rec.hashtag = h.raw();
    rec.golds = detail::split_golds(fields[1]);
    if (rec.golds.size() > 2) throw at("more than two gold segmentations");
    for (const auto& g : rec.golds)
      if (g.empty()) throw at("empty gold segmentation");
    if (fields.size() >= 3 && !trim(fields[2]).empty()) rec.tweet = std::string(trim(fields[2]));
    rec.split = default_split;
    if (fields.size() == 4) {
      const auto s = parse_split(trim(fields[3]));
      if (!s) throw at("unknown split '" + fields[3] + "'");
      rec.split = *s;
    }
    for (const auto& g : rec.golds) {
      try {
        Segmentation::from_text(h, g);
      } catch (const Error&) {
        throw at("gold '" + g + "' does not reconstruct hashtag '" + rec.hashtag + "'");
      }
    }
    if (rec.golds.size() == 2 && Segmentation::from_text(h, rec.golds[0]).same_words(Segmentation::from_text(h, rec.golds[1])))
      rec.golds.pop_back();

    const auto key = std::make_pair(rec.split, rec.hashtag);
    const auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, ds.records.size());
      ds.records.push_back(std::move(rec));
      continue;
    }
    auto& prev = ds.records[it->second];
    const bool mergeable = prev.golds.size() == 1 && rec.golds.size() == 1 &&
                           !Segmentation::from_text(h, prev.golds[0]).same_words(Segmentation::from_text(h, rec.golds[0]));
    if (!mergeable) throw at("duplicate hashtag '" + rec.hashtag + "' in split " + std::string(split_name(rec.split)));
    prev.golds.push_back(rec.golds[0]);
    if (!prev.tweet) prev.tweet = rec.tweet;
  }
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& path, Split default_split = Split::Test) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset '" + path.string() + "'");
  try {
    return load_dataset(in, default_split);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

/// Four columns per record; tabs and newlines inside tweets become spaces.
inline void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records) {
  for (const auto& r : records) {
    std::string tweet = r.tweet.value_or("");
    for (auto& c : tweet)
      if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    out << r.hashtag << '\t' << join(r.golds, std::string(kGoldSeparator)) << '\t' << tweet << '\t'
        << split_name(r.split) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Resource files

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

/// One entry per line; surrounding whitespace trimmed, blank lines skipped.
inline std::unordered_set<std::string> load_word_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (!t.empty()) ResourcePack::insert(out, t);
  }
  return out;
}

/// `key<TAB>count` lines, passed to add(key, count).
template <class Add>
void load_count_file(const std::filesystem::path& path, Add add) {
  auto in = open_input(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos)
      throw Error(path.string() + ": line " + std::to_string(lineno) + ": expected key<TAB>count");
    try {
      add(trim(std::string_view(line).substr(0, tab)), parse_uint(std::string_view(line).substr(tab + 1)));
    } catch (const Error& e) {
      throw Error(path.string() + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline UnigramTable load_unigram_table(const std::filesystem::path& path) {
  UnigramTable t;
  load_count_file(path, [&](std::string_view w, std::uint64_t c) { t.add(w, c); });
  return t;
}

inline std::shared_ptr<const lm::NGramModel> load_lm(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return std::make_shared<const lm::NGramModel>(lm::NGramModel::read_arpa(in));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

inline RankerModel load_ranker(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return RankerModel::load(in);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Configuration

inline constexpr const char* kSeedEnv = "HASHSEG_SEED";

/// `key = value` lines; '#' starts a comment. Relative paths are taken
/// relative to the config file's directory.
struct Config {
  std::map<std::string, std::filesystem::path> paths;  // resource name -> file
  TrainConfig train;
  BeamOptions beam;

  static const std::vector<std::string>& path_keys() {
    static const std::vector<std::string> keys{"english_dictionary", "slang_dictionary", "wikipedia_titles",
                                               "web_counts",         "lm_gt_tweet",      "lm_kn_tweet",
                                               "lm_gt_news",         "lm_kn_news",       "generator_lm",
                                               "unigram_counts"};
    return keys;
  }

  std::optional<std::filesystem::path> path(const std::string& key) const {
    const auto it = paths.find(key);
    if (it == paths.end()) return std::nullopt;
    return it->second;
  }

  std::filesystem::path require_path(const std::string& key) const {
    const auto p = path(key);
    if (!p) throw Error("config does not name '" + key + "'");
    return *p;
  }

  static Config parse(std::istream& in, const std::filesystem::path& base_dir = {}) {
    Config c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      const std::string_view body = trim(std::string_view(line).substr(0, hash));
      if (body.empty()) continue;
      const auto at = [&](const std::string& msg) { return Error("config line " + std::to_string(lineno) + ": " + msg); };
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw at("expected key = value");
      const std::string key(trim(body.substr(0, eq)));
      const std::string value(trim(body.substr(eq + 1)));
      if (value.empty()) throw at("empty value for '" + key + "'");
      try {
        c.set(key, value, base_dir);
      } catch (const Error& e) {
        throw at(e.what());
      }
    }
    return c;
  }

  static Config load(const std::filesystem::path& file) {
    auto in = open_input(file);
    Config c = parse(in, file.parent_path());
    c.check_paths();
    c.apply_env();
    return c;
  }

  void set(const std::string& key, const std::string& value, const std::filesystem::path& base_dir = {}) {
    if (std::find(path_keys().begin(), path_keys().end(), key) != path_keys().end()) {
      std::filesystem::path p(value);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      paths[key] = p;
    } else if (key == "mode") {
      train.mode = parse_mode(value);
    } else if (key == "epochs") {
      train.epochs = parse_uint(value);
    } else if (key == "ranker_lr") {
      train.ranker_lr = parse_double(value);
    } else if (key == "classifier_lr") {
      train.classifier_lr = parse_double(value);
    } else if (key == "dropout") {
      train.dropout = parse_double(value);
    } else if (key == "lambda1") {
      train.lambda1 = parse_double(value);
    } else if (key == "lambda2") {
      train.lambda2 = parse_double(value);
    } else if (key == "seed") {
      train.seed = parse_uint(value);
    } else if (key == "ordered_pairs") {
      if (value != "true" && value != "false") throw Error("ordered_pairs must be true or false");
      train.ordered_pairs = value == "true";
    } else if (key == "topk") {
      beam.k = parse_uint(value);
      train.k = beam.k;
    } else if (key == "beam_width") {
      beam.beam_width = parse_uint(value);
    } else if (key == "max_word_length") {
      beam.max_word_length = parse_uint(value);
    } else {
      throw Error("unknown key '" + key + "'");
    }
  }

  void check_paths() const {
    for (const auto& [key, p] : paths)
      if (!std::filesystem::exists(p)) throw Error("config: " + key + " file not found: " + p.string());
  }

  /// HASHSEG_SEED, when set, replaces the configured seed.
  void apply_env() {
    if (const char* s = std::getenv(kSeedEnv); s && *s) train.seed = parse_uint(s);
  }
};

/// Lexical resources and LMs named by the config. Word lists and counts
/// are optional (empty when absent); the four LMs are required.
inline ResourcePack load_resources(const Config& c) {
  ResourcePack r;
  if (auto p = c.path("english_dictionary")) r.english_dictionary = load_word_list(*p);
  if (auto p = c.path("slang_dictionary")) r.slang_dictionary = load_word_list(*p);
  if (auto p = c.path("wikipedia_titles")) r.wikipedia_titles = load_word_list(*p);
  if (auto p = c.path("web_counts"))
    load_count_file(*p, [&](std::string_view k, std::uint64_t n) { r.add_web_count(k, n); });
  r.lm_gt_tweet = load_lm(c.require_path("lm_gt_tweet"));
  r.lm_kn_tweet = load_lm(c.require_path("lm_kn_tweet"));
  r.lm_gt_news = load_lm(c.require_path("lm_gt_news"));
  r.lm_kn_news = load_lm(c.require_path("lm_kn_news"));
  return r;
}

/// The candidate generator's LM: generator_lm if named, else the KN
/// tweet model.
inline std::shared_ptr<const lm::NGramModel> generator_lm(const Config& c, const ResourcePack& r) {
  if (auto p = c.path("generator_lm")) return load_lm(*p);
  return r.lm_kn_tweet;
}

}  // namespace hashseg
