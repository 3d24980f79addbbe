#pragma once

// Candidate features s = [s^GL; s^KN] and hashtag features h.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hashseg/ngram_lm.hpp"
#include "hashseg/segmentation.hpp"

namespace hashseg {

/// Lexical resources and the four language models. Word sets and count
/// keys are stored casefolded; lookups casefold their argument.
struct ResourcePack {
  std::unordered_set<std::string> english_dictionary;
  std::unordered_set<std::string> slang_dictionary;
  std::unordered_set<std::string> wikipedia_titles;
  std::unordered_map<std::string, std::uint64_t> web_ngram_counts;
  std::shared_ptr<const lm::NGramModel> lm_gt_tweet;
  std::shared_ptr<const lm::NGramModel> lm_kn_tweet;
  std::shared_ptr<const lm::NGramModel> lm_gt_news;
  std::shared_ptr<const lm::NGramModel> lm_kn_news;

  static void insert(std::unordered_set<std::string>& set, std::string_view word) { set.insert(casefold(word)); }
  void add_web_count(std::string_view ngram, std::uint64_t c) { web_ngram_counts[casefold(ngram)] += c; }

  bool in_dictionary(std::string_view w) const { return english_dictionary.contains(casefold(w)); }
  bool in_slang(std::string_view w) const { return slang_dictionary.contains(casefold(w)); }
  bool is_title(std::string_view t) const { return wikipedia_titles.contains(casefold(t)); }
  std::uint64_t web_count(std::string_view ngram) const {
    const auto it = web_ngram_counts.find(casefold(ngram));
    return it == web_ngram_counts.end() ? 0 : it->second;
  }

  void require_models() const {
    if (!lm_gt_tweet || !lm_kn_tweet || !lm_gt_news || !lm_kn_news)
      throw Error("resource pack is missing a language model");
  }
};

struct ShapeFlags {
  bool camel_case = false;
  bool consonants = false;
  bool digits_prefix = false;
  bool digits_suffix = false;
  bool underscore = false;
};

namespace detail {

inline bool is_camel_transition(const std::string& raw, std::size_t i) {
  return i > 0 && is_ascii_lower(raw[i - 1]) && is_ascii_upper(raw[i]);
}

}  // namespace detail

/// Word-shape rules. Each flag is set when the hashtag has the shape and
/// the segmentation splits it the way the rule prescribes:
///   camel case     XxxXxx -> Xxx+Xxx: every boundary inside an underscore
///                  run falls on a lower->upper transition (at least one)
///   consonants     cccc -> cccc: all-consonant hashtag left unsplit
///   digits prefix  ddwwww -> dd+wwww: the leading digit run is the first word
///   digits suffix  wwwwdd -> wwww+dd: the trailing digit run is the last word
///   underscore     www_www -> www+_+www: split exactly at the underscores
inline ShapeFlags word_shape_flags(const Hashtag& h, const Segmentation& seg) {
  ShapeFlags f;
  const std::string& raw = h.raw();
  const auto& spans = seg.spans();

  std::size_t inner = 0;
  bool all_camel = true;
  for (std::size_t w = 1; w < spans.size(); ++w) {
    if (spans[w].begin != spans[w - 1].end) continue;  // underscore boundary
    ++inner;
    if (!detail::is_camel_transition(raw, spans[w].begin)) all_camel = false;
  }
  f.camel_case = inner > 0 && all_camel;

  f.consonants = seg.size() == 1 && all_consonants(raw);

  const auto run_is = [&](const Span& s, auto pred) {
    return std::all_of(raw.begin() + static_cast<std::ptrdiff_t>(s.begin),
                       raw.begin() + static_cast<std::ptrdiff_t>(s.end), pred);
  };
  const auto digit = [](char c) { return is_ascii_digit(c); };
  if (spans.size() >= 2) {
    f.digits_prefix = run_is(spans.front(), digit) && !is_ascii_digit(raw[spans[1].begin]) &&
                      spans[1].begin == spans.front().end;
    f.digits_suffix = run_is(spans.back(), digit) && !is_ascii_digit(raw[spans.back().begin - 1]) &&
                      spans[spans.size() - 2].end == spans.back().begin;
  }

  f.underscore = h.has_underscore() && seg.size() == h.runs().size();
  return f;
}

/// Names and kinds of every feature. Boolean features are left as 0/1 by
/// standardization; the rest are z-scored.
struct FeatureLayout {
  std::vector<std::string> gl_names;
  std::vector<std::string> kn_names;
  std::vector<std::string> h_names;
  std::vector<bool> gl_real;
  std::vector<bool> kn_real;
  std::vector<bool> h_real;

  std::size_t gl_size() const { return gl_names.size(); }
  std::size_t kn_size() const { return kn_names.size(); }
  std::size_t s_size() const { return gl_size() + kn_size(); }
  std::size_t h_size() const { return h_names.size(); }

  std::vector<bool> s_real() const {
    std::vector<bool> out(gl_real);
    out.insert(out.end(), kn_real.begin(), kn_real.end());
    return out;
  }

  std::uint64_t hash() const {
    std::uint64_t v = fnv1a("layout");
    for (const auto* names : {&gl_names, &kn_names, &h_names}) {
      v = fnv1a("|", v);
      for (const auto& n : *names) v = fnv1a(n + ";", v);
    }
    return v;
  }

  static const FeatureLayout& standard() {
    static const FeatureLayout layout = [] {
      FeatureLayout l;
      const auto add = [](std::vector<std::string>& names, std::vector<bool>& real, std::string name, bool r) {
        names.push_back(std::move(name));
        real.push_back(r);
      };
      for (const char* n : {"word_count", "word_len_min", "word_len_max", "word_len_mean", "dict_frac",
                            "slang_frac", "web_count", "gt_tweet", "gt_news"})
        add(l.gl_names, l.gl_real, n, true);
      for (const char* n : {"named_entity", "shape_camel", "shape_consonants", "shape_digits_prefix",
                            "shape_digits_suffix", "shape_underscore"})
        add(l.gl_names, l.gl_real, n, false);
      for (const char* n : {"kn_tweet", "kn_news"}) add(l.kn_names, l.kn_real, n, true);

      add(l.h_names, l.h_real, "length", true);
      add(l.h_names, l.h_real, "web_count", true);
      for (const char* n : {"in_dict", "in_slang", "is_title", "camel_case", "ends_with_digit", "all_consonants"})
        add(l.h_names, l.h_real, n, false);
      for (std::size_t i = 0; i < l.gl_names.size(); ++i)
        add(l.h_names, l.h_real, "wb_" + l.gl_names[i], l.gl_real[i]);
      for (std::size_t i = 0; i < l.kn_names.size(); ++i)
        add(l.h_names, l.h_real, "wb_" + l.kn_names[i], l.kn_real[i]);
      return l;
    }();
    return layout;
  }
};

struct FeatureBundle {
  std::vector<double> gl;
  std::vector<double> kn;
  std::uint64_t layout_hash = 0;

  std::vector<double> full() const {
    std::vector<double> s(gl);
    s.insert(s.end(), kn.begin(), kn.end());
    return s;
  }
};

struct HashtagFeatures {
  std::vector<double> values;
  std::uint64_t layout_hash = 0;
};

inline double log_count(std::uint64_t c) { return std::log1p(static_cast<double>(c)); }

inline FeatureBundle segmentation_features(const Hashtag& h, const Segmentation& seg, const ResourcePack& res) {
  res.require_models();
  const auto& words = seg.folded_words();
  const double n = static_cast<double>(words.size());
  std::size_t len_min = words.front().size();
  std::size_t len_max = 0;
  std::size_t len_sum = 0;
  std::size_t in_dict = 0;
  std::size_t in_slang = 0;
  for (const auto& w : words) {
    len_min = std::min(len_min, w.size());
    len_max = std::max(len_max, w.size());
    len_sum += w.size();
    if (res.in_dictionary(w)) ++in_dict;
    if (res.in_slang(w)) ++in_slang;
  }
  const std::string joined = seg.folded_text();
  const ShapeFlags shape = word_shape_flags(h, seg);
  const auto b = [](bool v) { return v ? 1.0 : 0.0; };

  FeatureBundle f;
  f.gl = {n,
          static_cast<double>(len_min),
          static_cast<double>(len_max),
          static_cast<double>(len_sum) / n,
          static_cast<double>(in_dict) / n,
          static_cast<double>(in_slang) / n,
          log_count(res.web_count(joined)),
          lm::score_segmentation(*res.lm_gt_tweet, seg),
          lm::score_segmentation(*res.lm_gt_news, seg),
          b(res.is_title(joined)),
          b(shape.camel_case),
          b(shape.consonants),
          b(shape.digits_prefix),
          b(shape.digits_suffix),
          b(shape.underscore)};
  f.kn = {lm::score_segmentation(*res.lm_kn_tweet, seg), lm::score_segmentation(*res.lm_kn_news, seg)};
  f.layout_hash = FeatureLayout::standard().hash();
  return f;
}

inline HashtagFeatures hashtag_features(const Hashtag& h, const ResourcePack& res, const Segmentation& wb_best) {
  const std::string& raw = h.raw();
  bool camel = false;
  for (std::size_t i = 1; i < raw.size(); ++i) camel = camel || detail::is_camel_transition(raw, i);
  const auto b = [](bool v) { return v ? 1.0 : 0.0; };

  HashtagFeatures f;
  f.values = {static_cast<double>(h.length()),
              log_count(res.web_count(h.chars())),
              b(res.in_dictionary(h.chars())),
              b(res.in_slang(h.chars())),
              b(res.is_title(h.chars())),
              b(camel),
              b(is_ascii_digit(raw.back())),
              b(all_consonants(raw))};
  const FeatureBundle wb = segmentation_features(h, wb_best, res);
  f.values.insert(f.values.end(), wb.gl.begin(), wb.gl.end());
  f.values.insert(f.values.end(), wb.kn.begin(), wb.kn.end());
  f.layout_hash = FeatureLayout::standard().hash();
  return f;
}

/// Per-column z-scoring with statistics from training data. Columns
/// flagged non-real, and columns with zero variance, keep scale 1 and
/// mean 0 (resp. mean only).
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardization identity(std::size_t dim) { return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)}; }

  static Standardization fit(const std::vector<std::vector<double>>& rows, const std::vector<bool>& real) {
    const std::size_t dim = real.size();
    Standardization s = identity(dim);
    if (rows.empty()) return s;
    for (std::size_t j = 0; j < dim; ++j) {
      if (!real[j]) continue;
      double sum = 0.0;
      for (const auto& r : rows) sum += r[j];
      const double mu = sum / static_cast<double>(rows.size());
      double var = 0.0;
      for (const auto& r : rows) var += (r[j] - mu) * (r[j] - mu);
      var /= static_cast<double>(rows.size());
      s.mean[j] = mu;
      s.scale[j] = var > 1e-12 ? std::sqrt(var) : 1.0;
    }
    return s;
  }

  std::size_t dim() const { return mean.size(); }

  std::vector<double> apply(std::span<const double> x) const {
    if (x.size() != mean.size()) throw Error("feature vector has wrong dimension");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
    return out;
  }
};

}  // namespace hashseg
