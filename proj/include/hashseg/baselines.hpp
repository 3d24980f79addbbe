#pragma once

// Reference segmenters: the hashtag itself, word-shape rules with a
// dictionary, unigram Viterbi, and a linear pairwise perceptron ranker.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hashseg/candidate_gen.hpp"
#include "hashseg/features.hpp"
#include "hashseg/ranker.hpp"

namespace hashseg {

inline Segmentation original_hashtag(const Hashtag& h) { return Segmentation::unsplit(h); }

/// Splits at underscores, lower->upper case changes and the edges of
/// leading/trailing digit runs, then cuts each piece by greedy longest
/// dictionary match from the left. Characters where no dictionary word
/// starts are collected into one residue token.
inline Segmentation rule_based_segment(const Hashtag& h, const std::unordered_set<std::string>& dictionary) {
  const std::string& raw = h.raw();
  const std::string& folded = h.chars();
  std::size_t longest = 0;
  for (const auto& w : dictionary) longest = std::max(longest, w.size());

  std::vector<Span> pieces;
  for (const Span& run : h.runs()) {
    std::vector<std::size_t> cuts{run.begin};
    std::size_t lead = run.begin;
    while (lead < run.end && is_ascii_digit(raw[lead])) ++lead;
    if (lead > run.begin && lead < run.end) cuts.push_back(lead);
    std::size_t trail = run.end;
    while (trail > run.begin && is_ascii_digit(raw[trail - 1])) --trail;
    if (trail < run.end && trail > run.begin) cuts.push_back(trail);
    for (std::size_t i = run.begin + 1; i < run.end; ++i)
      if (is_ascii_lower(raw[i - 1]) && is_ascii_upper(raw[i])) cuts.push_back(i);
    cuts.push_back(run.end);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) pieces.push_back({cuts[c], cuts[c + 1]});
  }

  std::vector<Span> spans;
  for (const Span& p : pieces) {
    std::size_t i = p.begin;
    std::size_t residue = p.begin;
    while (i < p.end) {
      std::size_t match = 0;
      for (std::size_t len = std::min(longest, p.end - i); len >= 1; --len) {
        if (dictionary.contains(folded.substr(i, len))) {
          match = len;
          break;
        }
      }
      if (match == 0) {
        ++i;
        continue;
      }
      if (residue < i) spans.push_back({residue, i});
      spans.push_back({i, i + match});
      i += match;
      residue = i;
    }
    if (residue < p.end) spans.push_back({residue, p.end});
  }
  return Segmentation::from_spans(h, std::move(spans));
}

/// Unigram frequency table; unseen words get 1 / (total * 10^|w|).
class UnigramTable {
 public:
  void add(std::string_view word, std::uint64_t count) {
    counts_[casefold(word)] += count;
    total_ += count;
  }

  std::uint64_t total() const { return total_; }

  double log_prob(std::string_view folded_word) const {
    if (total_ == 0) throw Error("empty unigram table");
    const auto it = counts_.find(std::string(folded_word));
    const double total = static_cast<double>(total_);
    if (it != counts_.end() && it->second > 0) return std::log(static_cast<double>(it->second) / total);
    return -std::log(total) - static_cast<double>(folded_word.size()) * std::log(10.0);
  }

  /// Sum of word log-probabilities, left to right.
  double score(const Segmentation& s) const {
    double total = 0.0;
    for (const auto& w : s.folded_words()) total += log_prob(w);
    return total;
  }

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Maximum product of unigram probabilities by dynamic programming over
/// word end positions. Ties follow the candidate ranking order.
inline Segmentation viterbi_segment(const Hashtag& h, const UnigramTable& table) {
  const detail::CompactText text(h);
  const std::size_t n = text.size();
  struct Best {
    double score = 0.0;
    std::vector<std::size_t> cuts;
    std::vector<std::string> words;
    bool set = false;
  };
  std::vector<Best> best(n + 1);
  best[0].set = true;
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t i = j; i-- > 0;) {
      if (!text.word_allowed(i, j)) break;
      if (!best[i].set) continue;
      const std::string word = text.chars.substr(i, j - i);
      const double score = best[i].score + table.log_prob(word);
      auto words = best[i].words;
      words.push_back(word);
      if (!best[j].set || ranks_before(score, words, best[j].score, best[j].words)) {
        auto cuts = best[i].cuts;
        cuts.push_back(j);
        best[j] = {score, std::move(cuts), std::move(words), true};
      }
    }
  }
  std::vector<Span> spans;
  std::size_t start = 0;
  for (std::size_t cut : best[n].cuts) {
    spans.push_back(text.raw_span(start, cut));
    start = cut;
  }
  return Segmentation::from_spans(h, std::move(spans));
}

/// Linear scorer w . s trained with perceptron-style hinge updates on
/// pairs whose gold score prefers a over b.
struct LinearRanker {
  std::vector<double> weights;
  Standardization norm;
  std::uint64_t layout_hash = 0;

  double score(const FeatureBundle& f) const {
    if (f.layout_hash != layout_hash) throw Error("feature layout hash mismatch");
    const auto s = norm.apply(f.full());
    return std::inner_product(s.begin(), s.end(), weights.begin(), 0.0);
  }

  /// Candidate indices by descending score; ties keep generator order.
  std::vector<std::size_t> rank(const std::vector<FeatureBundle>& candidates) const {
    std::vector<double> s;
    for (const auto& c : candidates) s.push_back(score(c));
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    return order;
  }

  /// One update: w += lr * (sa - sb) when w . (sa - sb) < 1. Returns
  /// whether the weights changed.
  static bool update(std::vector<double>& w, std::span<const double> sa, std::span<const double> sb, double lr) {
    double margin = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) margin += w[i] * (sa[i] - sb[i]);
    if (margin >= 1.0) return false;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += lr * (sa[i] - sb[i]);
    return true;
  }
};

struct LinearRankerConfig {
  std::size_t epochs = 20;
  double learning_rate = 0.1;
  std::uint64_t seed = 1;
};

inline LinearRanker train_linear_ranker(const std::vector<TrainingGroup>& groups, const FeatureLayout& layout,
                                        const LinearRankerConfig& cfg = {}) {
  if (groups.empty()) throw Error("empty training set");
  LinearRanker r;
  r.layout_hash = layout.hash();
  r.weights.assign(layout.s_size(), 0.0);
  std::vector<std::vector<double>> rows;
  for (const auto& g : groups)
    for (const auto& c : g.candidates) {
      if (c.layout_hash != r.layout_hash) throw Error("feature layout hash mismatch");
      rows.push_back(c.full());
    }
  r.norm = Standardization::fit(rows, layout.s_real());

  std::vector<std::vector<std::vector<double>>> std_feats;
  for (const auto& g : groups) {
    std::vector<std::vector<double>> s;
    for (const auto& c : g.candidates) s.push_back(r.norm.apply(c.full()));
    std_feats.push_back(std::move(s));
  }
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t gi : order)
      for (const auto& e : groups[gi].pairs)
        if (e.target > 0)
          LinearRanker::update(r.weights, std_feats[gi][e.a], std_feats[gi][e.b], cfg.learning_rate);
  }
  return r;
}

}  // namespace hashseg
