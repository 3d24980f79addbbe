#pragma once

// Word Breaker style candidate generation: a position-synchronous beam
// search over word boundaries ranked by Score^LM.

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hashseg/ngram_lm.hpp"
#include "hashseg/segmentation.hpp"

namespace hashseg {

inline constexpr std::size_t kDefaultTopK = 10;
inline constexpr std::size_t kDefaultBeamWidth = 100;
inline constexpr std::size_t kEnumerationCap = 20;

struct Candidate {
  Segmentation segmentation;
  double score = 0.0;  // Score^LM
};

struct CandidateSet {
  Hashtag hashtag;
  std::vector<Candidate> candidates;  // best first
  std::size_t k = kDefaultTopK;

  std::size_t size() const { return candidates.size(); }
  std::vector<Segmentation> segmentations() const {
    std::vector<Segmentation> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) out.push_back(c.segmentation);
    return out;
  }
};

/// Total order used everywhere a ranked list of segmentations is produced:
/// higher score first, then fewer words, then lexicographic word sequence.
inline bool ranks_before(double score_a, const std::vector<std::string>& words_a, double score_b,
                         const std::vector<std::string>& words_b) {
  if (score_a != score_b) return score_a > score_b;
  if (words_a.size() != words_b.size()) return words_a.size() < words_b.size();
  return words_a < words_b;
}

inline bool ranks_before(const Candidate& a, const Candidate& b) {
  return ranks_before(a.score, a.segmentation.folded_words(), b.score, b.segmentation.folded_words());
}

namespace detail {

// The hashtag with underscores removed. Words may not cross a forced
// boundary (a position where one underscore-separated run ends).
struct CompactText {
  std::string chars;                 // casefolded, no underscores
  std::vector<std::size_t> raw_pos;  // compact index -> raw index
  std::vector<bool> forced;          // forced[p]: boundary required at compact position p

  explicit CompactText(const Hashtag& h) {
    for (const Span& run : h.runs()) {
      for (std::size_t i = run.begin; i < run.end; ++i) {
        chars.push_back(h.chars()[i]);
        raw_pos.push_back(i);
      }
    }
    forced.assign(chars.size() + 1, false);
    std::size_t p = 0;
    for (const Span& run : h.runs()) {
      p += run.size();
      forced[p] = true;
    }
  }

  std::size_t size() const { return chars.size(); }

  // True if a word may span compact positions [i, j).
  bool word_allowed(std::size_t i, std::size_t j) const {
    for (std::size_t b = i + 1; b < j; ++b)
      if (forced[b]) return false;
    return true;
  }

  Span raw_span(std::size_t i, std::size_t j) const { return {raw_pos[i], raw_pos[j - 1] + 1}; }
};

}  // namespace detail

/// All segmentations of a hashtag (2^(r-1) for underscore-free input).
/// Intended for oracles; throws Error("enumeration cap exceeded") for
/// hashtags longer than 20 characters.
inline std::vector<Segmentation> enumerate_segmentations(const Hashtag& h) {
  if (h.length() > kEnumerationCap) throw Error("enumeration cap exceeded");
  const detail::CompactText text(h);
  std::vector<std::size_t> free_cuts;
  for (std::size_t p = 1; p < text.size(); ++p)
    if (!text.forced[p]) free_cuts.push_back(p);
  std::vector<Segmentation> out;
  const std::size_t total = std::size_t{1} << free_cuts.size();
  out.reserve(total);
  for (std::size_t mask = 0; mask < total; ++mask) {
    std::vector<bool> cut(text.size() + 1, false);
    for (std::size_t b = 0; b < free_cuts.size(); ++b)
      if (mask & (std::size_t{1} << b)) cut[free_cuts[b]] = true;
    std::vector<Span> spans;
    std::size_t start = 0;
    for (std::size_t p = 1; p <= text.size(); ++p) {
      if (p == text.size() || cut[p] || text.forced[p]) {
        spans.push_back(text.raw_span(start, p));
        start = p;
      }
    }
    out.push_back(Segmentation::from_spans(h, std::move(spans)));
  }
  return out;
}

struct BeamOptions {
  std::size_t k = kDefaultTopK;
  std::size_t beam_width = kDefaultBeamWidth;
  std::size_t max_word_length = 0;  // 0 = unlimited
};

namespace detail {

struct Hypothesis {
  double score = 0.0;
  std::vector<std::size_t> cuts;      // compact word end positions
  std::vector<lm::WordId> context;    // last order-1 word ids
  std::vector<std::string_view> words;
};

inline bool hyp_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.words.size() != b.words.size()) return a.words.size() < b.words.size();
  return std::lexicographical_compare(a.words.begin(), a.words.end(), b.words.begin(), b.words.end());
}

}  // namespace detail

/// Top-k segmentations by Score^LM. At each end position only the
/// beam_width best partial hypotheses survive; with beam_width >= 2^(r-1)
/// nothing is pruned and the result equals exhaustive ranking.
inline CandidateSet top_k_candidates(const Hashtag& h, const lm::NGramModel& model,
                                     const BeamOptions& opts = {}) {
  if (opts.k < 1) throw Error("k must be at least 1");
  if (opts.beam_width < opts.k) throw Error("beam width must be at least k");
  const detail::CompactText text(h);
  const std::size_t n = text.size();

  std::vector<std::vector<lm::WordId>> word_id(n);
  for (std::size_t i = 0; i < n; ++i) {
    word_id[i].assign(n + 1, model.unk_id());
    for (std::size_t j = i + 1; j <= n; ++j)
      word_id[i][j] = model.id(std::string_view(text.chars).substr(i, j - i));
  }

  const std::string_view chars(text.chars);
  std::vector<std::vector<detail::Hypothesis>> beams(n + 1);
  beams[0].push_back({0.0, {}, model.start_context(), {}});

  for (std::size_t j = 1; j <= n; ++j) {
    std::vector<detail::Hypothesis> next;
    std::size_t lo = 0;
    if (opts.max_word_length > 0 && j > opts.max_word_length) lo = j - opts.max_word_length;
    for (std::size_t i = j; i-- > lo;) {
      if (!text.word_allowed(i, j)) break;
      const lm::WordId wid = word_id[i][j];
      for (const auto& hyp : beams[i]) {
        detail::Hypothesis ext;
        ext.score = hyp.score + model.log_prob(wid, hyp.context);
        ext.cuts = hyp.cuts;
        ext.cuts.push_back(j);
        ext.context = hyp.context;
        if (!ext.context.empty()) {
          std::rotate(ext.context.begin(), ext.context.begin() + 1, ext.context.end());
          ext.context.back() = wid;
        }
        ext.words = hyp.words;
        ext.words.push_back(chars.substr(i, j - i));
        next.push_back(std::move(ext));
      }
    }
    const std::size_t keep = std::min(opts.beam_width, next.size());
    std::partial_sort(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(keep), next.end(),
                      detail::hyp_before);
    next.resize(keep);
    beams[j] = std::move(next);
  }

  CandidateSet out;
  out.hashtag = h;
  out.k = opts.k;
  const auto& finals = beams[n];
  for (std::size_t r = 0; r < finals.size() && r < opts.k; ++r) {
    std::vector<Span> spans;
    std::size_t start = 0;
    for (std::size_t cut : finals[r].cuts) {
      spans.push_back(text.raw_span(start, cut));
      start = cut;
    }
    out.candidates.push_back({Segmentation::from_spans(h, std::move(spans)), finals[r].score});
  }
  return out;
}

inline CandidateSet top_k_candidates(const Hashtag& h, const lm::NGramModel& model, std::size_t k,
                                     std::size_t beam_width) {
  BeamOptions opts;
  opts.k = k;
  opts.beam_width = beam_width;
  return top_k_candidates(h, model, opts);
}

}  // namespace hashseg
