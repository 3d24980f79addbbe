#pragma once

// Gold scoring of candidate segmentations against ground truth.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "hashseg/segmentation.hpp"

namespace hashseg {

/// A hashtag with one or two accepted segmentations.
class GoldEntry {
 public:
  GoldEntry(Hashtag hashtag, std::vector<Segmentation> golds) : hashtag_(std::move(hashtag)), golds_(std::move(golds)) {
    if (golds_.empty()) throw Error("gold entry for '" + hashtag_.raw() + "' has no segmentation");
    for (const auto& g : golds_) {
      bool ok = true;
      try {
        ok = Segmentation::from_spans(hashtag_, g.spans()).same_words(g);
      } catch (const Error&) {
        ok = false;
      }
      if (!ok) throw Error("gold segmentation does not reconstruct hashtag '" + hashtag_.raw() + "'");
    }
  }

  /// Builds golds from whitespace-separated word strings.
  static GoldEntry from_texts(const Hashtag& h, const std::vector<std::string>& texts) {
    std::vector<Segmentation> golds;
    for (const auto& t : texts) golds.push_back(Segmentation::from_text(h, t));
    return GoldEntry(h, std::move(golds));
  }

  const Hashtag& hashtag() const { return hashtag_; }
  const std::vector<Segmentation>& golds() const { return golds_; }

  bool is_multiword() const {
    return std::any_of(golds_.begin(), golds_.end(), [](const Segmentation& g) { return g.size() >= 2; });
  }

  bool is_gold(const Segmentation& s) const {
    return std::any_of(golds_.begin(), golds_.end(), [&](const Segmentation& g) { return g.same_words(s); });
  }

 private:
  Hashtag hashtag_;
  std::vector<Segmentation> golds_;
};

/// Minimum number of single-character insertions, deletions and
/// substitutions turning a into b.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

/// sim(s, s*) = max over golds of -levenshtein on space-joined words.
inline double similarity(const Segmentation& seg, const GoldEntry& entry) {
  const std::string s = seg.folded_text();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& g : entry.golds())
    best = std::max(best, -static_cast<double>(levenshtein(s, g.folded_text())));
  return best;
}

/// g*(sa, sb) = sim(sa) - sim(sb).
inline double gold_pair_score(const Segmentation& sa, const Segmentation& sb, const GoldEntry& entry) {
  return similarity(sa, entry) - similarity(sb, entry);
}

}  // namespace hashseg
