#pragma once

// From pairwise model outputs to a ranked list, and the end-to-end
// segmentation pipeline.

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "hashseg/candidate_gen.hpp"
#include "hashseg/features.hpp"
#include "hashseg/ranker.hpp"
#include "hashseg/supervision.hpp"

namespace hashseg {

/// Greedy extraction: repeatedly take the remaining candidate with the
/// largest Score^PNR(s) = sum over other remaining s_j of g(s, s_j).
/// Equal scores go to the lower index. g is evaluated once per ordered
/// pair.
inline std::vector<std::size_t> aggregate_pairwise_order(std::size_t n,
                                                         const std::function<double(std::size_t, std::size_t)>& g) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) m[i][j] = g(i, j);
  std::vector<std::size_t> remaining(n);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = i;
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!remaining.empty()) {
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t r = 0; r < remaining.size(); ++r) {
      double s = 0.0;
      for (std::size_t j : remaining) s += m[remaining[r]][j];
      if (r == 0 || s > best_score) {
        best = r;
        best_score = s;
      }
    }
    order.push_back(remaining[best]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return order;
}

inline std::vector<Segmentation> aggregate_pairwise(
    const std::function<double(const Segmentation&, const Segmentation&)>& score_fn, const CandidateSet& set) {
  const auto order = aggregate_pairwise_order(set.size(), [&](std::size_t i, std::size_t j) {
    return score_fn(set.candidates[i].segmentation, set.candidates[j].segmentation);
  });
  std::vector<Segmentation> out;
  for (std::size_t i : order) out.push_back(set.candidates[i].segmentation);
  return out;
}

struct CandidateFeatures {
  HashtagFeatures h;
  std::vector<FeatureBundle> s;  // one per candidate, same order
};

/// h uses the generator's top candidate as the Word Breaker best.
inline CandidateFeatures extract_features(const CandidateSet& set, const ResourcePack& res) {
  if (set.candidates.empty()) throw Error("empty candidate set for '" + set.hashtag.raw() + "'");
  CandidateFeatures f;
  f.h = hashtag_features(set.hashtag, res, set.candidates.front().segmentation);
  for (const auto& c : set.candidates) f.s.push_back(segmentation_features(set.hashtag, c.segmentation, res));
  return f;
}

struct RankedSegmentation {
  Segmentation segmentation;
  double score = 0.0;       // Score^PNR at extraction, or g'(s) in the pointwise modes
  std::size_t generator_rank = 0;
};

/// Pairwise modes aggregate g over all pairs; pointwise modes sort by g'
/// (ties keep generator order).
inline std::vector<RankedSegmentation> rank_candidates(const RankerModel& model, RankerMode mode,
                                                       const CandidateSet& set, const CandidateFeatures& feats) {
  model.require_mode(mode);
  if (feats.s.size() != set.size()) throw Error("feature count does not match candidate count");
  std::vector<std::vector<double>> s;
  for (const auto& f : feats.s) s.push_back(model.standardize(f));
  const double w = is_multitask(mode) ? model.gate_value(model.standardize(feats.h)) : 1.0;

  std::vector<RankedSegmentation> out;
  if (is_pairwise(mode)) {
    std::vector<std::vector<double>> g(set.size(), std::vector<double>(set.size(), 0.0));
    const auto order = aggregate_pairwise_order(set.size(), [&](std::size_t i, std::size_t j) {
      return g[i][j] = model.score_std(s[i], s[j], w);
    });
    std::vector<bool> removed(set.size(), false);
    for (std::size_t i : order) {
      double pnr = 0.0;
      for (std::size_t j = 0; j < set.size(); ++j)
        if (j != i && !removed[j]) pnr += g[i][j];
      removed[i] = true;
      out.push_back({set.candidates[i].segmentation, pnr, i});
    }
    return out;
  }
  std::vector<double> score(set.size());
  std::vector<std::size_t> order(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    score[i] = model.score_std(s[i], s[i], w);
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  for (std::size_t i : order) out.push_back({set.candidates[i].segmentation, score[i], i});
  return out;
}

/// parse -> top-k candidates from the generator LM -> features -> rank.
inline std::vector<RankedSegmentation> segment_hashtag(std::string_view raw, const lm::NGramModel& generator,
                                                       const RankerModel& model, const ResourcePack& res,
                                                       const BeamOptions& beam = {}) {
  const Hashtag h = Hashtag::parse(raw);
  const CandidateSet set = top_k_candidates(h, generator, beam);
  return rank_candidates(model, model.mode, set, extract_features(set, res));
}

/// Generator candidates, features and gold pairs for each training entry.
inline std::vector<TrainingGroup> build_training_groups(const std::vector<GoldEntry>& entries,
                                                        const lm::NGramModel& generator, const ResourcePack& res,
                                                        const BeamOptions& beam = {}, bool ordered_pairs = true) {
  std::vector<TrainingGroup> groups;
  groups.reserve(entries.size());
  for (const auto& e : entries) {
    const CandidateSet set = top_k_candidates(e.hashtag(), generator, beam);
    auto f = extract_features(set, res);
    groups.push_back(build_training_pairs(set, e, std::move(f.s), std::move(f.h), ordered_pairs));
  }
  return groups;
}

}  // namespace hashseg
