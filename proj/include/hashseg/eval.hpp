#pragma once

// A@k, span-based token F1, MRR and dataset reports split into single-
// and multi-token hashtags.

#include <algorithm>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hashseg/supervision.hpp"

namespace hashseg {

/// 1 if any of the first k outputs equals a gold, else 0.
inline int accuracy_at_k(const std::vector<Segmentation>& ranked, const GoldEntry& entry, std::size_t k) {
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i)
    if (entry.is_gold(ranked[i])) return 1;
  return 0;
}

/// Tokens are character spans; F1 against each gold, best one returned.
inline double token_f1(const Segmentation& pred, const GoldEntry& entry) {
  double best = 0.0;
  for (const auto& g : entry.golds()) {
    const auto& gs = g.spans();
    std::size_t match = 0;
    for (const auto& s : pred.spans())
      if (std::binary_search(gs.begin(), gs.end(), s)) ++match;
    if (match == 0) continue;
    const double p = static_cast<double>(match) / static_cast<double>(pred.size());
    const double r = static_cast<double>(match) / static_cast<double>(g.size());
    best = std::max(best, 2 * p * r / (p + r));
  }
  return best;
}

/// 1/rank of the first gold in the list; 0 when no gold is listed.
inline double reciprocal_rank(const std::vector<Segmentation>& ranked, const GoldEntry& entry) {
  for (std::size_t i = 0; i < ranked.size(); ++i)
    if (entry.is_gold(ranked[i])) return 1.0 / static_cast<double>(i + 1);
  return 0.0;
}

struct SubsetMetrics {
  double a1 = 0.0;
  double a2 = 0.0;
  double f1 = 0.0;
  double mrr = 0.0;
  std::size_t n = 0;

  nlohmann::json to_json() const { return {{"a1", a1}, {"a2", a2}, {"f1", f1}, {"mrr", mrr}, {"n", n}}; }
};

struct EvalReport {
  SubsetMetrics overall;
  SubsetMetrics multi_token;
  SubsetMetrics single_token;

  nlohmann::json to_json() const {
    return {{"overall", overall.to_json()},
            {"multi_token", multi_token.to_json()},
            {"single_token", single_token.to_json()}};
  }
};

/// Macro-averaged metrics. outputs maps the hashtag (without '#') to its
/// ranked list; every entry must have a non-empty list.
inline EvalReport evaluate_dataset(const std::unordered_map<std::string, std::vector<Segmentation>>& outputs,
                                   const std::vector<GoldEntry>& entries) {
  std::vector<std::string> missing;
  for (const auto& e : entries) {
    const auto it = outputs.find(e.hashtag().raw());
    if (it == outputs.end() || it->second.empty()) missing.push_back(e.hashtag().raw());
  }
  if (!missing.empty()) throw Error("no system output for hashtag(s): " + join(missing, ", "));

  EvalReport r;
  const auto add = [](SubsetMetrics& m, double a1, double a2, double f1, double rr) {
    m.a1 += a1;
    m.a2 += a2;
    m.f1 += f1;
    m.mrr += rr;
    ++m.n;
  };
  for (const auto& e : entries) {
    const auto& ranked = outputs.at(e.hashtag().raw());
    const double a1 = accuracy_at_k(ranked, e, 1);
    const double a2 = accuracy_at_k(ranked, e, 2);
    const double f1 = token_f1(ranked.front(), e);
    const double rr = reciprocal_rank(ranked, e);
    add(r.overall, a1, a2, f1, rr);
    add(e.is_multiword() ? r.multi_token : r.single_token, a1, a2, f1, rr);
  }
  for (auto* m : {&r.overall, &r.multi_token, &r.single_token}) {
    if (m->n == 0) continue;
    const double n = static_cast<double>(m->n);
    m->a1 /= n;
    m->a2 /= n;
    m->f1 /= n;
    m->mrr /= n;
  }
  return r;
}

}  // namespace hashseg
