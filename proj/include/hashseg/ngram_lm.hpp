#pragma once

// N-gram counting, Good-Turing (Katz backoff) and interpolated modified
// Kneser-Ney smoothing, ARPA serialization and Score^LM.
//
// Both smoothings are stored in backoff form: every seen n-gram keeps its
// final conditional log-probability and every seen context keeps a log
// backoff weight, so
//
//   log P(w | h) = log p(h w)                 if h w is stored
//                = log bow(h) + log P(w | h')  otherwise
//
// where h' drops the oldest token of h. For interpolated Kneser-Ney the
// backoff weight is the interpolation weight gamma(h), which makes the
// backoff form exact. All logarithms are natural.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hashseg/segmentation.hpp"
#include "hashseg/text.hpp"

namespace hashseg::lm {

inline const std::string kBos = "<s>";
inline const std::string kEos = "</s>";
inline const std::string kUnk = "<unk>";
inline constexpr std::size_t kMaxOrder = 6;
// Stored in the ARPA file for context-only entries (n-grams ending in <s>).
inline constexpr double kNoProb = -99.0;

using Sentence = std::vector<std::string>;
using Ngram = std::vector<std::string>;
using CountMap = std::map<Ngram, std::uint64_t>;
using CountOfCounts = std::map<std::uint64_t, std::uint64_t>;

inline CountOfCounts count_of_counts_of(const CountMap& counts) {
  CountOfCounts out;
  for (const auto& [g, c] : counts)
    if (c > 0) ++out[c];
  return out;
}

struct NGramCounts {
  std::size_t order = 0;
  std::vector<CountMap> ngrams;                 // ngrams[n - 1] holds order-n counts
  std::vector<CountOfCounts> count_of_counts;   // count_of_counts[n - 1][r] = N_r
  std::uint64_t total_tokens = 0;               // sum of unigram counts

  std::uint64_t count(const Ngram& g) const {
    if (g.empty() || g.size() > order) return 0;
    const auto& m = ngrams[g.size() - 1];
    const auto it = m.find(g);
    return it == m.end() ? 0 : it->second;
  }

  void recompute_count_of_counts() {
    count_of_counts.clear();
    for (const auto& m : ngrams) count_of_counts.push_back(count_of_counts_of(m));
  }
};

/// Counts all n-grams of order 1..order. For order >= 2 every sentence is
/// padded with order-1 start markers and one end marker.
inline NGramCounts count_ngrams(const std::vector<Sentence>& corpus, std::size_t order) {
  if (order < 1 || order > kMaxOrder)
    throw Error("n-gram order must be in [1, " + std::to_string(kMaxOrder) + "]");
  NGramCounts out;
  out.order = order;
  out.ngrams.resize(order);
  std::vector<std::string> padded;
  bool any = false;
  for (const auto& sentence : corpus) {
    if (sentence.empty()) continue;
    padded.clear();
    if (order >= 2) padded.insert(padded.end(), order - 1, kBos);
    for (const auto& tok : sentence) {
      if (tok.empty()) throw Error("corpus contains an empty token");
      padded.push_back(tok);
    }
    if (order >= 2) padded.push_back(kEos);
    any = true;
    for (std::size_t n = 1; n <= order; ++n) {
      for (std::size_t i = 0; i + n <= padded.size(); ++i)
        ++out.ngrams[n - 1][Ngram(padded.begin() + i, padded.begin() + i + n)];
    }
  }
  if (!any) throw Error("empty corpus");
  for (const auto& [g, c] : out.ngrams[0]) out.total_tokens += c;
  out.recompute_count_of_counts();
  return out;
}

/// Reads one sentence per line, normalized with tokenize_training_line.
inline std::vector<Sentence> read_corpus(std::istream& in) {
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    auto toks = tokenize_training_line(line);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

/// Number of distinct left extensions x with c(x g) > 0, for every order-n
/// n-gram g (read from the order n+1 table).
inline CountMap continuation_counts(const NGramCounts& counts, std::size_t n) {
  if (n < 1 || n >= counts.order) throw Error("continuation counts need a higher order table");
  CountMap out;
  for (const auto& [g, c] : counts.ngrams[n]) {
    if (c == 0) continue;
    ++out[Ngram(g.begin() + 1, g.end())];
  }
  return out;
}

/// Good-Turing adjusted count r* = (r+1) N_{r+1} / N_r for r below the
/// switch threshold; raw r above it or when N_r or N_{r+1} is zero.
inline double good_turing_adjusted_count(std::uint64_t r, const CountOfCounts& cofc,
                                         std::uint64_t switch_threshold = 5) {
  if (r == 0 || r >= switch_threshold) return static_cast<double>(r);
  const auto nr = cofc.find(r);
  const auto nr1 = cofc.find(r + 1);
  if (nr == cofc.end() || nr1 == cofc.end() || nr->second == 0 || nr1->second == 0)
    return static_cast<double>(r);
  return static_cast<double>(r + 1) * static_cast<double>(nr1->second) /
         static_cast<double>(nr->second);
}

using WordId = std::uint32_t;

enum class Smoothing { GoodTuring, ModifiedKneserNey, Unspecified };

inline std::string_view smoothing_name(Smoothing s) {
  switch (s) {
    case Smoothing::GoodTuring: return "gt";
    case Smoothing::ModifiedKneserNey: return "kn";
    default: return "unspecified";
  }
}

inline Smoothing parse_smoothing(std::string_view s) {
  if (s == "gt" || s == "good-turing") return Smoothing::GoodTuring;
  if (s == "kn" || s == "modified-kneser-ney") return Smoothing::ModifiedKneserNey;
  throw Error("unknown smoothing '" + std::string(s) + "' (expected gt or kn)");
}

struct NgramKey {
  std::array<WordId, kMaxOrder> ids{};
  std::uint32_t len = 0;

  bool operator==(const NgramKey& o) const {
    return len == o.len && std::equal(ids.begin(), ids.begin() + len, o.ids.begin());
  }
};

struct NgramKeyHash {
  std::size_t operator()(const NgramKey& k) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ k.len;
    for (std::uint32_t i = 0; i < k.len; ++i) {
      h ^= k.ids[i] + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

struct NgramEntry {
  double log_prob = kNoProb;
  double log_backoff = 0.0;
  bool has_prob = false;
};

namespace detail {
class ModelBuilder;
}

/// Smoothed n-gram model over a fixed vocabulary. Immutable after
/// construction; const queries are safe from multiple threads.
class NGramModel {
 public:
  NGramModel() = default;

  std::size_t order() const { return order_; }
  Smoothing smoothing() const { return smoothing_; }

  /// Token -> id. Unknown tokens map to the unknown id.
  WordId id(std::string_view w) const {
    const auto it = index_.find(std::string(w));
    return it == index_.end() ? unk_id() : it->second;
  }
  WordId unk_id() const { return 0; }
  std::optional<WordId> bos_id() const {
    const auto it = index_.find(kBos);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& word(WordId id) const { return vocab_.at(id); }
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  bool in_vocabulary(std::string_view w) const { return index_.count(std::string(w)) > 0; }

  /// Ids that carry probability mass: every vocabulary entry except the
  /// start marker, including the unknown token.
  std::vector<WordId> predictable_words() const {
    std::vector<WordId> out;
    for (WordId i = 0; i < vocab_.size(); ++i)
      if (predictable_[i]) out.push_back(i);
    return out;
  }

  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t num_entries(std::size_t n) const {
    return n >= 1 && n <= counts_per_order_.size() ? counts_per_order_[n - 1] : 0;
  }

  /// log P(word | context). Contexts longer than order-1 keep their
  /// rightmost tokens. Total: out-of-vocabulary words score as <unk>.
  double log_prob(WordId word, std::span<const WordId> context) const {
    if (word >= vocab_.size() || !predictable_[word]) word = unk_id();
    const std::size_t len = std::min(context.size(), order_ == 0 ? 0 : order_ - 1);
    context = context.last(len);
    double acc = 0.0;
    for (std::size_t l = len + 1; l-- > 0;) {
      NgramKey key;
      key.len = static_cast<std::uint32_t>(l + 1);
      std::copy(context.end() - static_cast<std::ptrdiff_t>(l), context.end(), key.ids.begin());
      key.ids[l] = word;
      const auto it = entries_.find(key);
      if (it != entries_.end() && it->second.has_prob) return acc + it->second.log_prob;
      if (l == 0) break;
      key.len = static_cast<std::uint32_t>(l);
      std::copy(context.end() - static_cast<std::ptrdiff_t>(l), context.end(), key.ids.begin());
      const auto ctx = entries_.find(key);
      if (ctx != entries_.end()) acc += ctx->second.log_backoff;
    }
    // Only reachable for models read from files without an <unk> entry.
    return acc + unk_floor_;
  }

  double log_prob(std::string_view word, const std::vector<std::string>& context) const {
    std::vector<WordId> ids;
    ids.reserve(context.size());
    for (const auto& c : context) ids.push_back(id(c));
    return log_prob(id(word), ids);
  }

  const NgramEntry* find(const std::vector<WordId>& ids) const {
    if (ids.empty() || ids.size() > kMaxOrder) return nullptr;
    NgramKey key;
    key.len = static_cast<std::uint32_t>(ids.size());
    std::copy(ids.begin(), ids.end(), key.ids.begin());
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  /// Context of order-1 start markers used to score a sentence from its
  /// beginning (empty for unigram models).
  std::vector<WordId> start_context() const {
    if (order_ <= 1) return {};
    const auto bos = bos_id();
    return std::vector<WordId>(order_ - 1, bos ? *bos : unk_id());
  }

  void write_arpa(std::ostream& out) const;
  static NGramModel read_arpa(std::istream& in);

 private:
  friend class detail::ModelBuilder;

  std::size_t order_ = 0;
  Smoothing smoothing_ = Smoothing::Unspecified;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, WordId> index_;
  std::vector<bool> predictable_;
  std::unordered_map<NgramKey, NgramEntry, NgramKeyHash> entries_;
  std::vector<std::size_t> counts_per_order_;
  std::vector<std::string> warnings_;
  double unk_floor_ = std::log(1e-9);
};

namespace detail {

class ModelBuilder {
 public:
  ModelBuilder(std::size_t order, Smoothing smoothing) {
    if (order < 1 || order > kMaxOrder) throw Error("unsupported n-gram order");
    m_.order_ = order;
    m_.smoothing_ = smoothing;
    m_.counts_per_order_.assign(order, 0);
  }

  /// Vocabulary: <unk> first, then the given tokens sorted bytewise.
  void set_vocabulary(std::vector<std::string> tokens) {
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    m_.vocab_.clear();
    m_.index_.clear();
    m_.vocab_.push_back(kUnk);
    for (auto& t : tokens)
      if (t != kUnk) m_.vocab_.push_back(std::move(t));
    for (WordId i = 0; i < m_.vocab_.size(); ++i) m_.index_[m_.vocab_[i]] = i;
    m_.predictable_.assign(m_.vocab_.size(), false);
  }

  NGramModel& model() { return m_; }

  std::vector<WordId> ids(const Ngram& g) const {
    std::vector<WordId> out;
    out.reserve(g.size());
    for (const auto& t : g) out.push_back(m_.id(t));
    return out;
  }

  static NgramKey key(std::span<const WordId> ids) {
    NgramKey k;
    k.len = static_cast<std::uint32_t>(ids.size());
    std::copy(ids.begin(), ids.end(), k.ids.begin());
    return k;
  }

  void set_prob(std::span<const WordId> ids, double log_prob) {
    auto [it, inserted] = m_.entries_.try_emplace(key(ids));
    if (inserted) ++m_.counts_per_order_[ids.size() - 1];
    it->second.log_prob = log_prob;
    it->second.has_prob = true;
    if (ids.size() == 1) m_.predictable_[ids[0]] = true;
  }

  /// Sets the backoff weight of a context, creating a context-only entry
  /// when the context itself carries no probability.
  void set_backoff(std::span<const WordId> ids, double log_backoff) {
    auto [it, inserted] = m_.entries_.try_emplace(key(ids));
    if (inserted) ++m_.counts_per_order_[ids.size() - 1];
    it->second.log_backoff = log_backoff;
  }

  void warn(std::string msg) { m_.warnings_.push_back(std::move(msg)); }
  void set_unk_floor(double v) { m_.unk_floor_ = v; }

  NGramModel build() { return std::move(m_); }

 private:
  NGramModel m_;
};

inline bool ends_with_bos(const Ngram& g) { return !g.empty() && g.back() == kBos; }

inline std::vector<std::string> vocabulary_of(const NGramCounts& counts) {
  std::vector<std::string> out;
  for (const auto& [g, c] : counts.ngrams[0]) out.push_back(g[0]);
  return out;
}

// Groups the predicted n-grams of one order by context.
struct ContextGroup {
  std::vector<WordId> context;
  std::vector<std::pair<WordId, double>> words;  // (word, count)
  double total = 0.0;
};

inline std::vector<ContextGroup> group_by_context(const ModelBuilder& b, const CountMap& counts) {
  std::map<std::vector<WordId>, ContextGroup> groups;
  for (const auto& [g, c] : counts) {
    if (c == 0 || ends_with_bos(g)) continue;
    auto ids = b.ids(g);
    std::vector<WordId> ctx(ids.begin(), ids.end() - 1);
    auto& grp = groups[ctx];
    grp.context = ctx;
    grp.words.emplace_back(ids.back(), static_cast<double>(c));
    grp.total += static_cast<double>(c);
  }
  std::vector<ContextGroup> out;
  out.reserve(groups.size());
  for (auto& [k, v] : groups) out.push_back(std::move(v));
  return out;
}

inline CountOfCounts predicted_count_of_counts(const CountMap& counts) {
  CountOfCounts out;
  for (const auto& [g, c] : counts)
    if (c > 0 && !ends_with_bos(g)) ++out[c];
  return out;
}

}  // namespace detail

struct GoodTuringOptions {
  std::uint64_t switch_threshold = 5;
  // Unseen mass is never allowed below this, so <unk> stays finite.
  double min_unseen_mass = 1e-9;
};

/// Katz backoff with Good-Turing discounted counts.
inline NGramModel fit_good_turing(const NGramCounts& counts, std::size_t order,
                                  const GoodTuringOptions& opts = {}) {
  if (counts.ngrams.empty() || counts.total_tokens == 0) throw Error("empty counts");
  if (order < 1 || order > counts.order)
    throw Error("requested order exceeds the order of the counts");
  detail::ModelBuilder b(order, Smoothing::GoodTuring);
  b.set_vocabulary(detail::vocabulary_of(counts));

  for (std::size_t n = 1; n <= order; ++n) {
    const CountMap& table = counts.ngrams[n - 1];
    const CountOfCounts cofc = detail::predicted_count_of_counts(table);
    const NGramModel& partial = b.model();
    for (const auto& grp : detail::group_by_context(b, table)) {
      std::vector<std::pair<WordId, double>> probs;
      double seen = 0.0;
      for (const auto& [w, c] : grp.words) {
        const double adj = good_turing_adjusted_count(static_cast<std::uint64_t>(c), cofc,
                                                      opts.switch_threshold);
        probs.emplace_back(w, adj / grp.total);
        seen += adj / grp.total;
      }
      double unseen = 1.0 - seen;
      if (unseen < opts.min_unseen_mass) {
        const double scale = (1.0 - opts.min_unseen_mass) / seen;
        for (auto& [w, p] : probs) p *= scale;
        unseen = opts.min_unseen_mass;
      }
      if (n == 1) {
        // Leftover unigram mass goes to <unk>, which is never counted.
        for (const auto& [w, p] : probs) {
          const WordId id = w;
          b.set_prob(std::span<const WordId>(&id, 1), std::log(p));
        }
        const WordId unk = b.model().unk_id();
        b.set_prob(std::span<const WordId>(&unk, 1), std::log(unseen));
        continue;
      }
      std::vector<WordId> ids = grp.context;
      ids.push_back(0);
      double lower_seen = 0.0;
      for (const auto& [w, p] : probs) {
        ids.back() = w;
        b.set_prob(ids, std::log(p));
        lower_seen += std::exp(partial.log_prob(
            w, std::span<const WordId>(grp.context).subspan(1)));
      }
      const double lower_unseen = 1.0 - lower_seen;
      if (lower_unseen <= 0.0) {
        b.warn("good-turing: context at order " + std::to_string(n) +
               " covers all lower-order mass; backoff weight clamped");
        b.set_backoff(grp.context, std::log(unseen / 1e-12));
      } else {
        b.set_backoff(grp.context, std::log(unseen / lower_unseen));
      }
    }
  }
  return b.build();
}

struct KneserNeyDiscounts {
  double d1 = 0.75;
  double d2 = 0.75;
  double d3 = 0.75;  // applied to every count >= 3
  bool fallback = false;

  double operator()(double count) const {
    if (count <= 0) return 0.0;
    if (count < 2) return d1;
    if (count < 3) return d2;
    return d3;
  }
};

/// Chen & Goodman discount estimates from the count-of-counts of one order.
/// Falls back to a fixed 0.75 when N_1 or N_2 is zero or an estimate lands
/// outside (0, r).
inline KneserNeyDiscounts estimate_kn_discounts(const CountOfCounts& cofc) {
  auto n = [&](std::uint64_t r) {
    const auto it = cofc.find(r);
    return it == cofc.end() ? 0.0 : static_cast<double>(it->second);
  };
  const double n1 = n(1), n2 = n(2), n3 = n(3), n4 = n(4);
  KneserNeyDiscounts d;
  if (n1 == 0 || n2 == 0) {
    d.fallback = true;
    return d;
  }
  const double y = n1 / (n1 + 2.0 * n2);
  d.d1 = 1.0 - 2.0 * y * n2 / n1;
  d.d2 = 2.0 - 3.0 * y * n3 / n2;
  d.d3 = n3 > 0 ? 3.0 - 4.0 * y * n4 / n3 : 3.0;
  const bool ok = d.d1 > 0 && d.d1 < 1 && d.d2 > 0 && d.d2 < 2 && d.d3 > 0 && d.d3 < 3;
  if (!ok) return KneserNeyDiscounts{0.75, 0.75, 0.75, true};
  return d;
}

/// Adjusted counts used by interpolated Kneser-Ney at order n: raw counts
/// at the highest order and for n-grams starting with <s>, continuation
/// counts otherwise.
inline CountMap kneser_ney_adjusted_counts(const NGramCounts& counts, std::size_t n,
                                           std::size_t model_order) {
  const CountMap& raw = counts.ngrams[n - 1];
  if (n == model_order) return raw;
  CountMap cont = continuation_counts(counts, n);
  CountMap out;
  for (const auto& [g, c] : raw) {
    if (c == 0) continue;
    if (g.front() == kBos) {
      out[g] = c;
    } else {
      const auto it = cont.find(g);
      if (it != cont.end()) out[g] = it->second;
    }
  }
  return out;
}

/// Interpolated modified Kneser-Ney. The unigram level interpolates with
/// the uniform distribution over the predictable vocabulary, which is
/// where <unk> gets its mass.
inline NGramModel fit_kneser_ney(const NGramCounts& counts, std::size_t order) {
  if (counts.ngrams.empty() || counts.total_tokens == 0) throw Error("empty counts");
  if (order < 1 || order > counts.order)
    throw Error("requested order exceeds the order of the counts");
  detail::ModelBuilder b(order, Smoothing::ModifiedKneserNey);
  b.set_vocabulary(detail::vocabulary_of(counts));

  for (std::size_t n = 1; n <= order; ++n) {
    const CountMap adjusted = kneser_ney_adjusted_counts(counts, n, order);
    const KneserNeyDiscounts disc = estimate_kn_discounts(detail::predicted_count_of_counts(adjusted));
    if (disc.fallback)
      b.warn("kneser-ney: degenerate count-of-counts at order " + std::to_string(n) +
             "; using fixed discount 0.75");
    const NGramModel& partial = b.model();

    if (n == 1) {
      const auto groups = detail::group_by_context(b, adjusted);
      if (groups.empty()) throw Error("kneser-ney: no unigram counts");
      const auto& grp = groups.front();
      std::map<WordId, double> seen(grp.words.begin(), grp.words.end());
      // Predictable vocabulary: every token except <s>; includes <unk>.
      std::vector<WordId> predictable;
      for (WordId i = 0; i < partial.vocab_size(); ++i)
        if (partial.word(i) != kBos) predictable.push_back(i);
      double gamma = 0.0;
      for (const auto& [w, c] : grp.words) gamma += disc(c);
      gamma /= grp.total;
      const double uniform = gamma / static_cast<double>(predictable.size());
      for (const WordId w : predictable) {
        const auto it = seen.find(w);
        const double c = it == seen.end() ? 0.0 : it->second;
        const double p = std::max(c - disc(c), 0.0) / grp.total + uniform;
        b.set_prob(std::span<const WordId>(&w, 1), std::log(p));
      }
      continue;
    }

    for (const auto& grp : detail::group_by_context(b, adjusted)) {
      double gamma = 0.0;
      for (const auto& [w, c] : grp.words) gamma += disc(c);
      gamma /= grp.total;
      std::vector<WordId> ids = grp.context;
      ids.push_back(0);
      const auto lower_ctx = std::span<const WordId>(grp.context).subspan(1);
      for (const auto& [w, c] : grp.words) {
        const double lower = std::exp(partial.log_prob(w, lower_ctx));
        const double p = std::max(c - disc(c), 0.0) / grp.total + gamma * lower;
        ids.back() = w;
        b.set_prob(ids, std::log(p));
      }
      b.set_backoff(grp.context, std::log(gamma));
    }
  }
  return b.build();
}

inline NGramModel fit(const NGramCounts& counts, std::size_t order, Smoothing s) {
  switch (s) {
    case Smoothing::GoodTuring: return fit_good_turing(counts, order);
    case Smoothing::ModifiedKneserNey: return fit_kneser_ney(counts, order);
    default: throw Error("cannot fit an unspecified smoothing");
  }
}

/// Score^LM: sum of log P(w_i | preceding order-1 words), start padded.
/// Words are looked up as given (the vocabulary is lowercase).
inline double score_words(const NGramModel& model, std::span<const std::string> words) {
  if (words.empty()) throw Error("cannot score an empty segmentation");
  std::vector<WordId> ctx = model.start_context();
  double total = 0.0;
  for (const auto& w : words) {
    const WordId id = model.id(w);
    total += model.log_prob(id, ctx);
    if (!ctx.empty()) {
      std::rotate(ctx.begin(), ctx.begin() + 1, ctx.end());
      ctx.back() = id;
    }
  }
  return total;
}

inline double score_segmentation(const NGramModel& model, const Segmentation& seg) {
  return score_words(model, seg.folded_words());
}

// ---------------------------------------------------------------------------
// ARPA text format. A comment header before \data\ records the log base and
// smoothing; files without it are read as standard base-10 ARPA.

inline void NGramModel::write_arpa(std::ostream& out) const {
  std::vector<std::vector<std::pair<std::vector<std::string>, const NgramEntry*>>> rows(order_);
  for (const auto& [k, e] : entries_) {
    std::vector<std::string> toks;
    for (std::uint32_t i = 0; i < k.len; ++i) toks.push_back(vocab_[k.ids[i]]);
    rows[k.len - 1].emplace_back(std::move(toks), &e);
  }
  out << "# hashseg n-gram model\n";
  out << "# log_base=e\n";
  out << "# smoothing=" << smoothing_name(smoothing_) << "\n";
  out << "\n\\data\\\n";
  for (std::size_t n = 1; n <= order_; ++n) out << "ngram " << n << "=" << rows[n - 1].size() << "\n";
  for (std::size_t n = 1; n <= order_; ++n) {
    auto& r = rows[n - 1];
    std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    out << "\n\\" << n << "-grams:\n";
    for (const auto& [toks, e] : r) {
      out << format_double(e->has_prob ? e->log_prob : kNoProb) << '\t' << join(toks, " ");
      if (n < order_) out << '\t' << format_double(e->log_backoff);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

inline NGramModel NGramModel::read_arpa(std::istream& in) {
  std::string line;
  double scale = std::log(10.0);
  Smoothing smoothing = Smoothing::Unspecified;
  std::vector<std::size_t> declared;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw Error("ARPA line " + std::to_string(line_no) + ": " + msg);
  };
  auto next = [&]() {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };

  bool found_data = false;
  while (next()) {
    const auto t = trim(line);
    if (t.starts_with("#")) {
      const auto body = trim(t.substr(1));
      if (body.starts_with("log_base=")) {
        const auto base = body.substr(9);
        if (base == "e") scale = 1.0;
        else if (base == "10") scale = std::log(10.0);
        else fail("unsupported log base '" + std::string(base) + "'");
      } else if (body.starts_with("smoothing=")) {
        const auto s = body.substr(10);
        smoothing = (s == "unspecified") ? Smoothing::Unspecified : parse_smoothing(s);
      }
    } else if (t == "\\data\\") {
      found_data = true;
      break;
    }
  }
  if (!found_data) throw Error("ARPA: missing \\data\\ section");

  bool in_sections = false;
  while (next()) {
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.starts_with("\\")) {
      in_sections = true;
      break;
    }
    if (!t.starts_with("ngram ")) fail("expected 'ngram N=count'");
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) fail("expected 'ngram N=count'");
    const auto n = parse_uint(t.substr(6, eq - 6));
    if (n != declared.size() + 1) fail("n-gram orders must be listed in sequence");
    declared.push_back(parse_uint(t.substr(eq + 1)));
  }
  if (declared.empty() || declared.size() > kMaxOrder || !in_sections)
    throw Error("ARPA: bad or missing n-gram counts");

  struct Row {
    std::vector<std::string> toks;
    double log_prob = 0.0;
    std::optional<double> backoff;
  };
  std::vector<std::vector<Row>> rows(declared.size());
  std::size_t current = 0;
  bool ended = false;
  do {
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t == "\\end\\") {
      ended = true;
      break;
    }
    if (t.starts_with("\\")) {
      if (!t.ends_with("-grams:")) fail("unexpected section '" + std::string(t) + "'");
      current = parse_uint(t.substr(1, t.size() - 1 - 7));
      if (current < 1 || current > declared.size()) fail("unexpected section");
      continue;
    }
    if (current == 0) fail("n-gram line outside a section");
    Row row;
    if (t.find('\t') != std::string_view::npos) {
      const auto fields = split(t, "\t");
      if (fields.size() < 2) fail("missing n-gram");
      row.log_prob = parse_double(fields[0]);
      row.toks = split_whitespace(fields[1]);
      if (fields.size() >= 3 && !trim(fields[2]).empty()) row.backoff = parse_double(fields[2]);
    } else {
      const auto fields = split_whitespace(t);
      if (fields.size() < current + 1) fail("missing n-gram tokens");
      row.log_prob = parse_double(fields[0]);
      row.toks.assign(fields.begin() + 1, fields.begin() + 1 + static_cast<std::ptrdiff_t>(current));
      if (fields.size() > current + 1) row.backoff = parse_double(fields[current + 1]);
    }
    if (row.toks.size() != current) fail("n-gram has the wrong number of tokens");
    rows[current - 1].push_back(std::move(row));
  } while (next());
  if (!ended) throw Error("ARPA: missing \\end\\ marker");

  for (std::size_t n = 0; n < declared.size(); ++n)
    if (rows[n].size() != declared[n])
      throw Error("ARPA: order " + std::to_string(n + 1) + " declares " + std::to_string(declared[n]) +
                  " entries but has " + std::to_string(rows[n].size()));

  detail::ModelBuilder b(declared.size(), smoothing);
  std::vector<std::string> vocab;
  for (const auto& r : rows[0]) vocab.push_back(r.toks[0]);
  b.set_vocabulary(vocab);
  bool has_unk = false;
  for (const auto& order_rows : rows) {
    for (const auto& r : order_rows) {
      const auto ids = b.ids(r.toks);
      if (r.toks.back() != kBos) {
        b.set_prob(ids, r.log_prob * scale);
        if (r.toks.size() == 1 && r.toks[0] == kUnk) has_unk = true;
      } else {
        b.set_backoff(ids, 0.0);
      }
      if (r.backoff) b.set_backoff(ids, *r.backoff * scale);
    }
  }
  if (!has_unk) b.warn("model has no <unk> entry; unknown words use a fixed floor");
  return b.build();
}

}  // namespace hashseg::lm
