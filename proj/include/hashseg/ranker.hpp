#pragma once

// Pairwise neural rankers: MSE on a pair network, margin ranking on a
// shared pointwise network, and the multi-task variants that gate the
// GL and KN feature subsets with a single/multi-word classifier.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hashseg/candidate_gen.hpp"
#include "hashseg/features.hpp"
#include "hashseg/mlp.hpp"
#include "hashseg/supervision.hpp"

namespace hashseg {

enum class RankerMode { Mse, Mr, MseMultitask, MrMultitask };

inline std::string_view mode_name(RankerMode m) {
  switch (m) {
    case RankerMode::Mse: return "mse";
    case RankerMode::Mr: return "mr";
    case RankerMode::MseMultitask: return "mse-mt";
    case RankerMode::MrMultitask: return "mr-mt";
  }
  return "";
}

inline RankerMode parse_mode(std::string_view s) {
  for (auto m : {RankerMode::Mse, RankerMode::Mr, RankerMode::MseMultitask, RankerMode::MrMultitask})
    if (mode_name(m) == s) return m;
  throw Error("unknown ranker mode '" + std::string(s) + "' (expected mse, mr, mse-mt or mr-mt)");
}

inline bool is_pairwise(RankerMode m) { return m == RankerMode::Mse || m == RankerMode::MseMultitask; }
inline bool is_multitask(RankerMode m) { return m == RankerMode::MseMultitask || m == RankerMode::MrMultitask; }

inline constexpr std::size_t kHiddenLayers = 3;
inline constexpr std::size_t kHiddenUnits = 8;
inline constexpr std::size_t kGateHiddenUnits = 8;
inline constexpr double kBceEpsilon = 1e-7;

struct TrainConfig {
  RankerMode mode = RankerMode::MseMultitask;
  std::size_t epochs = 100;
  double ranker_lr = 0.01;
  double classifier_lr = 0.05;
  double dropout = 0.5;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  std::size_t k = kDefaultTopK;
  std::uint64_t seed = 1;
  bool ordered_pairs = true;

  void validate() const {
    if (!(lambda1 > 0.0) || lambda2 < 0.0) throw Error("loss weights must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must be in [0, 1)");
    if (!(ranker_lr > 0.0) || !(classifier_lr > 0.0)) throw Error("learning rates must be positive");
  }
};

// ---------------------------------------------------------------------------
// Losses

inline double loss_mse(std::span<const double> pred, std::span<const double> target) {
  if (pred.empty()) throw Error("loss over empty input");
  if (pred.size() != target.size()) throw Error("prediction and target lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - target[i]) * (pred[i] - target[i]);
  return s / static_cast<double>(pred.size());
}

/// Mean of max(0, 1 - l * (score_a - score_b)).
inline double loss_margin(std::span<const double> score_a, std::span<const double> score_b,
                          std::span<const double> labels) {
  if (score_a.empty()) throw Error("loss over empty input");
  if (score_a.size() != score_b.size() || score_a.size() != labels.size())
    throw Error("margin loss inputs have different lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < score_a.size(); ++i) s += std::max(0.0, 1.0 - labels[i] * (score_a[i] - score_b[i]));
  return s / static_cast<double>(score_a.size());
}

inline double clamp_gate(double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw Error("gating value outside (0, 1)");
  return std::clamp(w, kBceEpsilon, 1.0 - kBceEpsilon);
}

inline double loss_bce(std::span<const double> w, std::span<const double> labels) {
  if (w.empty()) throw Error("loss over empty input");
  if (w.size() != labels.size()) throw Error("gate and label lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double c = clamp_gate(w[i]);
    s += labels[i] * std::log(c) + (1.0 - labels[i]) * std::log(1.0 - c);
  }
  return -s / static_cast<double>(w.size());
}

inline double loss_multitask(double rank_loss, double bce_loss, double lambda1, double lambda2) {
  return lambda1 * rank_loss + lambda2 * bce_loss;
}

/// l_ab in {-1, 0, 1} from the sign of g*.
inline double margin_label(double target) { return target > 0 ? 1.0 : (target < 0 ? -1.0 : 0.0); }

// ---------------------------------------------------------------------------
// Training examples

/// Ordered pair (a, b) of candidate indices with target g*(a, b).
struct PairExample {
  std::size_t a = 0;
  std::size_t b = 0;
  double target = 0.0;
};

/// Everything the ranker sees about one hashtag.
struct TrainingGroup {
  Hashtag hashtag;
  HashtagFeatures h;
  std::vector<FeatureBundle> candidates;
  std::vector<PairExample> pairs;
  bool multiword = false;
};

/// All k(k-1) ordered pairs (or k(k-1)/2 with a < b when ordered is false).
inline TrainingGroup build_training_pairs(const CandidateSet& set, const GoldEntry& entry,
                                          std::vector<FeatureBundle> features, HashtagFeatures h,
                                          bool ordered = true) {
  if (set.candidates.empty()) throw Error("empty candidate set for '" + set.hashtag.raw() + "'");
  if (features.size() != set.size()) throw Error("feature count does not match candidate count");
  TrainingGroup g{set.hashtag, std::move(h), std::move(features), {}, entry.is_multiword()};
  std::vector<double> sim;
  for (const auto& c : set.candidates) sim.push_back(similarity(c.segmentation, entry));
  for (std::size_t a = 0; a < set.size(); ++a)
    for (std::size_t b = ordered ? 0 : a + 1; b < set.size(); ++b)
      if (a != b) g.pairs.push_back({a, b, sim[a] - sim[b]});
  return g;
}

// ---------------------------------------------------------------------------
// Model

/// Ranker network, gating classifier (multi-task modes only), feature
/// standardization and the layout they were trained against.
struct RankerModel {
  RankerMode mode = RankerMode::Mse;
  std::uint64_t layout_hash = 0;
  std::size_t gl_size = 0;
  std::size_t kn_size = 0;
  std::size_t h_size = 0;
  Standardization s_norm;
  Standardization h_norm;
  nn::MLP ranker;
  nn::MLP gate;

  static RankerModel initialize(RankerMode mode, const FeatureLayout& layout, std::uint64_t seed) {
    RankerModel m;
    m.mode = mode;
    m.layout_hash = layout.hash();
    m.gl_size = layout.gl_size();
    m.kn_size = layout.kn_size();
    m.h_size = layout.h_size();
    m.s_norm = Standardization::identity(layout.s_size());
    m.h_norm = Standardization::identity(layout.h_size());
    std::vector<std::size_t> sizes{m.ranker_input_size()};
    for (std::size_t i = 0; i < kHiddenLayers; ++i) sizes.push_back(kHiddenUnits);
    sizes.push_back(1);
    m.ranker = nn::MLP(sizes, nn::OutputActivation::Linear);
    std::mt19937_64 rng(seed);
    m.ranker.initialize(rng);
    if (is_multitask(mode)) {
      m.gate = nn::MLP({m.h_size, kGateHiddenUnits, 1}, nn::OutputActivation::Sigmoid);
      m.gate.initialize(rng);
    }
    return m;
  }

  std::size_t s_size() const { return gl_size + kn_size; }

  std::size_t ranker_input_size() const {
    const std::size_t width = is_multitask(mode) ? std::max(gl_size, kn_size) : s_size();
    return is_pairwise(mode) ? 2 * width : width;
  }

  void check_layout(std::uint64_t hash) const {
    if (hash != layout_hash) throw Error("feature layout hash mismatch");
  }

  void require_mode(RankerMode m) const {
    if (m != mode)
      throw Error("model was trained in mode " + std::string(mode_name(mode)) + ", not " + std::string(mode_name(m)));
  }

  std::vector<double> standardize(const FeatureBundle& f) const {
    check_layout(f.layout_hash);
    return s_norm.apply(f.full());
  }

  std::vector<double> standardize(const HashtagFeatures& h) const {
    check_layout(h.layout_hash);
    return h_norm.apply(h.values);
  }

  // Ranker input for standardized candidate vectors s = [gl; kn]. In the
  // multi-task modes this is w * s^GL + (1 - w) * s^KN with the shorter
  // side zero-padded; pairs concatenate a then b within each subset.
  std::vector<double> gl_part(std::span<const double> s) const { return {s.begin(), s.begin() + gl_size}; }
  std::vector<double> kn_part(std::span<const double> s) const { return {s.begin() + gl_size, s.end()}; }

  std::vector<double> subset_vector(std::span<const double> sa, std::span<const double> sb, bool gl) const {
    std::vector<double> out = gl ? gl_part(sa) : kn_part(sa);
    if (is_pairwise(mode)) {
      const auto rest = gl ? gl_part(sb) : kn_part(sb);
      out.insert(out.end(), rest.begin(), rest.end());
    }
    out.resize(ranker_input_size(), 0.0);
    return out;
  }

  std::vector<double> ranker_input(std::span<const double> sa, std::span<const double> sb, double w) const {
    if (!is_multitask(mode)) {
      std::vector<double> x(sa.begin(), sa.end());
      if (is_pairwise(mode)) x.insert(x.end(), sb.begin(), sb.end());
      return x;
    }
    const auto gl = subset_vector(sa, sb, true);
    const auto kn = subset_vector(sa, sb, false);
    std::vector<double> x(gl.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = w * gl[i] + (1.0 - w) * kn[i];
    return x;
  }

  double gate_value(std::span<const double> h_std) const { return gate.forward(h_std); }

  /// Pairwise modes: g(a, b). Pointwise modes: g'(a) (sb ignored).
  double score_std(std::span<const double> sa, std::span<const double> sb, double w) const {
    return ranker.forward(ranker_input(sa, sb, w));
  }

  // Checkpoint as JSON; doubles are written with round-trip precision.
  nlohmann::json to_json() const;
  static RankerModel from_json(const nlohmann::json& j);
  void save(std::ostream& out) const { out << to_json().dump(1) << '\n'; }
  static RankerModel load(std::istream& in);
};

namespace detail {

inline nlohmann::json mlp_to_json(const nn::MLP& m) {
  if (m.empty()) return nullptr;
  return {{"sizes", m.sizes()},
          {"output", m.output_activation() == nn::OutputActivation::Sigmoid ? "sigmoid" : "linear"},
          {"params", m.params()}};
}

inline nn::MLP mlp_from_json(const nlohmann::json& j) {
  if (j.is_null()) return {};
  const auto out = j.at("output").get<std::string>() == "sigmoid" ? nn::OutputActivation::Sigmoid
                                                                   : nn::OutputActivation::Linear;
  nn::MLP m(j.at("sizes").get<std::vector<std::size_t>>(), out);
  const auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != m.params().size()) throw Error("checkpoint weight count does not match architecture");
  m.params() = params;
  return m;
}

}  // namespace detail

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json RankerModel::to_json() const {
  return {{"format", "hashseg-ranker"},
          {"version", kCheckpointVersion},
          {"mode", mode_name(mode)},
          {"layout_hash", layout_hash},
          {"gl_size", gl_size},
          {"kn_size", kn_size},
          {"h_size", h_size},
          {"s_mean", s_norm.mean},
          {"s_scale", s_norm.scale},
          {"h_mean", h_norm.mean},
          {"h_scale", h_norm.scale},
          {"ranker", detail::mlp_to_json(ranker)},
          {"gate", detail::mlp_to_json(gate)}};
}

inline RankerModel RankerModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "hashseg-ranker") throw Error("not a ranker checkpoint");
    if (j.at("version") != kCheckpointVersion) throw Error("unsupported checkpoint version");
    RankerModel m;
    m.mode = parse_mode(j.at("mode").get<std::string>());
    m.layout_hash = j.at("layout_hash").get<std::uint64_t>();
    m.gl_size = j.at("gl_size").get<std::size_t>();
    m.kn_size = j.at("kn_size").get<std::size_t>();
    m.h_size = j.at("h_size").get<std::size_t>();
    m.s_norm = {j.at("s_mean").get<std::vector<double>>(), j.at("s_scale").get<std::vector<double>>()};
    m.h_norm = {j.at("h_mean").get<std::vector<double>>(), j.at("h_scale").get<std::vector<double>>()};
    m.ranker = detail::mlp_from_json(j.at("ranker"));
    m.gate = detail::mlp_from_json(j.at("gate"));
    if (m.ranker.empty() || m.ranker.input_size() != m.ranker_input_size())
      throw Error("checkpoint ranker shape does not match mode");
    if (is_multitask(m.mode) != !m.gate.empty()) throw Error("checkpoint gate does not match mode");
    if (m.s_norm.dim() != m.s_size() || m.h_norm.dim() != m.h_size)
      throw Error("checkpoint standardization has wrong dimension");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
}

inline RankerModel RankerModel::load(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
  return from_json(j);
}

// ---------------------------------------------------------------------------
// Scoring

inline double score_pair_mse(const RankerModel& m, const FeatureBundle& a, const FeatureBundle& b) {
  m.require_mode(RankerMode::Mse);
  return m.score_std(m.standardize(a), m.standardize(b), 1.0);
}

inline double score_pointwise_mr(const RankerModel& m, const FeatureBundle& s) {
  m.require_mode(RankerMode::Mr);
  const auto x = m.standardize(s);
  return m.score_std(x, x, 1.0);
}

struct GatedScore {
  double score = 0.0;
  double w_h = 0.0;
};

/// g(a, b) = G(w_h s_ab^GL + (1 - w_h) s_ab^KN). forced_w_h bypasses the
/// classifier.
inline GatedScore score_pair_multitask(const RankerModel& m, const HashtagFeatures& h, const FeatureBundle& a,
                                       const FeatureBundle& b, std::optional<double> forced_w_h = std::nullopt) {
  m.require_mode(RankerMode::MseMultitask);
  const double w = forced_w_h ? *forced_w_h : m.gate_value(m.standardize(h));
  return {m.score_std(m.standardize(a), m.standardize(b), w), w};
}

/// Pointwise analogue used by the margin-ranking multi-task mode.
inline GatedScore score_pointwise_multitask(const RankerModel& m, const HashtagFeatures& h, const FeatureBundle& s,
                                            std::optional<double> forced_w_h = std::nullopt) {
  m.require_mode(RankerMode::MrMultitask);
  const double w = forced_w_h ? *forced_w_h : m.gate_value(m.standardize(h));
  const auto x = m.standardize(s);
  return {m.score_std(x, x, w), w};
}

// ---------------------------------------------------------------------------
// Training

/// A training group with features already standardized.
struct PreparedGroup {
  std::vector<double> h;
  std::vector<std::vector<double>> s;
  std::vector<PairExample> pairs;
  double label = 0.0;
};

inline PreparedGroup prepare_group(const RankerModel& m, const TrainingGroup& g) {
  PreparedGroup p;
  p.h = m.standardize(g.h);
  for (const auto& c : g.candidates) p.s.push_back(m.standardize(c));
  p.pairs = g.pairs;
  if (!is_pairwise(m.mode))
    std::erase_if(p.pairs, [](const PairExample& e) { return margin_label(e.target) == 0.0; });
  p.label = g.multiword ? 1.0 : 0.0;
  return p;
}

struct Gradients {
  std::vector<double> ranker;
  std::vector<double> gate;

  void reset(const RankerModel& m) {
    ranker.assign(m.ranker.params().size(), 0.0);
    gate.assign(m.gate.params().size(), 0.0);
  }
};

struct Objective {
  double loss = 0.0;
  bool active = false;  // false when the group contributes nothing to learn
};

/// Loss of one group (one hashtag's pairs) and, if grads is given, its
/// gradient. Dropout is applied to the ranker only when dropout_rng is set.
inline Objective group_objective(const RankerModel& m, const PreparedGroup& g, const TrainConfig& cfg,
                                 std::mt19937_64* dropout_rng, Gradients* grads) {
  if (grads) grads->reset(m);
  const bool mt = is_multitask(m.mode);
  const double p = dropout_rng ? cfg.dropout : 0.0;

  nn::MLP::Cache gate_cache;
  double w = 1.0;
  if (mt) w = m.gate.forward(g.h, &gate_cache);
  double dw = 0.0;

  Objective obj;
  double rank_loss = 0.0;
  const double inv_m = g.pairs.empty() ? 0.0 : 1.0 / static_cast<double>(g.pairs.size());
  const double rank_weight = mt ? cfg.lambda1 : 1.0;

  const auto backprop_input = [&](const nn::MLP::Cache& cache, double d_out, const std::vector<double>& sa,
                                  const std::vector<double>& sb) {
    const auto dx = m.ranker.backward(cache, d_out, grads->ranker);
    if (!mt) return;
    const auto gl = m.subset_vector(sa, sb, true);
    const auto kn = m.subset_vector(sa, sb, false);
    for (std::size_t i = 0; i < dx.size(); ++i) dw += dx[i] * (gl[i] - kn[i]);
  };

  nn::MLP::Cache ca;
  nn::MLP::Cache cb;
  for (const auto& e : g.pairs) {
    const auto& sa = g.s[e.a];
    const auto& sb = g.s[e.b];
    if (is_pairwise(m.mode)) {
      const double pred = m.ranker.forward(m.ranker_input(sa, sb, w), &ca, dropout_rng, p);
      const double diff = pred - e.target;
      rank_loss += diff * diff * inv_m;
      if (grads) backprop_input(ca, rank_weight * 2.0 * diff * inv_m, sa, sb);
    } else {
      const double l = margin_label(e.target);
      const double pa = m.ranker.forward(m.ranker_input(sa, sa, w), &ca, dropout_rng, p);
      const double pb = m.ranker.forward(m.ranker_input(sb, sb, w), &cb, dropout_rng, p);
      const double term = 1.0 - l * (pa - pb);
      if (term > 0.0) {
        rank_loss += term * inv_m;
        if (grads) {
          backprop_input(ca, -rank_weight * l * inv_m, sa, sa);
          backprop_input(cb, rank_weight * l * inv_m, sb, sb);
        }
      }
    }
  }
  obj.active = !g.pairs.empty() || mt;
  obj.loss = rank_weight * rank_loss;

  if (mt) {
    const double c = clamp_gate(w);
    const double l = g.label;
    obj.loss += cfg.lambda2 * -(l * std::log(c) + (1.0 - l) * std::log(1.0 - c));
    if (grads) {
      if (w == c) dw += cfg.lambda2 * (-l / c + (1.0 - l) / (1.0 - c));
      m.gate.backward(gate_cache, dw, grads->gate);
    }
  }
  return obj;
}

struct TrainResult {
  RankerModel model;
  std::vector<double> epoch_losses;  // mean group loss per epoch, with dropout
};

/// Mean group objective without dropout.
inline double mean_loss(const RankerModel& m, const std::vector<PreparedGroup>& groups, const TrainConfig& cfg) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    const auto o = group_objective(m, g, cfg, nullptr, nullptr);
    if (!o.active) continue;
    total += o.loss;
    ++n;
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

inline std::vector<PreparedGroup> prepare_groups(const RankerModel& m, const std::vector<TrainingGroup>& groups) {
  std::vector<PreparedGroup> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(prepare_group(m, g));
  return out;
}

/// Fits standardization on the training groups, then runs Adam for
/// cfg.epochs passes with one group per step in seeded shuffled order.
inline TrainResult train(const std::vector<TrainingGroup>& groups, const FeatureLayout& layout,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (groups.empty()) throw Error("empty training set");
  TrainResult result{RankerModel::initialize(cfg.mode, layout, cfg.seed), {}};
  RankerModel& m = result.model;

  std::vector<std::vector<double>> s_rows;
  std::vector<std::vector<double>> h_rows;
  for (const auto& g : groups) {
    m.check_layout(g.h.layout_hash);
    h_rows.push_back(g.h.values);
    for (const auto& c : g.candidates) {
      m.check_layout(c.layout_hash);
      s_rows.push_back(c.full());
    }
  }
  m.s_norm = Standardization::fit(s_rows, layout.s_real());
  m.h_norm = Standardization::fit(h_rows, layout.h_real);
  const auto prepared = prepare_groups(m, groups);

  nn::Adam ranker_opt(m.ranker.params().size(), cfg.ranker_lr);
  nn::Adam gate_opt(m.gate.params().size(), cfg.classifier_lr);
  std::mt19937_64 order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 dropout_rng(cfg.seed ^ 0xbf58476d1ce4e5b9ULL);
  std::vector<std::size_t> order(prepared.size());
  std::iota(order.begin(), order.end(), 0);
  Gradients grads;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double total = 0.0;
    std::size_t steps = 0;
    for (std::size_t idx : order) {
      const auto obj = group_objective(m, prepared[idx], cfg, &dropout_rng, &grads);
      if (!std::isfinite(obj.loss))
        throw Error("non-finite loss at epoch " + std::to_string(epoch + 1) + " on hashtag '" +
                    groups[idx].hashtag.raw() + "'");
      if (!obj.active) continue;
      ranker_opt.step(m.ranker.params(), grads.ranker);
      if (is_multitask(m.mode)) gate_opt.step(m.gate.params(), grads.gate);
      total += obj.loss;
      ++steps;
    }
    result.epoch_losses.push_back(steps ? total / static_cast<double>(steps) : 0.0);
  }
  return result;
}

}  // namespace hashseg
