#pragma once

// Command line front end: train-lm, candidates, train, segment, evaluate
// and baseline. run_cli returns the process exit status.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hashseg/baselines.hpp"
#include "hashseg/data_io.hpp"
#include "hashseg/eval.hpp"
#include "hashseg/inference.hpp"

namespace hashseg {

namespace cli_detail {

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

/// Non-empty trimmed lines of `in`, paired with 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string>> read_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (!t.empty()) out.emplace_back(lineno, std::string(t));
  }
  return out;
}

inline Hashtag parse_input_hashtag(std::size_t lineno, const std::string& s) {
  try {
    return Hashtag::parse(s);
  } catch (const Error& e) {
    throw Error("input line " + std::to_string(lineno) + ": " + e.what());
  }
}

/// `hashtag<TAB>rank<TAB>segmentation[...]` rows grouped by hashtag and
/// ordered by rank.
inline std::unordered_map<std::string, std::vector<Segmentation>> read_predictions(std::istream& in) {
  std::map<std::string, std::map<std::size_t, Segmentation>> rows;
  for (const auto& [lineno, line] : read_lines(in)) {
    const auto at = [&](const std::string& msg) { return Error("prediction line " + std::to_string(lineno) + ": " + msg); };
    const auto f = split(line, "\t");
    if (f.size() < 3) throw at("expected hashtag<TAB>rank<TAB>segmentation");
    try {
      const Hashtag h = Hashtag::parse(trim(f[0]));
      const std::size_t rank = parse_uint(trim(f[1]));
      if (rank == 0) throw Error("rank must be at least 1");
      if (!rows[h.raw()].emplace(rank, Segmentation::from_text(h, f[2])).second)
        throw Error("repeated rank for '" + h.raw() + "'");
    } catch (const Error& e) {
      throw at(e.what());
    }
  }
  std::unordered_map<std::string, std::vector<Segmentation>> out;
  for (auto& [tag, ranked] : rows)
    for (auto& [rank, seg] : ranked) out[tag].push_back(std::move(seg));
  return out;
}

inline void write_ranked(std::ostream& out, const Hashtag& h, const std::vector<Segmentation>& ranked) {
  for (std::size_t i = 0; i < ranked.size(); ++i) out << h.raw() << '\t' << i + 1 << '\t' << ranked[i].text() << '\n';
}

struct Common {
  std::string config;
  std::string lm;
  std::optional<std::size_t> topk;
  std::optional<std::size_t> beam;
  std::optional<std::size_t> max_word_length;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::size_t> epochs;

  /// Config file (or defaults), then HASHSEG_SEED, then flags.
  Config load() const {
    Config c;
    if (!config.empty()) {
      c = Config::load(config);
    } else {
      c.apply_env();
    }
    if (!lm.empty()) c.paths["generator_lm"] = lm;
    if (topk) c.beam.k = c.train.k = *topk;
    if (beam) c.beam.beam_width = *beam;
    if (max_word_length) c.beam.max_word_length = *max_word_length;
    if (seed) c.train.seed = *seed;
    if (mode) c.train.mode = parse_mode(*mode);
    if (epochs) c.train.epochs = *epochs;
    if (c.beam.beam_width < c.beam.k) c.beam.beam_width = std::max(c.beam.k, kDefaultBeamWidth);
    return c;
  }
};

inline std::shared_ptr<const lm::NGramModel> generator_only(const Config& c) {
  if (auto p = c.path("generator_lm")) return load_lm(*p);
  return load_lm(c.require_path("lm_kn_tweet"));
}

/// Records of `split`; rows without a split column count as train.
inline std::vector<GoldEntry> training_entries(const std::string& path, const std::string& split) {
  const auto ds = load_dataset(path, Split::Train);
  auto entries = ds.entries(*parse_split(split));
  if (entries.empty()) throw Error(path + ": no " + split + " records");
  return entries;
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  namespace cd = cli_detail;
  CLI::App app{"Hashtag segmentation with pairwise neural ranking", "hashseg"};
  app.require_subcommand(1);

  // train-lm
  auto* train_lm = app.add_subcommand("train-lm", "Fit an n-gram LM on a text corpus and write it in ARPA format");
  std::size_t order = 3;
  std::string smoothing;
  std::string corpus_path;
  std::string lm_out;
  train_lm->add_option("--order", order, "n-gram order")->check(CLI::Range(1, 9));
  train_lm->add_option("--smoothing", smoothing, "kn or gt")->required()->check(CLI::IsMember({"kn", "gt"}));
  train_lm->add_option("--in", corpus_path, "corpus, one sentence per line")->required();
  train_lm->add_option("--out", lm_out, "output ARPA file")->required();

  const auto add_beam = [](CLI::App* sub, cd::Common& c) {
    sub->add_option("--topk,--k", c.topk, "candidates per hashtag")->check(CLI::PositiveNumber);
    sub->add_option("--beam", c.beam, "beam width")->check(CLI::PositiveNumber);
    sub->add_option("--max-word-length", c.max_word_length, "longest word the generator proposes (0 = any)");
  };

  // candidates
  cd::Common cand;
  auto* candidates = app.add_subcommand("candidates", "Top-k segmentations by LM score for hashtags on stdin");
  candidates->add_option("--lm", cand.lm, "generator LM (ARPA)")->required();
  add_beam(candidates, cand);

  // train
  cd::Common tr;
  std::string train_data;
  std::string train_split = "train";
  std::string model_out;
  auto* train_cmd = app.add_subcommand("train", "Train a pairwise ranker");
  train_cmd->add_option("--config", tr.config, "resource config file")->required();
  train_cmd->add_option("--data", train_data, "training TSV")->required();
  train_cmd->add_option("--out", model_out, "output model file")->required();
  train_cmd->add_option("--split", train_split, "split to train on")->check(CLI::IsMember({"train", "dev", "test"}));
  train_cmd->add_option("--lm", tr.lm, "generator LM, overriding the config");
  train_cmd->add_option("--mode", tr.mode, "mse, mr, mse-mt or mr-mt")
      ->check(CLI::IsMember({"mse", "mr", "mse-mt", "mr-mt"}));
  train_cmd->add_option("--epochs", tr.epochs, "training epochs");
  train_cmd->add_option("--seed", tr.seed, "random seed");
  add_beam(train_cmd, tr);

  // segment
  cd::Common seg;
  std::string model_path;
  auto* segment = app.add_subcommand("segment", "Rank segmentations for hashtags on stdin with a trained model");
  segment->add_option("--config", seg.config, "resource config file")->required();
  segment->add_option("--model", model_path, "trained model file")->required();
  segment->add_option("--lm", seg.lm, "generator LM, overriding the config");
  segment->add_option("--mode", seg.mode, "expected model mode")
      ->check(CLI::IsMember({"mse", "mr", "mse-mt", "mr-mt"}));
  add_beam(segment, seg);

  // evaluate
  std::string gold_path;
  std::string pred_path;
  std::string report_out;
  std::string eval_split;
  auto* evaluate = app.add_subcommand("evaluate", "Score ranked predictions against gold segmentations");
  evaluate->add_option("--gold", gold_path, "gold TSV")->required();
  evaluate->add_option("--pred", pred_path, "predictions: hashtag<TAB>rank<TAB>segmentation")->required();
  evaluate->add_option("--out", report_out, "JSON report (stdout when absent)");
  evaluate->add_option("--split", eval_split, "only evaluate this split")->check(CLI::IsMember({"train", "dev", "test"}));

  // baseline
  cd::Common base;
  std::string method;
  std::string base_train;
  auto* baseline = app.add_subcommand("baseline", "Segment hashtags on stdin with a reference method");
  baseline->add_option("--method", method, "original, rule, viterbi, wordbreaker or linear")
      ->required()
      ->check(CLI::IsMember({"original", "rule", "viterbi", "wordbreaker", "linear"}));
  baseline->add_option("--config", base.config, "resource config file");
  baseline->add_option("--lm", base.lm, "generator LM for wordbreaker and linear");
  baseline->add_option("--train", base_train, "training TSV for the linear ranker");
  baseline->add_option("--split", train_split, "split of --train to use")->check(CLI::IsMember({"train", "dev", "test"}));
  baseline->add_option("--seed", base.seed, "random seed");
  add_beam(baseline, base);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_lm) {
      auto corpus_in = open_input(corpus_path);
      const auto corpus = lm::read_corpus(corpus_in);
      if (corpus.empty()) throw Error(corpus_path + ": empty corpus");
      const auto model = lm::fit(lm::count_ngrams(corpus, order), order,
                                 smoothing == "kn" ? lm::Smoothing::ModifiedKneserNey : lm::Smoothing::GoodTuring);
      auto f = cd::open_output(lm_out);
      model.write_arpa(f);
    } else if (*candidates) {
      const Config c = cand.load();
      const auto model = cd::generator_only(c);
      for (const auto& [lineno, line] : cd::read_lines(in)) {
        const Hashtag h = cd::parse_input_hashtag(lineno, line);
        const auto set = top_k_candidates(h, *model, c.beam);
        for (std::size_t i = 0; i < set.size(); ++i)
          out << h.raw() << '\t' << i + 1 << '\t' << set.candidates[i].segmentation.text() << '\t'
              << format_double(set.candidates[i].score) << '\n';
      }
    } else if (*train_cmd) {
      const Config c = tr.load();
      const auto res = load_resources(c);
      const auto gen = generator_lm(c, res);
      const auto groups =
          build_training_groups(cd::training_entries(train_data, train_split), *gen, res, c.beam, c.train.ordered_pairs);
      const auto result = train(groups, FeatureLayout::standard(), c.train);
      auto f = cd::open_output(model_out);
      result.model.save(f);
      err << "trained " << mode_name(c.train.mode) << " on " << groups.size() << " hashtags, final loss "
          << format_double(result.epoch_losses.empty() ? 0.0 : result.epoch_losses.back()) << '\n';
    } else if (*segment) {
      const Config c = seg.load();
      const auto model = load_ranker(model_path);
      if (seg.mode) model.require_mode(parse_mode(*seg.mode));
      const auto res = load_resources(c);
      const auto gen = generator_lm(c, res);
      for (const auto& [lineno, line] : cd::read_lines(in)) {
        const Hashtag h = cd::parse_input_hashtag(lineno, line);
        const auto set = top_k_candidates(h, *gen, c.beam);
        std::vector<Segmentation> ranked;
        for (auto& r : rank_candidates(model, model.mode, set, extract_features(set, res)))
          ranked.push_back(std::move(r.segmentation));
        cd::write_ranked(out, h, ranked);
      }
    } else if (*evaluate) {
      const auto ds = load_dataset(gold_path);
      const auto entries = eval_split.empty() ? ds.entries() : ds.entries(*parse_split(eval_split));
      if (entries.empty()) throw Error(gold_path + ": no gold records");
      auto pred_in = open_input(pred_path);
      const auto report = evaluate_dataset(cd::read_predictions(pred_in), entries).to_json().dump(2) + "\n";
      if (report_out.empty()) {
        out << report;
      } else {
        auto f = cd::open_output(report_out);
        f << report;
      }
    } else if (*baseline) {
      const Config c = base.load();
      std::function<std::vector<Segmentation>(const Hashtag&)> run;
      std::unordered_set<std::string> dictionary;
      UnigramTable unigrams;
      std::shared_ptr<const lm::NGramModel> gen;
      ResourcePack res;
      LinearRanker linear;
      if (method == "original") {
        run = [](const Hashtag& h) { return std::vector<Segmentation>{original_hashtag(h)}; };
      } else if (method == "rule") {
        dictionary = load_word_list(c.require_path("english_dictionary"));
        run = [&](const Hashtag& h) { return std::vector<Segmentation>{rule_based_segment(h, dictionary)}; };
      } else if (method == "viterbi") {
        unigrams = load_unigram_table(c.require_path("unigram_counts"));
        run = [&](const Hashtag& h) { return std::vector<Segmentation>{viterbi_segment(h, unigrams)}; };
      } else if (method == "wordbreaker") {
        gen = cd::generator_only(c);
        run = [&](const Hashtag& h) { return top_k_candidates(h, *gen, c.beam).segmentations(); };
      } else {
        if (base_train.empty()) throw Error("the linear baseline needs --train");
        res = load_resources(c);
        gen = generator_lm(c, res);
        const auto groups =
            build_training_groups(cd::training_entries(base_train, train_split), *gen, res, c.beam, c.train.ordered_pairs);
        linear = train_linear_ranker(groups, FeatureLayout::standard(), {.seed = c.train.seed});
        run = [&](const Hashtag& h) {
          const auto set = top_k_candidates(h, *gen, c.beam);
          const auto feats = extract_features(set, res);
          std::vector<Segmentation> ranked;
          for (std::size_t i : linear.rank(feats.s)) ranked.push_back(set.candidates[i].segmentation);
          return ranked;
        };
      }
      for (const auto& [lineno, line] : cd::read_lines(in)) {
        const Hashtag h = cd::parse_input_hashtag(lineno, line);
        cd::write_ranked(out, h, run(h));
      }
    }
  } catch (const std::exception& e) {
    err << "hashseg: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace hashseg
