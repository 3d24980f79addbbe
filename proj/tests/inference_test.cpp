#include "hashseg/inference.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "test_corpus.hpp"

namespace hashseg {
namespace {

using Matrix = std::vector<std::vector<double>>;

std::vector<std::size_t> greedy(const Matrix& g) {
  return aggregate_pairwise_order(g.size(), [&](std::size_t i, std::size_t j) { return g[i][j]; });
}

Matrix random_antisymmetric(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> d(-3, 3);
  Matrix g(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      g[i][j] = d(rng);
      g[j][i] = -g[i][j];
    }
  return g;
}

// Sum over ordered positions i < j of g(pi_i, pi_j).
double agreement(const Matrix& g, const std::vector<std::size_t>& perm) {
  double s = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = i + 1; j < perm.size(); ++j) s += g[perm[i]][perm[j]];
  return s;
}

double best_agreement(const Matrix& g) {
  std::vector<std::size_t> perm(g.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = agreement(g, perm);
  while (std::next_permutation(perm.begin(), perm.end())) best = std::max(best, agreement(g, perm));
  return best;
}

CandidateSet all_candidates(const Hashtag& h) {
  CandidateSet set{h, {}, 0};
  for (auto& s : enumerate_segmentations(h)) set.candidates.push_back({std::move(s), 0.0});
  set.k = set.size();
  return set;
}

TEST(Aggregate, SingleCandidate) {
  EXPECT_EQ(greedy({{0.0}}), (std::vector<std::size_t>{0}));
}

TEST(Aggregate, AlwaysAPermutation) {
  std::mt19937_64 rng(1);
  for (std::size_t n = 1; n <= 8; ++n) {
    auto order = greedy(random_antisymmetric(rng, n));
    std::sort(order.begin(), order.end());
    std::vector<std::size_t> want(n);
    std::iota(want.begin(), want.end(), 0);
    EXPECT_EQ(order, want);
  }
}

TEST(Aggregate, TiesGoToEarlierCandidate) {
  const Matrix zero(4, std::vector<double>(4, 0.0));
  EXPECT_EQ(greedy(zero), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Aggregate, GoldPairScorePutsGoldFirst) {
  const auto h = Hashtag::parse("thecat");
  const auto entry = GoldEntry::from_texts(h, {"the cat"});
  auto set = all_candidates(h);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(set.candidates.begin(), set.candidates.end(), rng);
    CandidateSet five{h, {set.candidates.begin(), set.candidates.begin() + 4}, 5};
    const auto gold = std::find_if(set.candidates.begin(), set.candidates.end(),
                                   [&](const Candidate& c) { return entry.is_gold(c.segmentation); });
    if (std::none_of(five.candidates.begin(), five.candidates.end(),
                     [&](const Candidate& c) { return entry.is_gold(c.segmentation); }))
      five.candidates.push_back(*gold);
    else
      five.candidates.push_back(set.candidates[5]);
    // Exhaustive check that the gold's summed score is the strict maximum.
    std::vector<double> pnr;
    for (const auto& a : five.candidates) {
      double s = 0.0;
      for (const auto& b : five.candidates) s += gold_pair_score(a.segmentation, b.segmentation, entry);
      pnr.push_back(s);
    }
    const double top = *std::max_element(pnr.begin(), pnr.end());
    for (std::size_t i = 0; i < pnr.size(); ++i) {
      if (!entry.is_gold(five.candidates[i].segmentation)) {
        EXPECT_LT(pnr[i], top);
      }
    }
    const auto ranked = aggregate_pairwise(
        [&](const Segmentation& a, const Segmentation& b) { return gold_pair_score(a, b, entry); }, five);
    EXPECT_TRUE(entry.is_gold(ranked.front()));
  }
}

TEST(Aggregate, PotentialScoresMatchSortOnceAndBruteForce) {
  // g(a, b) = f(a) - f(b): greedy with recomputation, a single sort by
  // Score^PNR and the best permutation all agree.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> d(-5, 5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 3 + t % 4;
    std::vector<double> f(n);
    for (auto& v : f) v = d(rng);
    Matrix g(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i][j] = f[i] - f[j];
    const auto order = greedy(g);
    std::vector<double> once(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) once[i] += g[i][j];
    for (std::size_t r = 1; r < n; ++r) EXPECT_GE(once[order[r - 1]], once[order[r]]);
    EXPECT_EQ(agreement(g, order), best_agreement(g));
  }
}

TEST(Aggregate, RecomputationDiffersFromSortOnceInGeneral) {
  // x beats y narrowly and loses to z heavily; y beats z.
  Matrix g{{0, 1, -5}, {-1, 0, 1}, {5, -1, 0}};
  const auto order = greedy(g);
  EXPECT_EQ(order.front(), 2u);  // z: 5 - 1 = 4
  // After removing z: x scores 1, y scores -1.
  EXPECT_EQ(order, (std::vector<std::size_t>{2, 0, 1}));
  // One sort by the initial scores (-4, 0, 4) would give z, y, x.
  EXPECT_NE(order, (std::vector<std::size_t>{2, 1, 0}));
}

TEST(Aggregate, PrependingAUniversalLoserKeepsTopOne) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 6;
    const auto g = random_antisymmetric(rng, n);
    Matrix big(n + 1, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) big[i + 1][j + 1] = g[i][j];
    for (std::size_t j = 1; j <= n; ++j) {
      big[0][j] = -10;
      big[j][0] = 10;
    }
    EXPECT_EQ(greedy(big).front(), greedy(g).front() + 1);
  }
}

TEST(Aggregate, GoldScoreGivesNonIncreasingSimilarityAndBestOrdering) {
  std::mt19937_64 rng(5);
  const auto h = Hashtag::parse("snowfalls");
  const auto entry = GoldEntry::from_texts(h, {"snow falls", "snowfall s"});
  auto all = all_candidates(h);
  for (int t = 0; t < 100; ++t) {
    std::shuffle(all.candidates.begin(), all.candidates.end(), rng);
    const std::size_t n = 1 + t % 6;
    CandidateSet set{h, {all.candidates.begin(), all.candidates.begin() + static_cast<std::ptrdiff_t>(n)}, n};
    Matrix g(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        g[i][j] = gold_pair_score(set.candidates[i].segmentation, set.candidates[j].segmentation, entry);
    const auto order = greedy(g);
    for (std::size_t r = 1; r < n; ++r)
      EXPECT_GE(similarity(set.candidates[order[r - 1]].segmentation, entry),
                similarity(set.candidates[order[r]].segmentation, entry));
    EXPECT_EQ(agreement(g, order), best_agreement(g));
  }
}

class Pipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    std::vector<lm::Sentence> corpus;
    for (int i = 0; i < 5; ++i) {
      corpus.push_back({"the", "cat", "sat"});
      corpus.push_back({"snow", "fall", "today"});
      corpus.push_back({"home", "sweet", "home"});
    }
    lm_ = std::make_shared<lm::NGramModel>(lm::fit_kneser_ney(lm::count_ngrams(corpus, 3), 3));
    res_.lm_kn_tweet = res_.lm_kn_news = lm_;
    res_.lm_gt_tweet = res_.lm_gt_news =
        std::make_shared<lm::NGramModel>(lm::fit_good_turing(lm::count_ngrams(corpus, 3), 3));
    for (const char* w : {"the", "cat", "sat", "snow", "fall", "home", "sweet"})
      ResourcePack::insert(res_.english_dictionary, w);
  }
  std::shared_ptr<lm::NGramModel> lm_;
  ResourcePack res_;
};

TEST_F(Pipeline, PointwiseRankingSortsByScore) {
  const auto model = RankerModel::initialize(RankerMode::Mr, FeatureLayout::standard(), 9);
  const auto set = top_k_candidates(Hashtag::parse("thecatsat"), *lm_, 3, 10);
  const auto feats = extract_features(set, res_);
  const auto ranked = rank_candidates(model, RankerMode::Mr, set, feats);
  ASSERT_EQ(ranked.size(), 3u);
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    EXPECT_EQ(ranked[r].score, score_pointwise_mr(model, feats.s[ranked[r].generator_rank]));
    if (r > 0) {
      EXPECT_GE(ranked[r - 1].score, ranked[r].score);
    }
  }
}

TEST_F(Pipeline, PairwiseRankingIsADeterministicPermutation) {
  for (auto mode : {RankerMode::Mse, RankerMode::MseMultitask, RankerMode::MrMultitask}) {
    const auto model = RankerModel::initialize(mode, FeatureLayout::standard(), 4);
    const auto set = top_k_candidates(Hashtag::parse("homesweethome"), *lm_, 10, 20);
    const auto feats = extract_features(set, res_);
    const auto a = rank_candidates(model, mode, set, feats);
    const auto b = rank_candidates(model, mode, set, feats);
    ASSERT_EQ(a.size(), set.size());
    std::vector<std::size_t> ranks;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].segmentation, b[i].segmentation);
      EXPECT_EQ(a[i].score, b[i].score);
      EXPECT_EQ(a[i].segmentation, set.candidates[a[i].generator_rank].segmentation);
      ranks.push_back(a[i].generator_rank);
    }
    std::sort(ranks.begin(), ranks.end());
    for (std::size_t i = 0; i < ranks.size(); ++i) EXPECT_EQ(ranks[i], i);
    EXPECT_THROW(rank_candidates(model, mode == RankerMode::Mse ? RankerMode::Mr : RankerMode::Mse, set, feats),
                 Error);
  }
}

TEST_F(Pipeline, SegmentHashtagEndToEnd) {
  const auto model = RankerModel::initialize(RankerMode::MseMultitask, FeatureLayout::standard(), 2);
  const auto one = segment_hashtag("#x", *lm_, model, res_);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].segmentation.text(), "x");
  const auto h = Hashtag::parse("SnowFallToday");
  const auto out = segment_hashtag("SnowFallToday", *lm_, model, res_);
  EXPECT_EQ(out.size(), 10u);
  for (const auto& r : out) EXPECT_NO_THROW(Segmentation::from_spans(h, r.segmentation.spans()));
  EXPECT_THROW(segment_hashtag("snow-fall", *lm_, model, res_), Error);
}

TEST_F(Pipeline, OracleScoreFindsGoldWhenGenerated) {
  for (const auto& [tag, gold] : std::vector<std::pair<std::string, std::string>>{
           {"thecatsat", "the cat sat"}, {"snowfall", "snow fall"}, {"homesweethome", "home sweet home"},
           {"catsat", "cat sat"}, {"zzzz", "zzzz"}}) {
    const auto h = Hashtag::parse(tag);
    const auto entry = GoldEntry::from_texts(h, {gold});
    const auto set = top_k_candidates(h, *lm_, 10, 50);
    const auto ranked = aggregate_pairwise(
        [&](const Segmentation& a, const Segmentation& b) { return gold_pair_score(a, b, entry); }, set);
    const bool present = std::any_of(set.candidates.begin(), set.candidates.end(),
                                     [&](const Candidate& c) { return entry.is_gold(c.segmentation); });
    EXPECT_TRUE(present) << tag;
    EXPECT_EQ(entry.is_gold(ranked.front()), present) << tag;
  }
}

TEST_F(Pipeline, TrainingGroupsFromEntries) {
  std::vector<GoldEntry> entries{GoldEntry::from_texts(Hashtag::parse("thecat"), {"the cat"}),
                                 GoldEntry::from_texts(Hashtag::parse("a"), {"a"})};
  const auto groups = build_training_groups(entries, *lm_, res_, {4, 10, 0});
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].candidates.size(), 4u);
  EXPECT_EQ(groups[0].pairs.size(), 12u);
  EXPECT_TRUE(groups[0].multiword);
  EXPECT_EQ(groups[1].pairs.size(), 0u);
  EXPECT_FALSE(groups[1].multiword);
}

}  // namespace
}  // namespace hashseg
