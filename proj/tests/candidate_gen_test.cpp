#include "hashseg/candidate_gen.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "test_corpus.hpp"

namespace hashseg {
namespace {

std::string random_hashtag(std::mt19937_64& rng, std::size_t max_len, std::string_view alphabet) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> ch(0, alphabet.size() - 1);
  std::string s;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[ch(rng)]);
  return s;
}

// Exhaustive oracle: score every segmentation, sort, truncate.
std::vector<Candidate> exhaustive_top_k(const Hashtag& h, const lm::NGramModel& m, std::size_t k) {
  std::vector<Candidate> all;
  for (auto& s : enumerate_segmentations(h)) {
    const double score = lm::score_segmentation(m, s);
    all.push_back({std::move(s), score});
  }
  std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) { return ranks_before(a, b); });
  if (all.size() > k) all.resize(k);
  return all;
}

TEST(Enumerate, SmallCases) {
  const auto ab = enumerate_segmentations(Hashtag::parse("ab"));
  ASSERT_EQ(ab.size(), 2u);
  std::set<std::string> texts;
  for (const auto& s : ab) texts.insert(s.text());
  EXPECT_EQ(texts, (std::set<std::string>{"ab", "a b"}));
  EXPECT_EQ(enumerate_segmentations(Hashtag::parse("abc")).size(), 4u);
  const auto a = enumerate_segmentations(Hashtag::parse("a"));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].text(), "a");
}

TEST(Enumerate, CountIsTwoToTheRMinusOne) {
  for (std::size_t r = 1; r <= 14; ++r) {
    const auto segs = enumerate_segmentations(Hashtag::parse(std::string(r, 'x')));
    EXPECT_EQ(segs.size(), std::size_t{1} << (r - 1));
  }
}

TEST(Enumerate, DistinctAndReconstructing) {
  const auto h = Hashtag::parse("AbcDe1");
  const auto segs = enumerate_segmentations(h);
  std::set<std::vector<Span>> seen;
  for (const auto& s : segs) {
    EXPECT_TRUE(seen.insert(s.spans()).second);
    std::string concat;
    for (const auto& w : s.folded_words()) concat += w;
    EXPECT_EQ(concat, h.chars());
  }
}

TEST(Enumerate, UnderscoresAreForcedBoundaries) {
  const auto h = Hashtag::parse("ab_cd");
  const auto segs = enumerate_segmentations(h);
  EXPECT_EQ(segs.size(), 4u);  // 2^1 * 2^1
  for (const auto& s : segs) {
    EXPECT_GE(s.size(), 2u);
    for (const auto& w : s.words()) EXPECT_EQ(w.find('_'), std::string::npos);
  }
}

TEST(Enumerate, CapIsEnforced) {
  EXPECT_THROW(enumerate_segmentations(Hashtag::parse(std::string(21, 'a'))), Error);
  EXPECT_NO_THROW(enumerate_segmentations(Hashtag::parse(std::string(12, 'a'))));
}

class BeamSearch : public ::testing::Test {
 protected:
  void SetUp() override {
    // Short words over a five-letter alphabet so random hashtags contain
    // plenty of in-vocabulary pieces and score ties.
    corpus_ = testing::random_corpus(600, 40, 5, 7);
    for (auto& s : corpus_)
      for (auto& w : s)
        for (auto& c : w) c = static_cast<char>('a' + (c - 'a') % 5);
  }
  std::vector<lm::Sentence> corpus_;
};

TEST_F(BeamSearch, SaturatedBeamEqualsExhaustiveRanking) {
  for (auto smoothing : {lm::Smoothing::GoodTuring, lm::Smoothing::ModifiedKneserNey}) {
    const auto m = lm::fit(lm::count_ngrams(corpus_, 3), 3, smoothing);
    std::mt19937_64 rng(99);
    for (int t = 0; t < 100; ++t) {
      const auto h = Hashtag::parse(random_hashtag(rng, 10, "abcde"));
      const std::size_t all = std::size_t{1} << (h.length() - 1);
      const std::size_t k = 1 + t % 12;
      const auto got = top_k_candidates(h, m, k, std::max(all, k));
      const auto want = exhaustive_top_k(h, m, k);
      ASSERT_EQ(got.candidates.size(), want.size()) << h.raw();
      for (std::size_t i = 0; i < want.size(); ++i) {
        ASSERT_EQ(got.candidates[i].segmentation, want[i].segmentation) << h.raw() << " rank " << i;
        ASSERT_EQ(got.candidates[i].score, want[i].score);
      }
    }
  }
}

TEST_F(BeamSearch, ScoresNonIncreasingAndReconstructing) {
  const auto m = lm::fit_kneser_ney(lm::count_ngrams(corpus_, 3), 3);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto h = Hashtag::parse("a" + random_hashtag(rng, 24, "abcde_"));
    const auto set = top_k_candidates(h, m, 10, 20);
    ASSERT_FALSE(set.candidates.empty());
    std::set<std::vector<Span>> distinct;
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (i > 0) {
        EXPECT_GE(set.candidates[i - 1].score, set.candidates[i].score);
      }
      EXPECT_TRUE(distinct.insert(set.candidates[i].segmentation.spans()).second);
      // from_spans validates reconstruction; rebuilding must succeed.
      EXPECT_NO_THROW(Segmentation::from_spans(h, set.candidates[i].segmentation.spans()));
    }
  }
}

TEST_F(BeamSearch, Deterministic) {
  const auto m = lm::fit_good_turing(lm::count_ngrams(corpus_, 3), 3);
  const auto h = Hashtag::parse("abcabdeabca");
  const auto a = top_k_candidates(h, m, 10, 30);
  const auto b = top_k_candidates(h, m, 10, 30);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.candidates[i].segmentation, b.candidates[i].segmentation);
    EXPECT_EQ(a.candidates[i].score, b.candidates[i].score);
  }
}

TEST(TopK, SaturatesAtAllSegmentations) {
  const auto m = lm::fit_kneser_ney(lm::count_ngrams({{"ab", "c"}}, 2), 2);
  const auto set = top_k_candidates(Hashtag::parse("abc"), m, 50, 50);
  EXPECT_EQ(set.size(), 4u);
}

TEST(TopK, FrequentUnigramBeatsOutOfVocabularySplits) {
  std::vector<lm::Sentence> corpus;
  for (int i = 0; i < 30; ++i) corpus.push_back({"snowfall"});
  corpus.push_back({"the", "cat"});
  const auto m = lm::fit_good_turing(lm::count_ngrams(corpus, 3), 3);
  const auto h = Hashtag::parse("snowfall");
  // Direct comparison of the two Score^LM values.
  const double unsplit = lm::score_segmentation(m, Segmentation::from_text(h, "snowfall"));
  const double split = lm::score_segmentation(m, Segmentation::from_text(h, "snow fall"));
  ASSERT_GT(unsplit, split);
  const auto set = top_k_candidates(h, m, 1, 128);
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.candidates[0].segmentation.text(), "snowfall");
}

TEST(TopK, KeepsOriginalCasing) {
  std::vector<lm::Sentence> corpus(20, {"home", "sweet", "home"});
  corpus.push_back({"sweet", "dreams"});
  const auto m = lm::fit_kneser_ney(lm::count_ngrams(corpus, 2), 2);
  const auto set = top_k_candidates(Hashtag::parse("#HomeSweetHome"), m, 3, 100);
  ASSERT_FALSE(set.candidates.empty());
  EXPECT_EQ(set.candidates[0].segmentation.text(), "Home Sweet Home");
}

TEST(TopK, RejectsBadParameters) {
  const auto m = lm::fit_kneser_ney(lm::count_ngrams({{"a"}}, 1), 1);
  EXPECT_THROW(top_k_candidates(Hashtag::parse("ab"), m, 0, 10), Error);
  EXPECT_THROW(top_k_candidates(Hashtag::parse("ab"), m, 10, 5), Error);
}

TEST(TopK, MaxWordLengthLimitsWords) {
  const auto m = lm::fit_kneser_ney(lm::count_ngrams({{"abcdef"}}, 2), 2);
  BeamOptions opts;
  opts.max_word_length = 3;
  const auto set = top_k_candidates(Hashtag::parse("abcdef"), m, opts);
  for (const auto& c : set.candidates)
    for (const auto& w : c.segmentation.words()) EXPECT_LE(w.size(), 3u);
}

}  // namespace
}  // namespace hashseg
