#include "hashseg/baselines.hpp"

#include <gtest/gtest.h>

#include <random>

#include "hashseg/eval.hpp"

namespace hashseg {
namespace {

std::unordered_set<std::string> dict(std::initializer_list<const char*> words) {
  std::unordered_set<std::string> d;
  for (const char* w : words) ResourcePack::insert(d, w);
  return d;
}

TEST(Original, SingleToken) {
  EXPECT_EQ(original_hashtag(Hashtag::parse("snowfall")).words(), (std::vector<std::string>{"snowfall"}));
  const auto h = Hashtag::parse("epicfail");
  const auto s = original_hashtag(h);
  EXPECT_EQ(s.text(), "epicfail");
  EXPECT_EQ(token_f1(s, GoldEntry::from_texts(h, {"epic fail"})), 0.0);
}

TEST(RuleBased, Examples) {
  const auto none = dict({});
  EXPECT_EQ(rule_based_segment(Hashtag::parse("HomeSweetHome"), none).text(), "Home Sweet Home");
  EXPECT_EQ(rule_based_segment(Hashtag::parse("www_www"), none).text(), "www www");
  EXPECT_EQ(rule_based_segment(Hashtag::parse("thecat"), dict({"the", "cat"})).text(), "the cat");
  EXPECT_EQ(rule_based_segment(Hashtag::parse("cfp09"), none).text(), "cfp 09");
  EXPECT_EQ(rule_based_segment(Hashtag::parse("2012olympics"), dict({"olympics"})).text(), "2012 olympics");
}

TEST(RuleBased, LongestMatchAndResidue) {
  // Longest match prefers "theme" over "the"; "xq" is residue.
  EXPECT_EQ(rule_based_segment(Hashtag::parse("themepark"), dict({"the", "theme", "park", "me"})).text(),
            "theme park");
  EXPECT_EQ(rule_based_segment(Hashtag::parse("xqcat"), dict({"cat"})).text(), "xq cat");
  EXPECT_EQ(rule_based_segment(Hashtag::parse("catxq"), dict({"cat"})).text(), "cat xq");
  EXPECT_EQ(rule_based_segment(Hashtag::parse("TheCat"), dict({"the", "cat"})).text(), "The Cat");
}

TEST(RuleBased, AlwaysReconstructs) {
  std::mt19937_64 rng(1);
  const auto d = dict({"a", "ab", "ba", "cab", "b1"});
  const std::string alphabet = "abcAB1_";
  std::uniform_int_distribution<std::size_t> ch(0, alphabet.size() - 1);
  for (int t = 0; t < 500; ++t) {
    std::string s = "a";
    for (int i = 0; i < 1 + t % 15; ++i) s.push_back(alphabet[ch(rng)]);
    const auto h = Hashtag::parse(s);
    const auto seg = rule_based_segment(h, d);
    EXPECT_NO_THROW(Segmentation::from_spans(h, seg.spans())) << s;
  }
}

UnigramTable table(std::initializer_list<std::pair<const char*, std::uint64_t>> counts) {
  UnigramTable t;
  for (const auto& [w, c] : counts) t.add(w, c);
  return t;
}

TEST(Viterbi, MatchesExhaustiveArgmax) {
  const auto t = table({{"a", 50}, {"b", 20}, {"ab", 30}, {"ba", 5}, {"abc", 3}, {"c", 10}, {"cab", 8}, {"bc", 2}});
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> ch(0, 2);
  for (int t2 = 0; t2 < 200; ++t2) {
    std::string s;
    for (int i = 0; i < 1 + t2 % 12; ++i) s.push_back(static_cast<char>('a' + ch(rng)));
    const auto h = Hashtag::parse(s);
    const auto all = enumerate_segmentations(h);
    const Segmentation* best = &all.front();
    for (const auto& c : all)
      if (ranks_before(t.score(c), c.folded_words(), t.score(*best), best->folded_words())) best = &c;
    EXPECT_EQ(viterbi_segment(h, t), *best) << s;
  }
}

TEST(Viterbi, UnsplitWhenMostProbable) {
  const auto t = table({{"snowfall", 100}, {"snow", 10}, {"fall", 10}});
  const auto h = Hashtag::parse("snowfall");
  EXPECT_GT(t.score(Segmentation::from_text(h, "snowfall")), t.score(Segmentation::from_text(h, "snow fall")));
  EXPECT_EQ(viterbi_segment(h, t).text(), "snowfall");
  EXPECT_EQ(viterbi_segment(Hashtag::parse("q"), t).text(), "q");
}

TEST(Viterbi, OutOfVocabularyFloor) {
  const auto t = table({{"a", 5}, {"b", 5}});
  EXPECT_DOUBLE_EQ(t.log_prob("zz"), std::log(1.0 / (10.0 * 100.0)));
  EXPECT_THROW(UnigramTable().log_prob("a"), Error);
}

FeatureBundle bundle(std::vector<double> gl) {
  FeatureBundle f;
  f.gl = std::move(gl);
  f.gl.resize(FeatureLayout::standard().gl_size(), 0.0);
  f.kn.assign(FeatureLayout::standard().kn_size(), 0.0);
  f.layout_hash = FeatureLayout::standard().hash();
  return f;
}

TEST(LinearRanker, ZeroWeightsKeepGeneratorOrder) {
  LinearRanker r;
  r.layout_hash = FeatureLayout::standard().hash();
  r.weights.assign(FeatureLayout::standard().s_size(), 0.0);
  r.norm = Standardization::identity(r.weights.size());
  const std::vector<FeatureBundle> c{bundle({3}), bundle({1}), bundle({2})};
  EXPECT_EQ(r.rank(c), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(LinearRanker, UpdateIsNoOpWithMargin) {
  std::vector<double> w{1.0, 0.0};
  const std::vector<double> a{2.0, 0.0};
  const std::vector<double> b{0.5, 0.0};
  EXPECT_FALSE(LinearRanker::update(w, a, b, 0.1));
  EXPECT_EQ(w, (std::vector<double>{1.0, 0.0}));
  EXPECT_TRUE(LinearRanker::update(w, b, a, 0.1));
  EXPECT_NE(w, (std::vector<double>{1.0, 0.0}));
}

TEST(LinearRanker, LearnsLinearTeacher) {
  const auto& layout = FeatureLayout::standard();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> teacher(layout.s_size());
  for (auto& v : teacher) v = n(rng);
  const auto make_group = [&]() {
    TrainingGroup g{Hashtag::parse("x"), {}, {}, {}, false};
    std::vector<double> f;
    for (int i = 0; i < 6; ++i) {
      FeatureBundle b;
      for (std::size_t j = 0; j < layout.gl_size(); ++j) b.gl.push_back(n(rng));
      for (std::size_t j = 0; j < layout.kn_size(); ++j) b.kn.push_back(n(rng));
      b.layout_hash = layout.hash();
      const auto s = b.full();
      f.push_back(std::inner_product(s.begin(), s.end(), teacher.begin(), 0.0));
      g.candidates.push_back(std::move(b));
    }
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = 0; b < 6; ++b)
        if (a != b) g.pairs.push_back({a, b, f[a] - f[b]});
    return std::make_pair(g, f);
  };
  std::vector<TrainingGroup> train;
  for (int i = 0; i < 200; ++i) train.push_back(make_group().first);
  const auto r = train_linear_ranker(train, layout);

  std::size_t agree = 0;
  std::size_t total = 0;
  for (int i = 0; i < 100; ++i) {
    const auto [g, f] = make_group();
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = a + 1; b < 6; ++b) {
        ++total;
        if ((r.score(g.candidates[a]) > r.score(g.candidates[b])) == (f[a] > f[b])) ++agree;
      }
  }
  EXPECT_GT(static_cast<double>(agree) / static_cast<double>(total), 0.95);
}

TEST(LinearRanker, ConstantFeatureDoesNotChangeRanking) {
  const auto& layout = FeatureLayout::standard();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  LinearRanker r;
  r.layout_hash = layout.hash();
  r.weights.resize(layout.s_size());
  for (auto& w : r.weights) w = n(rng);
  r.norm = Standardization::identity(layout.s_size());
  std::vector<FeatureBundle> c;
  for (int i = 0; i < 8; ++i) {
    std::vector<double> gl(layout.gl_size());
    for (auto& v : gl) v = n(rng);
    gl[3] = 0.0;
    c.push_back(bundle(gl));
  }
  const auto before = r.rank(c);
  for (auto& b : c) b.gl[3] = 42.0;
  EXPECT_EQ(r.rank(c), before);
}

}  // namespace
}  // namespace hashseg
