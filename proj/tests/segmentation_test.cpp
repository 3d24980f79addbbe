#include "hashseg/segmentation.hpp"

#include <gtest/gtest.h>

namespace hashseg {
namespace {

TEST(Hashtag, ParsesAndStripsHash) {
  const auto h = Hashtag::parse("#EpicFail");
  EXPECT_EQ(h.raw(), "EpicFail");
  EXPECT_EQ(h.chars(), "epicfail");
  EXPECT_EQ(h.length(), 8u);
  ASSERT_EQ(h.runs().size(), 1u);
}

TEST(Hashtag, RejectsInvalidCharacters) {
  EXPECT_THROW(Hashtag::parse("no-dash"), Error);
  EXPECT_THROW(Hashtag::parse("two words"), Error);
  EXPECT_THROW(Hashtag::parse(""), Error);
  EXPECT_THROW(Hashtag::parse("#"), Error);
  EXPECT_THROW(Hashtag::parse("___"), Error);
  EXPECT_THROW(Hashtag::parse("caf\xc3\xa9"), Error);
  EXPECT_FALSE(Hashtag::is_valid("a.b"));
  EXPECT_TRUE(Hashtag::is_valid("a_b9"));
}

TEST(Hashtag, UnderscoreRuns) {
  const auto h = Hashtag::parse("_www__www_");
  ASSERT_EQ(h.runs().size(), 2u);
  EXPECT_EQ(h.runs()[0], (Span{1, 4}));
  EXPECT_EQ(h.runs()[1], (Span{6, 9}));
}

TEST(Segmentation, FromWordsIsCaseInsensitive) {
  const auto h = Hashtag::parse("iPhoneApp");
  const auto s = Segmentation::from_words(h, {"iphone", "app"});
  EXPECT_EQ(s.words(), (std::vector<std::string>{"iPhone", "App"}));
  EXPECT_EQ(s.folded_text(), "iphone app");
  EXPECT_EQ(s.spans()[1], (Span{6, 9}));
}

TEST(Segmentation, FromWordsRejectsMismatch) {
  const auto h = Hashtag::parse("abc");
  EXPECT_THROW(Segmentation::from_text(h, "a bd"), Error);
  EXPECT_THROW(Segmentation::from_text(h, "ab"), Error);
  EXPECT_THROW(Segmentation::from_text(h, "abcd"), Error);
  EXPECT_THROW(Segmentation::from_text(h, ""), Error);
}

TEST(Segmentation, UnderscoreTokensAreBoundaries) {
  const auto h = Hashtag::parse("www_www");
  const auto a = Segmentation::from_text(h, "www _ www");
  const auto b = Segmentation::from_text(h, "www_www");
  const auto c = Segmentation::from_text(h, "www www");
  EXPECT_EQ(a, b);
  EXPECT_EQ(b, c);
  EXPECT_EQ(a.size(), 2u);
}

TEST(Segmentation, FromSpansValidates) {
  const auto h = Hashtag::parse("ab_c");
  EXPECT_NO_THROW(Segmentation::from_spans(h, {{0, 2}, {3, 4}}));
  EXPECT_THROW(Segmentation::from_spans(h, {{0, 4}}), Error);          // contains '_'
  EXPECT_THROW(Segmentation::from_spans(h, {{0, 1}, {3, 4}}), Error);  // skips 'b'
  EXPECT_THROW(Segmentation::from_spans(h, {{0, 2}}), Error);          // misses 'c'
  EXPECT_THROW(Segmentation::from_spans(h, {}), Error);
}

TEST(Segmentation, UnsplitKeepsOneWordPerRun) {
  EXPECT_EQ(Segmentation::unsplit(Hashtag::parse("snowfall")).text(), "snowfall");
  EXPECT_EQ(Segmentation::unsplit(Hashtag::parse("a_b")).text(), "a b");
}

}  // namespace
}  // namespace hashseg
