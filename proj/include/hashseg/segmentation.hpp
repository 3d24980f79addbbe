#pragma once

// Hashtag and Segmentation value types.
//
// A hashtag is an ASCII string over [A-Za-z0-9_]. Underscores are explicit
// author-provided word boundaries: they never belong to a word, so a
// hashtag is split into underscore-free "runs" and a segmentation is a
// sequence of non-empty character spans covering every run exactly.

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hashseg/text.hpp"

namespace hashseg {

/// Half-open character range [begin, end) into Hashtag::raw().
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  auto operator<=>(const Span&) const = default;
};

class Hashtag {
 public:
  Hashtag() = default;

  /// Parses a hashtag, stripping one leading '#'. Throws Error("invalid
  /// hashtag characters") on anything outside [A-Za-z0-9_] and on inputs
  /// without a single alphanumeric character.
  static Hashtag parse(std::string_view text) {
    if (text.starts_with('#')) text.remove_prefix(1);
    if (text.empty()) throw Error("invalid hashtag characters: empty hashtag");
    bool any_alnum = false;
    for (char c : text) {
      if (is_ascii_alnum(c)) {
        any_alnum = true;
      } else if (c != '_') {
        throw Error("invalid hashtag characters: '" + std::string(text) + "'");
      }
    }
    if (!any_alnum)
      throw Error("invalid hashtag characters: '" + std::string(text) + "' has no letters or digits");

    Hashtag h;
    h.raw_ = std::string(text);
    h.chars_ = casefold(text);
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && text[i] == '_') ++i;
      std::size_t j = i;
      while (j < text.size() && text[j] != '_') ++j;
      if (j > i) h.runs_.push_back({i, j});
      i = j;
    }
    return h;
  }

  static bool is_valid(std::string_view text) {
    try {
      parse(text);
      return true;
    } catch (const Error&) {
      return false;
    }
  }

  /// Original casing, without '#'.
  const std::string& raw() const { return raw_; }
  /// Casefolded characters used for scoring.
  const std::string& chars() const { return chars_; }
  std::size_t length() const { return raw_.size(); }
  /// Maximal underscore-free ranges.
  const std::vector<Span>& runs() const { return runs_; }
  bool has_underscore() const { return raw_.find('_') != std::string::npos; }

  bool operator==(const Hashtag& o) const { return raw_ == o.raw_; }

 private:
  std::string raw_;
  std::string chars_;
  std::vector<Span> runs_;
};

class Segmentation {
 public:
  Segmentation() = default;

  /// Builds a segmentation from word spans. Spans must be non-empty, in
  /// order, cover every non-underscore character and contain none.
  static Segmentation from_spans(const Hashtag& h, std::vector<Span> spans) {
    Segmentation s;
    std::size_t pos = 0;
    for (const Span& sp : spans) {
      if (sp.begin >= sp.end || sp.end > h.length())
        throw Error("segmentation span out of range for '" + h.raw() + "'");
      while (pos < sp.begin) {
        if (h.raw()[pos] != '_')
          throw Error("segmentation of '" + h.raw() + "' skips characters");
        ++pos;
      }
      if (pos != sp.begin) throw Error("overlapping segmentation spans for '" + h.raw() + "'");
      for (std::size_t i = sp.begin; i < sp.end; ++i)
        if (h.raw()[i] == '_') throw Error("segmentation word of '" + h.raw() + "' contains '_'");
      pos = sp.end;
    }
    while (pos < h.length()) {
      if (h.raw()[pos] != '_') throw Error("segmentation does not reconstruct '" + h.raw() + "'");
      ++pos;
    }
    if (spans.empty()) throw Error("empty segmentation for '" + h.raw() + "'");
    s.spans_ = std::move(spans);
    s.words_.reserve(s.spans_.size());
    s.folded_.reserve(s.spans_.size());
    for (const Span& sp : s.spans_) {
      s.words_.push_back(h.raw().substr(sp.begin, sp.size()));
      s.folded_.push_back(h.chars().substr(sp.begin, sp.size()));
    }
    return s;
  }

  /// Aligns words onto the hashtag (casefolded comparison). Underscores
  /// inside words are treated as boundaries and bare "_" tokens are
  /// dropped. Throws Error if the words do not reconstruct the hashtag.
  static Segmentation from_words(const Hashtag& h, const std::vector<std::string>& words) {
    std::vector<std::string> pieces;
    for (const auto& w : words)
      for (auto& p : split(w, "_"))
        if (!p.empty()) pieces.push_back(casefold(p));

    std::vector<Span> spans;
    std::size_t pos = 0;
    const std::string& chars = h.chars();
    for (const auto& p : pieces) {
      while (pos < chars.size() && chars[pos] == '_') ++pos;
      if (pos + p.size() > chars.size() || chars.compare(pos, p.size(), p) != 0)
        throw Error("gold segmentation '" + join(words, " ") + "' does not reconstruct hashtag '" +
                    h.raw() + "'");
      spans.push_back({pos, pos + p.size()});
      pos += p.size();
    }
    while (pos < chars.size() && chars[pos] == '_') ++pos;
    if (pos != chars.size() || spans.empty())
      throw Error("gold segmentation '" + join(words, " ") + "' does not reconstruct hashtag '" +
                  h.raw() + "'");
    return from_spans(h, std::move(spans));
  }

  static Segmentation from_text(const Hashtag& h, std::string_view space_joined) {
    return from_words(h, split_whitespace(space_joined));
  }

  /// Single-token segmentation per run (the unsplit hashtag).
  static Segmentation unsplit(const Hashtag& h) { return from_spans(h, h.runs()); }

  /// Words in the hashtag's original casing.
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& folded_words() const { return folded_; }
  const std::vector<Span>& spans() const { return spans_; }
  std::size_t size() const { return spans_.size(); }
  bool empty() const { return spans_.empty(); }

  std::string text() const { return join(words_, " "); }
  std::string folded_text() const { return join(folded_, " "); }

  /// Casefolded word-sequence equality.
  bool same_words(const Segmentation& o) const { return folded_ == o.folded_; }
  bool operator==(const Segmentation& o) const { return spans_ == o.spans_ && folded_ == o.folded_; }

 private:
  std::vector<std::string> words_;
  std::vector<std::string> folded_;
  std::vector<Span> spans_;
};

}  // namespace hashseg
