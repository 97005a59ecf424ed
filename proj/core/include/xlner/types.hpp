#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace xlner {

using Tokens = std::vector<std::string>;

struct Token {
  std::string text;
  std::size_t index = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

// Half-open token range [start, end).
struct Fragment {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  friend auto operator<=>(const Fragment&, const Fragment&) = default;
};

// A labeled entity. After projection it may consist of several disjoint
// fragments, kept sorted and non-overlapping.
struct EntitySpan {
  std::string label;
  std::vector<Fragment> fragments;

  std::size_t first() const { return fragments.front().start; }
  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

struct TaggedSentence {
  Tokens tokens;
  std::vector<std::string> tags;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const TaggedSentence&, const TaggedSentence&) =
      default;
};

struct SentencePair {
  Tokens source;
  Tokens target;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

struct Link {
  std::size_t source = 0;
  std::size_t target = 0;

  friend auto operator<=>(const Link&, const Link&) = default;
};

// Word alignment between one sentence pair. The set keeps links sorted by
// (source, target) and free of duplicates.
struct Alignment {
  std::set<Link> links;

  bool empty() const { return links.empty(); }
  std::size_t size() const { return links.size(); }
  friend bool operator==(const Alignment&, const Alignment&) = default;
};

// Gold alignment with sure links S and possible links P, S ⊆ P.
struct GoldAlignment {
  std::set<Link> sure;
  std::set<Link> possible;

  friend bool operator==(const GoldAlignment&, const GoldAlignment&) = default;
};

}  // namespace xlner
