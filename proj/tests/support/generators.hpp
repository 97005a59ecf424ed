// Seeded random inputs for property tests.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "xlner/types.hpp"

namespace xlner::gen {

using Rng = std::mt19937_64;

inline const std::vector<std::string>& labels() {
  static const std::vector<std::string> kLabels = {
      "DRUG", "STRENGTH", "FREQUENCY", "DURATION", "DOSAGE", "FORM"};
  return kLabels;
}

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p) {
  return std::bernoulli_distribution(p)(rng);
}

// Any syntactically valid tag sequence, orphan I- tags included.
inline std::vector<std::string> tags(Rng& rng, std::size_t len,
                                     std::size_t num_labels = 3) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t kind = uniform(rng, 0, 2);
    const std::string& label = labels()[uniform(rng, 0, num_labels - 1)];
    out.push_back(kind == 0 ? "O" : (kind == 1 ? "B-" : "I-") + label);
  }
  return out;
}

inline std::string word(Rng& rng) {
  static const std::vector<std::string> kWords = {
      "Iron", "50",  "mg",     "Tablet", "PO",   "daily", "once", "a",
      "day",  "at",  "bedtime", "mg/kg", "x",    "für",   "é",    "par",
      "jour", "Sig:", "(1)",   "q.d.",   "IV",   "units", "PRBC", "Nacht"};
  return kWords[uniform(rng, 0, kWords.size() - 1)];
}

inline Tokens tokens(Rng& rng, std::size_t len) {
  Tokens out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(word(rng));
  return out;
}

inline TaggedSentence sentence(Rng& rng, std::size_t max_len) {
  const std::size_t len = uniform(rng, 1, max_len);
  return {tokens(rng, len), tags(rng, len)};
}

inline std::vector<TaggedSentence> corpus(Rng& rng, std::size_t max_sentences,
                                          std::size_t max_len) {
  std::vector<TaggedSentence> out(uniform(rng, 0, max_sentences));
  for (auto& s : out) s = sentence(rng, max_len);
  return out;
}

// Non-overlapping spans over [0, len), each with 1-3 fragments.
inline std::vector<EntitySpan> spans(Rng& rng, std::size_t len,
                                     std::size_t num_labels = 3) {
  std::vector<EntitySpan> out;
  std::size_t pos = 0;
  while (pos < len) {
    pos += uniform(rng, 0, 2);
    if (pos >= len) break;
    EntitySpan span{labels()[uniform(rng, 0, num_labels - 1)], {}};
    const std::size_t frags = uniform(rng, 1, 3);
    for (std::size_t f = 0; f < frags && pos < len; ++f) {
      const std::size_t size = uniform(rng, 1, std::min<std::size_t>(3, len - pos));
      span.fragments.push_back({pos, pos + size});
      pos += size + 1;  // leave a gap so fragments stay disjoint
    }
    out.push_back(span);
  }
  return out;
}

inline Alignment alignment(Rng& rng, std::size_t n, std::size_t m,
                           double density) {
  Alignment a;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (coin(rng, density)) a.links.insert({i, j});
    }
  }
  return a;
}

inline GoldAlignment gold(Rng& rng, std::size_t n, std::size_t m,
                          double density) {
  GoldAlignment g;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!coin(rng, density)) continue;
      g.possible.insert({i, j});
      if (coin(rng, 0.6)) g.sure.insert({i, j});
    }
  }
  return g;
}

}  // namespace xlner::gen
