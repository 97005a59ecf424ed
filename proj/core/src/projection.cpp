#include "xlner/projection.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>

#include "xlner/bio.hpp"
#include "xlner/corpus_io.hpp"

namespace xlner {
namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct Claim {
  std::size_t entity;
  std::size_t links;
};

std::size_t resolve(std::span<const Claim> claims, CollisionPolicy policy) {
  // Claims are kept in ascending entity order.
  if (claims.size() == 1) return claims.front().entity;
  switch (policy) {
    case CollisionPolicy::kLeftmostEntity:
      return claims.front().entity;
    case CollisionPolicy::kDropToken:
      return kNone;
    case CollisionPolicy::kMostLinks:
      break;
  }
  const Claim* best = &claims.front();
  for (const Claim& c : claims) {
    if (c.links > best->links) best = &c;
  }
  return best->entity;
}

std::vector<Fragment> runs(std::span<const std::size_t> tokens) {
  std::vector<Fragment> out;
  for (std::size_t t : tokens) {
    if (!out.empty() && out.back().end == t) {
      out.back().end = t + 1;
    } else {
      out.push_back({t, t + 1});
    }
  }
  return out;
}

// One fragment from the first to the last owned token, not crossing tokens
// owned by another entity. When foreign tokens sit in the gap, the segment
// between them holding the most owned tokens wins (leftmost on ties).
Fragment merged(std::span<const std::size_t> tokens,
                std::span<const std::size_t> owner, std::size_t entity) {
  std::optional<Fragment> best;
  std::size_t best_count = 0;
  std::size_t seg_first = kNone;
  std::size_t seg_last = kNone;
  std::size_t seg_count = 0;
  auto close = [&] {
    if (seg_count > best_count) {
      best = Fragment{seg_first, seg_last + 1};
      best_count = seg_count;
    }
    seg_first = seg_last = kNone;
    seg_count = 0;
  };
  for (std::size_t t = tokens.front(); t <= tokens.back(); ++t) {
    if (owner[t] == entity) {
      if (seg_first == kNone) seg_first = t;
      seg_last = t;
      ++seg_count;
    } else if (owner[t] != kNone) {
      close();
    }
  }
  close();
  return *best;
}

bool contiguous(std::span<const std::size_t> tokens) {
  return tokens.back() - tokens.front() + 1 == tokens.size();
}

}  // namespace

GapStrategy parse_gap_strategy(std::string_view name) {
  if (name == "keep-split") return GapStrategy::kKeepSplit;
  if (name == "merge-gaps") return GapStrategy::kMergeGaps;
  throw DataError("unknown gap strategy '" + std::string(name) + "'");
}

CollisionPolicy parse_collision_policy(std::string_view name) {
  if (name == "most-links") return CollisionPolicy::kMostLinks;
  if (name == "leftmost-entity") return CollisionPolicy::kLeftmostEntity;
  if (name == "drop-token") return CollisionPolicy::kDropToken;
  throw DataError("unknown collision policy '" + std::string(name) + "'");
}

UnalignedPolicy parse_unaligned_policy(std::string_view name) {
  if (name == "drop") return UnalignedPolicy::kDrop;
  if (name == "error") return UnalignedPolicy::kError;
  throw DataError("unknown unaligned-entity policy '" + std::string(name) +
                  "'");
}

ProjectionReport& ProjectionReport::operator+=(const ProjectionReport& other) {
  entities_in += other.entities_in;
  entities_projected += other.entities_projected;
  entities_dropped_unaligned += other.entities_dropped_unaligned;
  entities_split += other.entities_split;
  token_collisions += other.token_collisions;
  return *this;
}

SpanProjection project_spans(std::span<const EntitySpan> src_spans,
                             const Alignment& alignment, std::size_t tgt_len,
                             const ProjectionConfig& cfg) {
  SpanProjection out;
  out.report.entities_in = src_spans.size();

  // Entities in source order; ties cannot occur for non-overlapping spans.
  std::vector<std::size_t> order(src_spans.size());
  std::iota(order.begin(), order.end(), 0);
  for (const EntitySpan& span : src_spans) {
    if (span.fragments.empty()) {
      throw DataError("entity '" + span.label + "' has no fragments");
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return src_spans[a].first() < src_spans[b].first();
  });

  // Source token -> rank of the owning entity in `order`.
  std::size_t src_extent = 0;
  for (const EntitySpan& span : src_spans) {
    for (const Fragment& f : span.fragments) {
      src_extent = std::max(src_extent, f.end);
    }
  }
  std::vector<std::size_t> src_owner(src_extent, kNone);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    for (const Fragment& f : src_spans[order[rank]].fragments) {
      if (f.start >= f.end) throw DataError("empty source fragment");
      for (std::size_t i = f.start; i < f.end; ++i) {
        if (src_owner[i] != kNone) {
          throw DataError("overlapping source entities at token " +
                          std::to_string(i));
        }
        src_owner[i] = rank;
      }
    }
  }

  // Target token -> claims, each claim counting supporting links.
  std::vector<std::vector<Claim>> claims(tgt_len);
  for (const Link& link : alignment.links) {
    if (link.target >= tgt_len) {
      throw DataError("link " + std::to_string(link.source) + "-" +
                      std::to_string(link.target) +
                      " out of range for target length " +
                      std::to_string(tgt_len));
    }
    if (link.source >= src_extent || src_owner[link.source] == kNone) continue;
    const std::size_t rank = src_owner[link.source];
    auto& c = claims[link.target];
    auto it = std::lower_bound(
        c.begin(), c.end(), rank,
        [](const Claim& x, std::size_t r) { return x.entity < r; });
    if (it != c.end() && it->entity == rank) {
      ++it->links;
    } else {
      c.insert(it, {rank, 1});
    }
  }

  std::vector<bool> reached(order.size(), false);
  std::vector<std::size_t> tgt_owner(tgt_len, kNone);
  for (std::size_t j = 0; j < tgt_len; ++j) {
    if (claims[j].empty()) continue;
    for (const Claim& c : claims[j]) reached[c.entity] = true;
    if (claims[j].size() > 1) ++out.report.token_collisions;
    tgt_owner[j] = resolve(claims[j], cfg.collision_policy);
  }

  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!reached[rank] && cfg.unaligned_policy == UnalignedPolicy::kError) {
      const EntitySpan& span = src_spans[order[rank]];
      throw UnalignedEntityError("entity '" + span.label + "' at token " +
                                 std::to_string(span.first()) +
                                 " has no aligned target token");
    }
  }

  std::vector<std::vector<std::size_t>> owned(order.size());
  for (std::size_t j = 0; j < tgt_len; ++j) {
    if (tgt_owner[j] != kNone) owned[tgt_owner[j]].push_back(j);
  }

  std::vector<bool> covered(tgt_len, false);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto& tokens = owned[rank];
    if (tokens.empty()) {
      ++out.report.entities_dropped_unaligned;
      continue;
    }
    ++out.report.entities_projected;
    if (!contiguous(tokens)) ++out.report.entities_split;
    EntitySpan span{src_spans[order[rank]].label, {}};
    if (cfg.gap_strategy == GapStrategy::kKeepSplit) {
      span.fragments = runs(tokens);
    } else {
      span.fragments = {merged(tokens, tgt_owner, rank)};
    }
    for (const Fragment& f : span.fragments) {
      for (std::size_t j = f.start; j < f.end; ++j) {
        if (covered[j]) {
          throw Error("internal: projected entities overlap at token " +
                      std::to_string(j));
        }
        covered[j] = true;
      }
    }
    out.spans.push_back(std::move(span));
  }
  std::stable_sort(out.spans.begin(), out.spans.end(),
                   [](const EntitySpan& a, const EntitySpan& b) {
                     return a.first() < b.first();
                   });
  return out;
}

CorpusProjection project_corpus(std::span<const TaggedSentence> labeled_src,
                                std::span<const SentencePair> pairs,
                                std::span<const Alignment> alignments,
                                const ProjectionConfig& cfg) {
  if (labeled_src.size() != pairs.size() ||
      pairs.size() != alignments.size()) {
    throw DataError("corpus size mismatch: " +
                    std::to_string(labeled_src.size()) + " labeled, " +
                    std::to_string(pairs.size()) + " pairs, " +
                    std::to_string(alignments.size()) + " alignments");
  }
  CorpusProjection out;
  out.sentences.reserve(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const std::string where = "sentence " + std::to_string(k + 1) + ": ";
    try {
      if (labeled_src[k].size() != pairs[k].source.size()) {
        throw DataError("labeled sentence has " +
                        std::to_string(labeled_src[k].size()) +
                        " tokens but the pair source has " +
                        std::to_string(pairs[k].source.size()));
      }
      check_bounds(alignments[k], pairs[k]);
      const auto spans = decode_bio(labeled_src[k].tags);
      auto projected = project_spans(spans, alignments[k],
                                     pairs[k].target.size(), cfg);
      out.sentences.push_back(
          {pairs[k].target,
           encode_bio(projected.spans, pairs[k].target.size())});
      out.report += projected.report;
    } catch (const UnalignedEntityError& e) {
      throw UnalignedEntityError(where + e.what());
    } catch (const ParseError& e) {
      throw ParseError(0, where + e.what());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  }
  return out;
}

CorpusProjection back_project_corpus(
    std::span<const TaggedSentence> pred_on_translation,
    std::span<const SentencePair> pairs, std::span<const Alignment> alignments,
    const ProjectionConfig& cfg) {
  return project_corpus(pred_on_translation, pairs, alignments, cfg);
}

std::vector<std::pair<Token, Token>> extract_aligned_pairs(
    const SentencePair& pair, const Alignment& alignment) {
  check_bounds(alignment, pair);
  std::vector<std::pair<Token, Token>> out;
  out.reserve(alignment.size());
  for (const Link& link : alignment.links) {
    out.emplace_back(Token{pair.source[link.source], link.source},
                     Token{pair.target[link.target], link.target});
  }
  return out;
}

}  // namespace xlner
