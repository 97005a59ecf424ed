#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "xlner/error.hpp"
#include "xlner/types.hpp"

namespace xlner {

enum class GapStrategy { kKeepSplit, kMergeGaps };
enum class CollisionPolicy { kMostLinks, kLeftmostEntity, kDropToken };
enum class UnalignedPolicy { kDrop, kError };

struct ProjectionConfig {
  GapStrategy gap_strategy = GapStrategy::kKeepSplit;
  CollisionPolicy collision_policy = CollisionPolicy::kMostLinks;
  UnalignedPolicy unaligned_policy = UnalignedPolicy::kDrop;
};

// Command-line spellings: keep-split / merge-gaps, most-links /
// leftmost-entity / drop-token, drop / error.
GapStrategy parse_gap_strategy(std::string_view name);
CollisionPolicy parse_collision_policy(std::string_view name);
UnalignedPolicy parse_unaligned_policy(std::string_view name);

struct ProjectionReport {
  std::size_t entities_in = 0;
  std::size_t entities_projected = 0;
  // Entities with no surviving target token, either because no link leaves
  // them or because collisions took every token they reached.
  std::size_t entities_dropped_unaligned = 0;
  // Projected entities whose target tokens are not contiguous.
  std::size_t entities_split = 0;
  // Target tokens reached by more than one entity.
  std::size_t token_collisions = 0;

  ProjectionReport& operator+=(const ProjectionReport& other);
  friend bool operator==(const ProjectionReport&,
                         const ProjectionReport&) = default;
};

class UnalignedEntityError : public DataError {
 public:
  using DataError::DataError;
};

struct SpanProjection {
  std::vector<EntitySpan> spans;
  ProjectionReport report;
};

struct CorpusProjection {
  std::vector<TaggedSentence> sentences;
  ProjectionReport report;
};

// Projects source entities onto the target side. An entity reaches every
// target token linked to one of its source tokens; tokens reached by several
// entities are settled by the collision policy, then each entity's tokens
// become fragments (keep-split) or one covering fragment (merge-gaps).
// Output spans are sorted by first token.
SpanProjection project_spans(std::span<const EntitySpan> src_spans,
                             const Alignment& alignment, std::size_t tgt_len,
                             const ProjectionConfig& cfg = {});

// Translate-train: labels on pair sources are projected onto the targets.
CorpusProjection project_corpus(std::span<const TaggedSentence> labeled_src,
                                std::span<const SentencePair> pairs,
                                std::span<const Alignment> alignments,
                                const ProjectionConfig& cfg = {});

// Translate-test: predictions made on the translation (the pair source) are
// carried back to the original sentence (the pair target).
CorpusProjection back_project_corpus(
    std::span<const TaggedSentence> pred_on_translation,
    std::span<const SentencePair> pairs, std::span<const Alignment> alignments,
    const ProjectionConfig& cfg = {});

// One (source token, target token) pair per link, in link order.
std::vector<std::pair<Token, Token>> extract_aligned_pairs(
    const SentencePair& pair, const Alignment& alignment);

}  // namespace xlner
