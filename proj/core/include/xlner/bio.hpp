#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlner/types.hpp"

namespace xlner {

enum class TagKind { kOutside, kBegin, kInside };

struct Tag {
  TagKind kind = TagKind::kOutside;
  std::string label;

  friend bool operator==(const Tag&, const Tag&) = default;
};

// Parses "O", "B-<label>" or "I-<label>". Labels are non-empty printable
// ASCII without whitespace; the label set itself is open.
Tag parse_tag(std::string_view text);
bool is_valid_tag(std::string_view text);

// Maximal B/I runs become single-fragment spans, sorted by start. An I-X
// that does not continue an X run opens a new entity, as if it were B-X.
std::vector<EntitySpan> decode_bio(std::span<const std::string> tags);

// Emits every fragment of every span as its own B-/I- run; uncovered
// positions become "O". Throws DataError naming the first token covered by
// two spans, or when a fragment is empty or out of range.
std::vector<std::string> encode_bio(std::span<const EntitySpan> spans,
                                    std::size_t length);

// Rewrites orphan I-X tags to B-X. encode_bio(decode_bio(t)) equals this.
std::vector<std::string> normalize_loose(std::span<const std::string> tags);

}  // namespace xlner
