#include "xlner/bio.hpp"

#include <algorithm>

#include "xlner/error.hpp"

namespace xlner {
namespace {

bool valid_label(std::string_view label) {
  if (label.empty()) return false;
  return std::all_of(label.begin(), label.end(), [](char c) {
    return c > ' ' && c < 0x7f;
  });
}

}  // namespace

bool is_valid_tag(std::string_view text) {
  if (text == "O") return true;
  if (text.size() < 3 || text[1] != '-') return false;
  if (text[0] != 'B' && text[0] != 'I') return false;
  return valid_label(text.substr(2));
}

Tag parse_tag(std::string_view text) {
  if (!is_valid_tag(text)) {
    throw ParseError(0, "invalid BIO tag '" + std::string(text) + "'");
  }
  if (text == "O") return {};
  return {text[0] == 'B' ? TagKind::kBegin : TagKind::kInside,
          std::string(text.substr(2))};
}

std::vector<EntitySpan> decode_bio(std::span<const std::string> tags) {
  std::vector<EntitySpan> spans;
  bool open = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    Tag tag = parse_tag(tags[i]);
    if (tag.kind == TagKind::kOutside) {
      open = false;
      continue;
    }
    if (tag.kind == TagKind::kInside && open &&
        spans.back().label == tag.label) {
      spans.back().fragments.back().end = i + 1;
      continue;
    }
    spans.push_back({std::move(tag.label), {{i, i + 1}}});
    open = true;
  }
  return spans;
}

std::vector<std::string> encode_bio(std::span<const EntitySpan> spans,
                                    std::size_t length) {
  std::vector<std::string> tags(length, "O");
  std::vector<bool> covered(length, false);
  for (const EntitySpan& span : spans) {
    if (span.fragments.empty()) {
      throw DataError("entity '" + span.label + "' has no fragments");
    }
    for (const Fragment& frag : span.fragments) {
      if (frag.start >= frag.end || frag.end > length) {
        throw DataError("fragment [" + std::to_string(frag.start) + ", " +
                        std::to_string(frag.end) + ") invalid for length " +
                        std::to_string(length));
      }
      for (std::size_t i = frag.start; i < frag.end; ++i) {
        if (covered[i]) {
          throw DataError("overlapping entities at token " +
                          std::to_string(i));
        }
        covered[i] = true;
        tags[i] = (i == frag.start ? "B-" : "I-") + span.label;
      }
    }
  }
  return tags;
}

std::vector<std::string> normalize_loose(std::span<const std::string> tags) {
  std::vector<std::string> out(tags.begin(), tags.end());
  std::string open_label;
  bool open = false;
  for (std::string& t : out) {
    Tag tag = parse_tag(t);
    if (tag.kind == TagKind::kOutside) {
      open = false;
    } else if (tag.kind == TagKind::kInside &&
               !(open && open_label == tag.label)) {
      t[0] = 'B';
      open = true;
      open_label = tag.label;
    } else {
      open = true;
      open_label = tag.label;
    }
  }
  return out;
}

}  // namespace xlner
