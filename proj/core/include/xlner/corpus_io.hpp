#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlner/types.hpp"

namespace xlner {

// CoNLL: one "token<TAB>tag" row per token, blank line between sentences.
// Runs of blank lines count as one separator; the final one is optional.
std::vector<TaggedSentence> parse_conll(std::string_view text);
std::string write_conll(std::span<const TaggedSentence> corpus);

// JSONL: one {"tokens": [...], "tags": [...]} object per non-empty line.
std::vector<TaggedSentence> parse_jsonl(std::string_view text);
std::string write_jsonl(std::span<const TaggedSentence> corpus);

// Splits on ASCII whitespace; no other normalization.
Tokens split_tokens(std::string_view line);

// Splits text into lines. A trailing newline does not open an extra line and
// a trailing '\r' is stripped from each line.
std::vector<std::string_view> split_lines(std::string_view text);

// One whitespace-tokenized sentence per line on both sides.
std::vector<SentencePair> parse_parallel(std::string_view src_text,
                                         std::string_view tgt_text);
std::vector<Tokens> parse_sentences(std::string_view text);

// Pharaoh "i-j" links, 0-based, space separated.
Alignment parse_pharaoh(std::string_view line);
std::string write_pharaoh(const Alignment& alignment);
std::vector<Alignment> parse_pharaoh_file(std::string_view text);
std::string write_pharaoh_file(std::span<const Alignment> alignments);

// Gold links: "i-j" is sure, "i?j" is possible only.
GoldAlignment parse_gold_alignment(std::string_view line);
std::vector<GoldAlignment> parse_gold_file(std::string_view text);

// Throws DataError when any link falls outside the pair's token counts.
void check_bounds(const Alignment& alignment, const SentencePair& pair);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     std::string_view content);

}  // namespace xlner
