#include "xlner/corpus_io.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "xlner/bio.hpp"
#include "xlner/error.hpp"

namespace xlner {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_blank(std::string_view line) {
  for (char c : line) {
    if (!is_space(c)) return false;
  }
  return true;
}

void check_sentence(const TaggedSentence& s, std::size_t line) {
  if (s.tokens.size() != s.tags.size()) {
    throw ParseError(line, "token/tag count mismatch (" +
                               std::to_string(s.tokens.size()) + " vs " +
                               std::to_string(s.tags.size()) + ")");
  }
  for (const std::string& tok : s.tokens) {
    if (tok.empty()) throw ParseError(line, "empty token");
    for (char c : tok) {
      if (is_space(c)) {
        throw ParseError(line, "token '" + tok + "' contains whitespace");
      }
    }
  }
  for (const std::string& tag : s.tags) {
    if (!is_valid_tag(tag)) {
      throw ParseError(line, "invalid BIO tag '" + tag + "'");
    }
  }
}

std::size_t parse_index(std::string_view text, std::size_t line,
                        std::string_view link) {
  std::size_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw ParseError(line, "bad alignment link '" + std::string(link) + "'");
  }
  return value;
}

// Parses one "i<sep>j" link, where sep is '-' or (gold only) '?'.
Link parse_link(std::string_view item, bool allow_possible, bool& possible,
                std::size_t line) {
  std::size_t pos = item.find('-');
  possible = false;
  if (pos == std::string_view::npos && allow_possible) {
    pos = item.find('?');
    possible = pos != std::string_view::npos;
  }
  if (pos == std::string_view::npos) {
    throw ParseError(line, "bad alignment link '" + std::string(item) + "'");
  }
  return {parse_index(item.substr(0, pos), line, item),
          parse_index(item.substr(pos + 1), line, item)};
}

GoldAlignment parse_links(std::string_view text, bool allow_possible,
                          std::size_t line) {
  GoldAlignment out;
  for (const std::string& item : split_tokens(text)) {
    bool possible = false;
    Link link = parse_link(item, allow_possible, possible, line);
    if (!possible) out.sure.insert(link);
    out.possible.insert(link);
  }
  return out;
}

}  // namespace

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t begin = 0;
  while (begin < text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    begin = end + 1;
  }
  return lines;
}

Tokens split_tokens(std::string_view line) {
  Tokens tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.emplace_back(line.substr(start, i - start));
  }
  return tokens;
}

std::vector<TaggedSentence> parse_conll(std::string_view text) {
  std::vector<TaggedSentence> corpus;
  TaggedSentence current;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (is_blank(line)) {
      if (!current.tokens.empty()) corpus.push_back(std::move(current));
      current = {};
      continue;
    }
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos ||
        line.find('\t', tab + 1) != std::string_view::npos) {
      throw ParseError(line_no, "expected 'token<TAB>tag'");
    }
    TaggedSentence row{{std::string(line.substr(0, tab))},
                       {std::string(line.substr(tab + 1))}};
    check_sentence(row, line_no);
    current.tokens.push_back(std::move(row.tokens[0]));
    current.tags.push_back(std::move(row.tags[0]));
  }
  if (!current.tokens.empty()) corpus.push_back(std::move(current));
  return corpus;
}

std::string write_conll(std::span<const TaggedSentence> corpus) {
  std::string out;
  for (const TaggedSentence& s : corpus) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out += s.tokens[i];
      out += '\t';
      out += s.tags[i];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::vector<TaggedSentence> parse_jsonl(std::string_view text) {
  std::vector<TaggedSentence> corpus;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (is_blank(line)) continue;
    TaggedSentence s;
    try {
      nlohmann::json obj = nlohmann::json::parse(line);
      s.tokens = obj.at("tokens").get<Tokens>();
      s.tags = obj.at("tags").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    check_sentence(s, line_no);
    if (s.tokens.empty()) throw ParseError(line_no, "empty sentence");
    corpus.push_back(std::move(s));
  }
  return corpus;
}

std::string write_jsonl(std::span<const TaggedSentence> corpus) {
  std::string out;
  for (const TaggedSentence& s : corpus) {
    nlohmann::json obj = {{"tokens", s.tokens}, {"tags", s.tags}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<Tokens> parse_sentences(std::string_view text) {
  std::vector<Tokens> sentences;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    Tokens tokens = split_tokens(line);
    if (tokens.empty()) throw ParseError(line_no, "empty sentence");
    sentences.push_back(std::move(tokens));
  }
  return sentences;
}

std::vector<SentencePair> parse_parallel(std::string_view src_text,
                                         std::string_view tgt_text) {
  auto src_lines = split_lines(src_text);
  auto tgt_lines = split_lines(tgt_text);
  if (src_lines.size() != tgt_lines.size()) {
    throw DataError("parallel text line counts differ: " +
                    std::to_string(src_lines.size()) + " source vs " +
                    std::to_string(tgt_lines.size()) + " target");
  }
  std::vector<SentencePair> pairs;
  pairs.reserve(src_lines.size());
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    SentencePair pair{split_tokens(src_lines[i]), split_tokens(tgt_lines[i])};
    if (pair.source.empty()) throw ParseError(i + 1, "empty source sentence");
    if (pair.target.empty()) throw ParseError(i + 1, "empty target sentence");
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

Alignment parse_pharaoh(std::string_view line) {
  return {parse_links(line, false, 0).sure};
}

std::string write_pharaoh(const Alignment& alignment) {
  std::string out;
  for (const Link& link : alignment.links) {
    if (!out.empty()) out += ' ';
    out += std::to_string(link.source);
    out += '-';
    out += std::to_string(link.target);
  }
  return out;
}

std::vector<Alignment> parse_pharaoh_file(std::string_view text) {
  std::vector<Alignment> out;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    out.push_back({parse_links(line, false, ++line_no).sure});
  }
  return out;
}

std::string write_pharaoh_file(std::span<const Alignment> alignments) {
  std::string out;
  for (const Alignment& a : alignments) {
    out += write_pharaoh(a);
    out += '\n';
  }
  return out;
}

GoldAlignment parse_gold_alignment(std::string_view line) {
  return parse_links(line, true, 0);
}

std::vector<GoldAlignment> parse_gold_file(std::string_view text) {
  std::vector<GoldAlignment> out;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    out.push_back(parse_links(line, true, ++line_no));
  }
  return out;
}

void check_bounds(const Alignment& alignment, const SentencePair& pair) {
  for (const Link& link : alignment.links) {
    if (link.source >= pair.source.size() ||
        link.target >= pair.target.size()) {
      throw DataError("link " + std::to_string(link.source) + "-" +
                      std::to_string(link.target) + " out of range for " +
                      std::to_string(pair.source.size()) + "x" +
                      std::to_string(pair.target.size()) + " pair");
    }
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path,
                     std::string_view content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace xlner
