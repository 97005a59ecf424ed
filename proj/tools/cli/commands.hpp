#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "xlner/types.hpp"

namespace xlner::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Parses argv and runs one subcommand. Never throws; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

// Reads a tagged corpus; ".jsonl" files use the JSONL reader, anything else
// is CoNLL.
std::vector<TaggedSentence> load_corpus(const std::filesystem::path& path);

enum class SelectMetric { kBleu, kAer };

struct Candidate {
  std::string name;
  std::filesystem::path file;
};

struct CandidateScore {
  std::string name;
  double value = 0.0;
  std::size_t rank = 0;
};

struct SelectionReport {
  SelectMetric metric = SelectMetric::kBleu;
  // Best first.
  std::vector<CandidateScore> ranking;
};

// Orders scores best first: BLEU descending, AER ascending, ties by name.
// Ranks are 1-based.
std::vector<CandidateScore> rank_scores(std::vector<CandidateScore> scores,
                                        SelectMetric metric);

struct SelectOptions {
  SelectMetric metric = SelectMetric::kBleu;
  std::filesystem::path reference;  // references (bleu) or gold links (aer)
  int max_n = 4;
  bool smooth = false;
};

// Scores every candidate file against the reference and ranks them. Errors
// name the offending candidate.
SelectionReport select_candidates(std::span<const Candidate> candidates,
                                  const SelectOptions& options);

}  // namespace xlner::cli
