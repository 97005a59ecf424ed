#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "xlner/types.hpp"

namespace xlner {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct LabelScore {
  Prf prf;
  std::size_t gold_count = 0;
  std::size_t pred_count = 0;
  std::size_t match_count = 0;
};

struct EvalReport {
  // Every label seen in gold or predictions.
  std::map<std::string, LabelScore> per_label;
  Prf micro;
  // Mean per-label f1 over labels with gold_count > 0 (0 when none).
  double macro_f1 = 0.0;
  std::size_t gold_count = 0;
  std::size_t pred_count = 0;
  std::size_t match_count = 0;
};

// Precision/recall/f1 from counts; every ratio with a zero denominator is 0.
Prf make_prf(std::size_t matches, std::size_t predicted, std::size_t gold);

// Entity-level exact-match scores. Entities are decode_bio spans; a match
// needs the same sentence, label, start and end. Throws DataError on corpus
// or sentence length mismatches, naming the first offending sentence.
EvalReport ner_prf(std::span<const TaggedSentence> gold,
                   std::span<const TaggedSentence> pred);

struct AerReport {
  double aer = 0.0;
  std::size_t predicted = 0;
  std::size_t sure = 0;
  std::size_t possible = 0;
  std::size_t hits_sure = 0;
  std::size_t hits_possible = 0;
};

// Alignment error rate pooled over the corpus:
// 1 − (|A∩S| + |A∩P|) / (|A| + |S|), 0 when |A| + |S| = 0.
AerReport aer_report(std::span<const Alignment> pred,
                     std::span<const GoldAlignment> gold);
double aer(std::span<const Alignment> pred,
           std::span<const GoldAlignment> gold);

struct BleuReport {
  double score = 0.0;
  std::vector<double> precisions;
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  double brevity_penalty = 1.0;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;
};

// Corpus BLEU with clipped n-gram counts pooled over all sentences and a
// single reference per hypothesis. `smooth` adds one to matches and totals
// for n > 1.
BleuReport corpus_bleu(std::span<const Tokens> hyps,
                       std::span<const Tokens> refs, int max_n = 4,
                       bool smooth = false);

struct LabelStats {
  std::map<std::string, std::size_t> counts;
  std::size_t sentences = 0;
  std::size_t entities = 0;
  std::size_t tokens = 0;
};

// Entity counts per label at the BIO level (one per decoded run).
LabelStats label_distribution(std::span<const TaggedSentence> corpus);

}  // namespace xlner
