#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xlner/types.hpp"

namespace xlner {

struct AlignerConfig {
  int iterations = 5;
  double tension = 4.0;
  double null_prob = 0.08;
  // Added to every expected count on the co-occurrence support before the
  // M-step renormalizes. Only smoothing = 0 guarantees a non-decreasing
  // likelihood; small values keep it in practice on default settings.
  double smoothing = 0.01;
  // Re-fits the tension after each M-step with a fixed golden-section search
  // on the training likelihood.
  bool optimize_tension = false;
  // Worker threads for the E-step. Results do not depend on this value.
  unsigned threads = 1;

  // Throws DataError on out-of-range values.
  void validate() const;
};

// Lexical translation table t(target | source) plus the diagonal prior
// parameters. Source word kNullWord carries the null-generation distribution.
class AlignmentModel {
 public:
  static constexpr std::string_view kNullWord = "<null>";
  // Stand-in for t(f|e) when the pair was never observed.
  static constexpr double kFloorProb = 1e-9;

  struct Entry {
    std::string source;
    std::string target;
    double prob = 0.0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  AlignmentModel() = default;

  // Builds a model from explicit (source, target, prob) rows.
  static AlignmentModel from_entries(std::vector<Entry> entries,
                                     double tension, double null_prob);

  double tension() const { return tension_; }
  double null_prob() const { return null_prob_; }

  // t(target | source), 0 when the entry does not exist.
  double prob(std::string_view source, std::string_view target) const;

  std::size_t num_entries() const { return probs_.size(); }
  std::size_t num_source_words() const { return source_words_.size(); }
  std::size_t num_target_words() const { return target_words_.size(); }

  // All rows sorted by (source, target).
  std::vector<Entry> entries() const;

  // Largest |Σ_f t(f|e) − 1| over source words with mass.
  double max_normalization_error() const;

  // Prior weight of source position `i` for target position `j` in an
  // n-by-m pair, without the (1 − p0) factor: exp(−λ·|(i+1)/n − (j+1)/m|)
  // normalized over i.
  static std::vector<double> diagonal_prior(std::size_t j, std::size_t n,
                                            std::size_t m, double tension);

 private:
  friend struct ModelAccess;

  int source_id(std::string_view word) const;
  int target_id(std::string_view word) const;
  // Translation probability by id with the floor applied; ids may be -1.
  double lookup(int source, int target) const;
  // CSR slot of (source, target), or -1.
  std::ptrdiff_t slot(int source, int target) const;

  double tension_ = 4.0;
  double null_prob_ = 0.08;
  std::vector<std::string> source_words_;
  std::vector<std::string> target_words_;
  std::unordered_map<std::string, int> source_index_;
  std::unordered_map<std::string, int> target_index_;
  // Row e spans [offsets_[e], offsets_[e + 1]) in targets_/probs_, with
  // targets_ sorted ascending inside each row.
  std::vector<std::size_t> offsets_;
  std::vector<int> targets_;
  std::vector<double> probs_;
  int null_id_ = -1;
};

// Per-iteration diagnostics collected during training.
struct TrainingTrace {
  // Corpus log-likelihood of the model after each M-step (and tension fit).
  std::vector<double> log_likelihood;
  // Likelihood of the initial uniform model.
  double initial_log_likelihood = 0.0;
  std::vector<double> max_normalization_error;
  std::vector<double> tension;
};

// Runs exactly cfg.iterations EM iterations. Throws DataError on an empty
// bitext or a pair with an empty side.
AlignmentModel train(std::span<const SentencePair> bitext,
                     const AlignerConfig& cfg,
                     TrainingTrace* trace = nullptr);

// Source-to-target Viterbi links: every target word links to its best source
// word, or to nothing when null wins. Ties go to null, then to the smaller
// source index.
Alignment viterbi_align(const AlignmentModel& model, const SentencePair& pair);

double log_likelihood(const AlignmentModel& model,
                      std::span<const SentencePair> bitext);

std::string save_model(const AlignmentModel& model);
AlignmentModel load_model(std::string_view text);

void save_model_file(const AlignmentModel& model,
                     const std::filesystem::path& path);
AlignmentModel load_model_file(const std::filesystem::path& path);

}  // namespace xlner
