#include "xlner/aligner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <tuple>
#include <thread>

#include "xlner/corpus_io.hpp"
#include "xlner/error.hpp"

namespace xlner {

namespace {

void fill_prior(std::vector<double>& weights, std::size_t j, std::size_t n,
                std::size_t m, double tension) {
  weights.resize(n);
  const double jpos = static_cast<double>(j + 1) / static_cast<double>(m);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ipos = static_cast<double>(i + 1) / static_cast<double>(n);
    weights[i] = std::exp(-tension * std::abs(ipos - jpos));
    z += weights[i];
  }
  for (double& w : weights) w /= z;
}

// Sentence pairs per E-step work unit. Partial counts are merged in chunk
// order, so the result is independent of the thread count.
constexpr std::size_t kChunkSize = 128;

constexpr double kMinTension = 0.05;
constexpr double kMaxTension = 64.0;
constexpr int kGoldenSteps = 24;

constexpr std::string_view kModelMagic = "xlner-align-model";
constexpr int kModelVersion = 1;

struct EncodedPair {
  std::vector<int> source;
  std::vector<int> target;
  // Training only: table slot of (source i, target j) at j * (n + 1) + i + 1,
  // with the null word at i = -1.
  std::vector<std::uint32_t> slots;
};

// Training corpus plus, per chunk, the sorted table slots it touches.
struct TrainingData {
  std::vector<EncodedPair> pairs;
  std::vector<std::vector<std::uint32_t>> chunk_slots;
};

struct ChunkCounts {
  std::vector<double> counts;  // aligned with the chunk's slot list
  double log_likelihood = 0.0;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

struct ModelAccess {
  static std::vector<EncodedPair> encode(const AlignmentModel& model,
                                         std::span<const SentencePair> bitext) {
    std::vector<EncodedPair> out;
    out.reserve(bitext.size());
    for (const SentencePair& pair : bitext) {
      EncodedPair enc;
      enc.source.reserve(pair.source.size());
      enc.target.reserve(pair.target.size());
      for (const auto& w : pair.source) enc.source.push_back(model.source_id(w));
      for (const auto& w : pair.target) enc.target.push_back(model.target_id(w));
      out.push_back(std::move(enc));
    }
    return out;
  }

  static double pair_log_likelihood(const AlignmentModel& model,
                                    const EncodedPair& pair, double tension) {
    const std::size_t n = pair.source.size();
    const std::size_t m = pair.target.size();
    const double p0 = model.null_prob_;
    std::vector<double> prior;
    double ll = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const int f = pair.target[j];
      fill_prior(prior, j, n, m, tension);
      double total = p0 * model.lookup(model.null_id_, f);
      for (std::size_t i = 0; i < n; ++i) {
        total += (1.0 - p0) * prior[i] * model.lookup(pair.source[i], f);
      }
      ll += std::log(total);
    }
    return ll;
  }

  // Likelihood over the training pairs, read straight from the table. Same
  // chunked summation order as the E-step.
  static double corpus_log_likelihood(const AlignmentModel& model,
                                      const TrainingData& data,
                                      double tension) {
    const auto& corpus = data.pairs;
    const double p0 = model.null_prob_;
    std::vector<double> prior;
    double ll = 0.0;
    for (std::size_t begin = 0; begin < corpus.size(); begin += kChunkSize) {
      const std::size_t end = std::min(corpus.size(), begin + kChunkSize);
      double chunk = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const EncodedPair& pair = corpus[k];
        const std::size_t n = pair.source.size();
        const std::size_t m = pair.target.size();
        for (std::size_t j = 0; j < m; ++j) {
          fill_prior(prior, j, n, m, tension);
          const std::uint32_t* slot = &pair.slots[j * (n + 1)];
          double total = p0 * model.probs_[slot[0]];
          for (std::size_t i = 0; i < n; ++i) {
            total += (1.0 - p0) * prior[i] * model.probs_[slot[i + 1]];
          }
          chunk += std::log(total);
        }
      }
      ll += chunk;
    }
    return ll;
  }

  // Posterior-weighted link counts for chunk `c`. `scratch` is a zeroed
  // array over all table slots and is left zeroed on return.
  static ChunkCounts expected_counts(const AlignmentModel& model,
                                     const TrainingData& data, std::size_t c,
                                     std::vector<double>& scratch) {
    ChunkCounts out;
    std::vector<double> post;
    std::vector<double> prior;
    const double p0 = model.null_prob_;
    const std::size_t begin = c * kChunkSize;
    const std::size_t end = std::min(data.pairs.size(), begin + kChunkSize);
    for (std::size_t k = begin; k < end; ++k) {
      const EncodedPair& pair = data.pairs[k];
      const std::size_t n = pair.source.size();
      const std::size_t m = pair.target.size();
      post.resize(n + 1);
      for (std::size_t j = 0; j < m; ++j) {
        fill_prior(prior, j, n, m, model.tension_);
        const std::uint32_t* slot = &pair.slots[j * (n + 1)];
        post[0] = p0 * model.probs_[slot[0]];
        double total = post[0];
        for (std::size_t i = 0; i < n; ++i) {
          post[i + 1] = (1.0 - p0) * prior[i] * model.probs_[slot[i + 1]];
          total += post[i + 1];
        }
        out.log_likelihood += std::log(total);
        for (std::size_t i = 0; i <= n; ++i) scratch[slot[i]] += post[i] / total;
      }
    }
    const auto& touched = data.chunk_slots[c];
    out.counts.reserve(touched.size());
    for (std::uint32_t s : touched) {
      out.counts.push_back(scratch[s]);
      scratch[s] = 0.0;
    }
    return out;
  }

  static void attach_slots(const AlignmentModel& model, TrainingData& data) {
    if (model.probs_.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw DataError("translation table too large");
    }
    const std::size_t num_chunks = (data.pairs.size() + kChunkSize - 1) / kChunkSize;
    data.chunk_slots.assign(num_chunks, {});
    for (std::size_t k = 0; k < data.pairs.size(); ++k) {
      EncodedPair& pair = data.pairs[k];
      auto& touched = data.chunk_slots[k / kChunkSize];
      pair.slots.clear();
      pair.slots.reserve(pair.target.size() * (pair.source.size() + 1));
      for (int f : pair.target) {
        pair.slots.push_back(static_cast<std::uint32_t>(model.slot(model.null_id_, f)));
        for (int e : pair.source) {
          pair.slots.push_back(static_cast<std::uint32_t>(model.slot(e, f)));
        }
      }
      touched.insert(touched.end(), pair.slots.begin(), pair.slots.end());
    }
    for (auto& touched : data.chunk_slots) {
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    }
  }

  static double e_step(const AlignmentModel& model, const TrainingData& data,
                       unsigned threads, std::vector<double>& counts) {
    const std::size_t num_chunks = data.chunk_slots.size();
    std::vector<ChunkCounts> results(num_chunks);
    const unsigned workers = static_cast<unsigned>(
        std::max<std::size_t>(1, std::min<std::size_t>(threads, num_chunks)));
    auto work = [&](unsigned w) {
      std::vector<double> scratch(model.probs_.size(), 0.0);
      for (std::size_t c = w; c < num_chunks; c += workers) {
        results[c] = expected_counts(model, data, c, scratch);
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    std::fill(counts.begin(), counts.end(), 0.0);
    double ll = 0.0;
    for (std::size_t c = 0; c < num_chunks; ++c) {
      const auto& slots = data.chunk_slots[c];
      for (std::size_t k = 0; k < slots.size(); ++k) {
        counts[slots[k]] += results[c].counts[k];
      }
      ll += results[c].log_likelihood;
    }
    return ll;
  }

  static void m_step(AlignmentModel& model, std::span<const double> counts,
                     double smoothing) {
    for (std::size_t e = 0; e + 1 < model.offsets_.size(); ++e) {
      const std::size_t lo = model.offsets_[e];
      const std::size_t hi = model.offsets_[e + 1];
      double total = 0.0;
      for (std::size_t k = lo; k < hi; ++k) total += counts[k] + smoothing;
      if (total <= 0.0) continue;
      for (std::size_t k = lo; k < hi; ++k) {
        model.probs_[k] = (counts[k] + smoothing) / total;
      }
    }
  }

  // Golden-section search for the tension maximizing the likelihood with the
  // translation table held fixed.
  static double fit_tension(const AlignmentModel& model,
                            const TrainingData& corpus) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = kMinTension;
    double hi = kMaxTension;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = corpus_log_likelihood(model, corpus, x1);
    double f2 = corpus_log_likelihood(model, corpus, x2);
    for (int step = 0; step < kGoldenSteps; ++step) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = corpus_log_likelihood(model, corpus, x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = corpus_log_likelihood(model, corpus, x1);
      }
    }
    // Keep the current value unless the search found a strictly better one.
    const double best = f1 >= f2 ? x1 : x2;
    const double best_ll = std::max(f1, f2);
    return best_ll > corpus_log_likelihood(model, corpus, model.tension_)
               ? best
               : model.tension_;
  }

  static AlignmentModel initialize(std::span<const SentencePair> bitext,
                                   const AlignerConfig& cfg,
                                   std::vector<EncodedPair>& corpus) {
    AlignmentModel model;
    model.tension_ = cfg.tension;
    model.null_prob_ = cfg.null_prob;
    model.null_id_ = 0;
    model.source_words_.emplace_back(AlignmentModel::kNullWord);
    model.source_index_.emplace(AlignmentModel::kNullWord, 0);

    auto intern = [](std::vector<std::string>& words,
                     std::unordered_map<std::string, int>& index,
                     const std::string& w) {
      auto [it, inserted] = index.emplace(w, static_cast<int>(words.size()));
      if (inserted) words.push_back(w);
      return it->second;
    };

    corpus.clear();
    corpus.reserve(bitext.size());
    for (const SentencePair& pair : bitext) {
      EncodedPair enc;
      for (const auto& w : pair.source) {
        enc.source.push_back(intern(model.source_words_, model.source_index_, w));
      }
      for (const auto& w : pair.target) {
        enc.target.push_back(intern(model.target_words_, model.target_index_, w));
      }
      corpus.push_back(std::move(enc));
    }

    // Support of t(·|e): every target word co-occurring with e; the null word
    // co-occurs with everything.
    std::vector<std::vector<int>> support(model.source_words_.size());
    std::vector<int> tgt_unique;
    std::vector<int> src_unique;
    for (const EncodedPair& pair : corpus) {
      tgt_unique.assign(pair.target.begin(), pair.target.end());
      std::sort(tgt_unique.begin(), tgt_unique.end());
      tgt_unique.erase(std::unique(tgt_unique.begin(), tgt_unique.end()),
                       tgt_unique.end());
      src_unique.assign(pair.source.begin(), pair.source.end());
      std::sort(src_unique.begin(), src_unique.end());
      src_unique.erase(std::unique(src_unique.begin(), src_unique.end()),
                       src_unique.end());
      for (int e : src_unique) {
        auto& row = support[static_cast<std::size_t>(e)];
        row.insert(row.end(), tgt_unique.begin(), tgt_unique.end());
      }
    }
    auto& null_row = support[0];
    null_row.resize(model.target_words_.size());
    for (std::size_t f = 0; f < null_row.size(); ++f) {
      null_row[f] = static_cast<int>(f);
    }

    model.offsets_.assign(1, 0);
    for (auto& row : support) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
      const double uniform = 1.0 / static_cast<double>(row.size());
      for (int f : row) {
        model.targets_.push_back(f);
        model.probs_.push_back(uniform);
      }
      model.offsets_.push_back(model.targets_.size());
      std::vector<int>().swap(row);
    }
    return model;
  }

  static Alignment viterbi(const AlignmentModel& model,
                           const SentencePair& pair) {
    Alignment out;
    if (pair.source.empty() || pair.target.empty()) return out;
    const EncodedPair enc = encode(model, std::span(&pair, 1)).front();
    const std::size_t n = enc.source.size();
    const std::size_t m = enc.target.size();
    const double p0 = model.null_prob_;
    std::vector<double> prior;
    for (std::size_t j = 0; j < m; ++j) {
      const int f = enc.target[j];
      fill_prior(prior, j, n, m, model.tension_);
      double best = p0 * model.lookup(model.null_id_, f);
      std::size_t best_i = n;
      for (std::size_t i = 0; i < n; ++i) {
        const double score =
            (1.0 - p0) * prior[i] * model.lookup(enc.source[i], f);
        if (score > best) {
          best = score;
          best_i = i;
        }
      }
      if (best_i < n) out.links.insert({best_i, j});
    }
    return out;
  }

  static AlignmentModel train(std::span<const SentencePair> bitext,
                              const AlignerConfig& cfg, TrainingTrace* trace) {
    cfg.validate();
    if (bitext.empty()) throw DataError("cannot train on an empty bitext");
    for (std::size_t k = 0; k < bitext.size(); ++k) {
      if (bitext[k].source.empty() || bitext[k].target.empty()) {
        throw DataError("sentence pair " + std::to_string(k) +
                        " has an empty side");
      }
    }

    TrainingData corpus;
    AlignmentModel model = initialize(bitext, cfg, corpus.pairs);
    attach_slots(model, corpus);
    std::vector<double> counts(model.probs_.size(), 0.0);
    if (trace) {
      *trace = {};
      trace->initial_log_likelihood =
          corpus_log_likelihood(model, corpus, model.tension_);
    }
    for (int iter = 0; iter < cfg.iterations; ++iter) {
      e_step(model, corpus, cfg.threads, counts);
      m_step(model, counts, cfg.smoothing);
      if (cfg.optimize_tension) {
        model.tension_ = fit_tension(model, corpus);
      }
      if (trace) {
        trace->log_likelihood.push_back(
            corpus_log_likelihood(model, corpus, model.tension_));
        trace->max_normalization_error.push_back(model.max_normalization_error());
        trace->tension.push_back(model.tension_);
      }
    }
    return model;
  }
};

void AlignerConfig::validate() const {
  if (iterations < 1) throw DataError("iterations must be >= 1");
  if (!(tension > 0.0) || !std::isfinite(tension)) {
    throw DataError("tension must be positive");
  }
  if (!(null_prob > 0.0 && null_prob < 1.0)) {
    throw DataError("null probability must lie in (0, 1)");
  }
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
    throw DataError("smoothing must be non-negative");
  }
}

std::vector<double> AlignmentModel::diagonal_prior(std::size_t j,
                                                   std::size_t n,
                                                   std::size_t m,
                                                   double tension) {
  std::vector<double> weights;
  fill_prior(weights, j, n, m, tension);
  return weights;
}

int AlignmentModel::source_id(std::string_view word) const {
  auto it = source_index_.find(std::string(word));
  return it == source_index_.end() ? -1 : it->second;
}

int AlignmentModel::target_id(std::string_view word) const {
  auto it = target_index_.find(std::string(word));
  return it == target_index_.end() ? -1 : it->second;
}

std::ptrdiff_t AlignmentModel::slot(int source, int target) const {
  if (source < 0 || target < 0) return -1;
  const auto lo = targets_.begin() +
                  static_cast<std::ptrdiff_t>(offsets_[static_cast<std::size_t>(source)]);
  const auto hi = targets_.begin() +
                  static_cast<std::ptrdiff_t>(offsets_[static_cast<std::size_t>(source) + 1]);
  auto it = std::lower_bound(lo, hi, target);
  if (it == hi || *it != target) return -1;
  return it - targets_.begin();
}

double AlignmentModel::lookup(int source, int target) const {
  const std::ptrdiff_t s = slot(source, target);
  if (s < 0) return kFloorProb;
  return std::max(probs_[static_cast<std::size_t>(s)], kFloorProb);
}

double AlignmentModel::prob(std::string_view source,
                            std::string_view target) const {
  const std::ptrdiff_t s = slot(source_id(source), target_id(target));
  return s < 0 ? 0.0 : probs_[static_cast<std::size_t>(s)];
}

std::vector<AlignmentModel::Entry> AlignmentModel::entries() const {
  std::vector<Entry> out;
  out.reserve(probs_.size());
  for (std::size_t e = 0; e + 1 < offsets_.size(); ++e) {
    for (std::size_t k = offsets_[e]; k < offsets_[e + 1]; ++k) {
      out.push_back({source_words_[e],
                     target_words_[static_cast<std::size_t>(targets_[k])],
                     probs_[k]});
    }
  }
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  return out;
}

double AlignmentModel::max_normalization_error() const {
  double worst = 0.0;
  for (std::size_t e = 0; e + 1 < offsets_.size(); ++e) {
    if (offsets_[e] == offsets_[e + 1]) continue;
    double sum = 0.0;
    for (std::size_t k = offsets_[e]; k < offsets_[e + 1]; ++k) sum += probs_[k];
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

AlignmentModel AlignmentModel::from_entries(std::vector<Entry> entries,
                                            double tension, double null_prob) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  AlignmentModel model;
  model.tension_ = tension;
  model.null_prob_ = null_prob;

  std::vector<std::string> targets;
  targets.reserve(entries.size());
  for (const Entry& e : entries) targets.push_back(e.target);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  model.target_words_ = std::move(targets);
  for (std::size_t f = 0; f < model.target_words_.size(); ++f) {
    model.target_index_.emplace(model.target_words_[f], static_cast<int>(f));
  }

  model.offsets_.assign(1, 0);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    if (!(e.prob >= 0.0 && e.prob <= 1.0)) {
      throw DataError("probability out of range for '" + e.source + " " +
                      e.target + "'");
    }
    if (k > 0 && entries[k - 1].source == e.source &&
        entries[k - 1].target == e.target) {
      throw DataError("duplicate entry '" + e.source + " " + e.target + "'");
    }
    if (k == 0 || entries[k - 1].source != e.source) {
      if (k > 0) model.offsets_.push_back(model.targets_.size());
      model.source_index_.emplace(e.source,
                                  static_cast<int>(model.source_words_.size()));
      model.source_words_.push_back(e.source);
    }
    model.targets_.push_back(model.target_index_.at(e.target));
    model.probs_.push_back(e.prob);
  }
  if (!entries.empty()) model.offsets_.push_back(model.targets_.size());
  model.null_id_ = model.source_id(kNullWord);
  return model;
}

AlignmentModel train(std::span<const SentencePair> bitext,
                     const AlignerConfig& cfg, TrainingTrace* trace) {
  return ModelAccess::train(bitext, cfg, trace);
}

Alignment viterbi_align(const AlignmentModel& model, const SentencePair& pair) {
  return ModelAccess::viterbi(model, pair);
}

double log_likelihood(const AlignmentModel& model,
                      std::span<const SentencePair> bitext) {
  double ll = 0.0;
  for (const auto& pair : ModelAccess::encode(model, bitext)) {
    ll += ModelAccess::pair_log_likelihood(model, pair, model.tension());
  }
  return ll;
}

std::string save_model(const AlignmentModel& model) {
  const auto rows = model.entries();
  std::string out;
  out += kModelMagic;
  out += ' ';
  out += std::to_string(kModelVersion);
  out += "\ntension " + format_double(model.tension());
  out += "\nnull_prob " + format_double(model.null_prob());
  out += "\nentries " + std::to_string(rows.size()) + '\n';
  for (const auto& row : rows) {
    out += row.source;
    out += ' ';
    out += row.target;
    out += ' ';
    out += format_double(row.prob);
    out += '\n';
  }
  return out;
}

namespace {

double parse_double(std::string_view text, std::size_t line) {
  // from_chars for double is not available everywhere; strtod on a copy.
  std::string copy(text);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size() || !std::isfinite(v)) {
    throw ParseError(line, "bad number '" + copy + "'");
  }
  return v;
}

std::string_view header_value(std::string_view line, std::string_view key,
                              std::size_t line_no) {
  const Tokens fields = split_tokens(line);
  if (fields.size() != 2 || fields[0] != key) {
    throw ParseError(line_no, "expected '" + std::string(key) + " <value>'");
  }
  return line.substr(line.rfind(fields[1]));
}

}  // namespace

AlignmentModel load_model(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(1, "empty model file");
  const Tokens magic = split_tokens(lines[0]);
  if (magic.size() != 2 || magic[0] != kModelMagic) {
    throw ParseError(1, "not an alignment model file");
  }
  if (magic[1] != std::to_string(kModelVersion)) {
    throw ParseError(1, "unsupported model version '" + magic[1] + "'");
  }
  if (lines.size() < 4) throw ParseError(lines.size(), "truncated header");
  const double tension = parse_double(header_value(lines[1], "tension", 2), 2);
  const double null_prob =
      parse_double(header_value(lines[2], "null_prob", 3), 3);
  const std::string count_text(header_value(lines[3], "entries", 4));
  std::size_t count = 0;
  {
    auto [ptr, ec] = std::from_chars(count_text.data(),
                                     count_text.data() + count_text.size(),
                                     count);
    if (ec != std::errc() || ptr != count_text.data() + count_text.size()) {
      throw ParseError(4, "bad entry count");
    }
  }
  if (lines.size() - 4 != count) {
    throw ParseError(lines.size(), "expected " + std::to_string(count) +
                                       " entries, found " +
                                       std::to_string(lines.size() - 4));
  }
  std::vector<AlignmentModel::Entry> rows;
  rows.reserve(count);
  for (std::size_t k = 4; k < lines.size(); ++k) {
    Tokens fields = split_tokens(lines[k]);
    if (fields.size() != 3) throw ParseError(k + 1, "expected 'source target prob'");
    rows.push_back({std::move(fields[0]), std::move(fields[1]),
                    parse_double(fields[2], k + 1)});
  }
  try {
    return AlignmentModel::from_entries(std::move(rows), tension, null_prob);
  } catch (const DataError& e) {
    throw ParseError(0, e.what());
  }
}

void save_model_file(const AlignmentModel& model,
                     const std::filesystem::path& path) {
  write_text_file(path, save_model(model));
}

AlignmentModel load_model_file(const std::filesystem::path& path) {
  return load_model(read_text_file(path));
}

}  // namespace xlner
