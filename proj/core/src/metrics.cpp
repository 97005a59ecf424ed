#include "xlner/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <unordered_map>

#include "xlner/bio.hpp"
#include "xlner/error.hpp"

namespace xlner {
namespace {

using SpanKey = std::tuple<std::string, std::size_t, std::size_t>;

std::set<SpanKey> span_keys(const TaggedSentence& s,
                            std::map<std::string, LabelScore>& per_label,
                            bool gold) {
  std::set<SpanKey> keys;
  for (const EntitySpan& span : decode_bio(s.tags)) {
    const Fragment& f = span.fragments.front();
    auto& score = per_label[span.label];
    ++(gold ? score.gold_count : score.pred_count);
    keys.emplace(span.label, f.start, f.end);
  }
  return keys;
}

std::size_t count_common(const std::set<Link>& a, const std::set<Link>& b) {
  std::size_t n = 0;
  for (const Link& l : a) n += b.count(l);
  return n;
}

// n-gram -> count, keyed by the tokens joined with a unit separator.
std::unordered_map<std::string, std::size_t> ngrams(const Tokens& tokens,
                                                     std::size_t n) {
  std::unordered_map<std::string, std::size_t> out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      key += '\x1f';
      key += tokens[i + k];
    }
    ++out[key];
  }
  return out;
}

}  // namespace

Prf make_prf(std::size_t matches, std::size_t predicted, std::size_t gold) {
  Prf out;
  if (predicted > 0) out.precision = double(matches) / double(predicted);
  if (gold > 0) out.recall = double(matches) / double(gold);
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

EvalReport ner_prf(std::span<const TaggedSentence> gold,
                   std::span<const TaggedSentence> pred) {
  if (gold.size() != pred.size()) {
    throw DataError("gold has " + std::to_string(gold.size()) +
                    " sentences but predictions have " +
                    std::to_string(pred.size()) + " (first unmatched: " +
                    std::to_string(std::min(gold.size(), pred.size()) + 1) +
                    ")");
  }
  EvalReport report;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    if (gold[k].size() != pred[k].size()) {
      throw DataError("sentence " + std::to_string(k + 1) + ": gold has " +
                      std::to_string(gold[k].size()) +
                      " tokens but prediction has " +
                      std::to_string(pred[k].size()));
    }
    const auto g = span_keys(gold[k], report.per_label, true);
    const auto p = span_keys(pred[k], report.per_label, false);
    for (const SpanKey& key : g) {
      if (p.count(key)) ++report.per_label[std::get<0>(key)].match_count;
    }
  }
  double macro_sum = 0.0;
  std::size_t macro_labels = 0;
  for (auto& [label, score] : report.per_label) {
    score.prf = make_prf(score.match_count, score.pred_count, score.gold_count);
    report.gold_count += score.gold_count;
    report.pred_count += score.pred_count;
    report.match_count += score.match_count;
    if (score.gold_count > 0) {
      macro_sum += score.prf.f1;
      ++macro_labels;
    }
  }
  report.micro =
      make_prf(report.match_count, report.pred_count, report.gold_count);
  report.macro_f1 = macro_labels ? macro_sum / double(macro_labels) : 0.0;
  return report;
}

AerReport aer_report(std::span<const Alignment> pred,
                     std::span<const GoldAlignment> gold) {
  if (pred.size() != gold.size()) {
    throw DataError("predicted alignments have " + std::to_string(pred.size()) +
                    " lines but gold has " + std::to_string(gold.size()));
  }
  AerReport r;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    r.predicted += pred[k].links.size();
    r.sure += gold[k].sure.size();
    r.possible += gold[k].possible.size();
    r.hits_sure += count_common(pred[k].links, gold[k].sure);
    r.hits_possible += count_common(pred[k].links, gold[k].possible);
  }
  const std::size_t denom = r.predicted + r.sure;
  if (denom > 0) {
    r.aer = 1.0 - double(r.hits_sure + r.hits_possible) / double(denom);
  }
  return r;
}

double aer(std::span<const Alignment> pred,
           std::span<const GoldAlignment> gold) {
  return aer_report(pred, gold).aer;
}

BleuReport corpus_bleu(std::span<const Tokens> hyps,
                       std::span<const Tokens> refs, int max_n, bool smooth) {
  if (max_n < 1) throw DataError("max n-gram order must be >= 1");
  if (hyps.size() != refs.size()) {
    throw DataError("hypotheses have " + std::to_string(hyps.size()) +
                    " lines but references have " +
                    std::to_string(refs.size()));
  }
  if (hyps.empty()) throw DataError("cannot score an empty corpus");

  const auto orders = static_cast<std::size_t>(max_n);
  BleuReport r;
  r.matches.assign(orders, 0);
  r.totals.assign(orders, 0);
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    r.hyp_length += hyps[k].size();
    r.ref_length += refs[k].size();
    for (std::size_t n = 1; n <= orders; ++n) {
      const auto h = ngrams(hyps[k], n);
      const auto ref = ngrams(refs[k], n);
      for (const auto& [gram, count] : h) {
        r.totals[n - 1] += count;
        auto it = ref.find(gram);
        if (it != ref.end()) r.matches[n - 1] += std::min(count, it->second);
      }
    }
  }

  r.precisions.assign(orders, 0.0);
  bool any_zero = false;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < orders; ++n) {
    double m = double(r.matches[n]);
    double t = double(r.totals[n]);
    if (smooth && n > 0) {
      m += 1.0;
      t += 1.0;
    }
    r.precisions[n] = t > 0.0 ? m / t : 0.0;
    if (r.precisions[n] == 0.0) {
      any_zero = true;
    } else {
      log_sum += std::log(r.precisions[n]);
    }
  }

  if (r.hyp_length < r.ref_length) {
    r.brevity_penalty =
        r.hyp_length == 0
            ? 0.0
            : std::exp(1.0 - double(r.ref_length) / double(r.hyp_length));
  }
  if (!any_zero) {
    r.score = 100.0 * r.brevity_penalty * std::exp(log_sum / double(orders));
  }
  return r;
}

LabelStats label_distribution(std::span<const TaggedSentence> corpus) {
  LabelStats stats;
  stats.sentences = corpus.size();
  for (const TaggedSentence& s : corpus) {
    stats.tokens += s.size();
    for (const EntitySpan& span : decode_bio(s.tags)) {
      ++stats.counts[span.label];
      ++stats.entities;
    }
  }
  return stats;
}

}  // namespace xlner
