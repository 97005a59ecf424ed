// Brute-force reference implementations used only by tests. They work from
// the definitions directly and share no code paths with the library beyond
// its plain data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "xlner/types.hpp"

namespace xlner::oracle {

// ---------------------------------------------------------------------------
// Projection by direct search over the definitions.

// `entities` are given as (label, set of source tokens), in source order.
using OracleEntity = std::pair<std::string, std::set<std::size_t>>;
using OracleLinks = std::set<std::pair<std::size_t, std::size_t>>;

enum class Collision { kMostLinks, kLeftmost, kDrop };

inline std::vector<EntitySpan> project(const std::vector<OracleEntity>& entities,
                                       const OracleLinks& links,
                                       std::size_t tgt_len, Collision collision,
                                       bool merge) {
  const std::size_t none = entities.size();
  // links per (entity, target token)
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> support;
  for (std::size_t e = 0; e < entities.size(); ++e) {
    for (const auto& [i, j] : links) {
      if (entities[e].second.count(i)) ++support[{e, j}];
    }
  }
  std::vector<std::size_t> owner(tgt_len, none);
  for (std::size_t j = 0; j < tgt_len; ++j) {
    std::vector<std::size_t> claimants;
    for (std::size_t e = 0; e < entities.size(); ++e) {
      if (support.count({e, j})) claimants.push_back(e);
    }
    if (claimants.empty()) continue;
    if (claimants.size() == 1 || collision == Collision::kLeftmost) {
      owner[j] = claimants.front();
    } else if (collision == Collision::kMostLinks) {
      std::size_t best = claimants.front();
      for (std::size_t e : claimants) {
        if (support[{e, j}] > support[{best, j}]) best = e;
      }
      owner[j] = best;
    }
  }
  std::vector<EntitySpan> out;
  for (std::size_t e = 0; e < entities.size(); ++e) {
    std::vector<std::size_t> owned;
    for (std::size_t j = 0; j < tgt_len; ++j) {
      if (owner[j] == e) owned.push_back(j);
    }
    if (owned.empty()) continue;
    EntitySpan span{entities[e].first, {}};
    if (!merge) {
      for (std::size_t j : owned) {
        if (!span.fragments.empty() && span.fragments.back().end == j) {
          span.fragments.back().end = j + 1;
        } else {
          span.fragments.push_back({j, j + 1});
        }
      }
    } else {
      // Every interval bounded by owned tokens and free of foreign ones; the
      // one holding most owned tokens wins, leftmost first.
      std::size_t best_count = 0;
      for (std::size_t a : owned) {
        for (std::size_t b : owned) {
          if (b < a) continue;
          std::size_t count = 0;
          bool clean = true;
          for (std::size_t t = a; t <= b; ++t) {
            count += owner[t] == e;
            clean = clean && (owner[t] == e || owner[t] == none);
          }
          if (clean && count > best_count) {
            best_count = count;
            span.fragments = {{a, b + 1}};
          }
        }
      }
    }
    out.push_back(span);
  }
  std::sort(out.begin(), out.end(), [](const EntitySpan& a, const EntitySpan& b) {
    return a.fragments.front().start < b.fragments.front().start;
  });
  return out;
}

inline std::vector<EntitySpan> project_keep_split(
    const std::vector<OracleEntity>& entities, const OracleLinks& links,
    std::size_t tgt_len) {
  return project(entities, links, tgt_len, Collision::kMostLinks, false);
}

// ---------------------------------------------------------------------------
// Entity extraction and exact-match scoring.

using EntityTuple = std::tuple<std::size_t, std::string, std::size_t, std::size_t>;

// Loose BIO reading: an entity starts at every B-X, and at every I-X whose
// previous tag is neither B-X nor I-X; it extends over following I-X tags.
inline std::set<EntityTuple> entities(const std::vector<TaggedSentence>& corpus) {
  std::set<EntityTuple> out;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& tags = corpus[s].tags;
    for (std::size_t i = 0; i < tags.size(); ++i) {
      if (tags[i] == "O") continue;
      const std::string label = tags[i].substr(2);
      const bool starts =
          tags[i][0] == 'B' || i == 0 || tags[i - 1] == "O" ||
          tags[i - 1].substr(2) != label;
      if (!starts) continue;
      std::size_t end = i + 1;
      while (end < tags.size() && tags[end] == "I-" + label) ++end;
      out.emplace(s, label, i, end);
    }
  }
  return out;
}

struct NerCounts {
  std::map<std::string, std::size_t> gold, pred, match;
  std::size_t gold_total = 0, pred_total = 0, match_total = 0;
};

inline NerCounts ner_counts(const std::vector<TaggedSentence>& gold,
                            const std::vector<TaggedSentence>& pred) {
  NerCounts c;
  const auto g = entities(gold);
  const auto p = entities(pred);
  std::vector<EntityTuple> common;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(),
                        std::back_inserter(common));
  for (const auto& t : g) ++c.gold[std::get<1>(t)];
  for (const auto& t : p) ++c.pred[std::get<1>(t)];
  for (const auto& t : common) ++c.match[std::get<1>(t)];
  c.gold_total = g.size();
  c.pred_total = p.size();
  c.match_total = common.size();
  return c;
}

// ---------------------------------------------------------------------------
// AER by scanning the full link grid of every sentence.

inline double aer(const std::vector<Alignment>& pred,
                  const std::vector<GoldAlignment>& gold, std::size_t grid) {
  double a = 0, s = 0, as = 0, ap = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    for (std::size_t i = 0; i < grid; ++i) {
      for (std::size_t j = 0; j < grid; ++j) {
        const Link l{i, j};
        const bool in_a = pred[k].links.count(l) > 0;
        const bool in_s = gold[k].sure.count(l) > 0;
        const bool in_p = gold[k].possible.count(l) > 0;
        a += in_a;
        s += in_s;
        as += in_a && in_s;
        ap += in_a && in_p;
      }
    }
  }
  return a + s == 0 ? 0.0 : 1.0 - (as + ap) / (a + s);
}

// ---------------------------------------------------------------------------
// BLEU with clipping done by explicit occurrence counting.

inline std::size_t occurrences(const Tokens& sentence, const Tokens& gram) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + gram.size() <= sentence.size(); ++i) {
    if (std::equal(gram.begin(), gram.end(), sentence.begin() + i)) ++n;
  }
  return n;
}

inline double bleu(const std::vector<Tokens>& hyps,
                   const std::vector<Tokens>& refs, int max_n,
                   bool smooth = false) {
  double log_sum = 0;
  bool zero = false;
  double hyp_len = 0, ref_len = 0;
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    hyp_len += hyps[k].size();
    ref_len += refs[k].size();
  }
  for (int n = 1; n <= max_n; ++n) {
    double matched = 0, total = 0;
    for (std::size_t k = 0; k < hyps.size(); ++k) {
      const Tokens& h = hyps[k];
      std::set<Tokens> seen;
      for (std::size_t i = 0; i + n <= h.size(); ++i) {
        Tokens gram(h.begin() + i, h.begin() + i + n);
        total += 1;
        if (!seen.insert(gram).second) continue;
        matched += std::min(occurrences(h, gram), occurrences(refs[k], gram));
      }
    }
    if (smooth && n > 1) {
      matched += 1;
      total += 1;
    }
    if (total == 0 || matched == 0) {
      zero = true;
    } else {
      log_sum += std::log(matched / total);
    }
  }
  if (zero) return 0.0;
  const double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return 100.0 * bp * std::exp(log_sum / max_n);
}

// ---------------------------------------------------------------------------
// EM for the diagonal-prior model by enumerating every alignment vector.

struct EmModel {
  // (source word, target word) -> t(target | source); source "" is null.
  std::map<std::pair<std::string, std::string>, double> t;
  double tension = 4.0;
  double null_prob = 0.08;
};

inline double prior(std::size_t i, std::size_t j, std::size_t n,
                    std::size_t m, double tension) {
  double z = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    z += std::exp(-tension * std::abs(double(k) / n - double(j + 1) / m));
  }
  return std::exp(-tension * std::abs(double(i + 1) / n - double(j + 1) / m)) / z;
}

inline EmModel em_init(const std::vector<SentencePair>& bitext, double tension,
                       double null_prob) {
  EmModel model{{}, tension, null_prob};
  std::map<std::string, std::set<std::string>> support;
  std::set<std::string> all_targets;
  for (const auto& p : bitext) {
    for (const auto& f : p.target) {
      all_targets.insert(f);
      for (const auto& e : p.source) support[e].insert(f);
    }
  }
  support[""] = all_targets;
  for (const auto& [e, fs] : support) {
    for (const auto& f : fs) model.t[{e, f}] = 1.0 / fs.size();
  }
  return model;
}

// One EM iteration; returns the log-likelihood of the model it started from.
inline double em_iterate(EmModel& model, const std::vector<SentencePair>& bitext,
                         double smoothing) {
  std::map<std::pair<std::string, std::string>, double> counts;
  double ll = 0;
  for (const auto& pair : bitext) {
    const std::size_t n = pair.source.size();
    const std::size_t m = pair.target.size();
    // a[j] in [0, n]; n means null.
    std::vector<std::size_t> a(m, 0);
    std::vector<std::pair<std::vector<std::size_t>, double>> joint;
    double z = 0;
    while (true) {
      double p = 1;
      for (std::size_t j = 0; j < m; ++j) {
        const auto& f = pair.target[j];
        if (a[j] == n) {
          p *= model.null_prob * model.t[{"", f}];
        } else {
          p *= (1 - model.null_prob) * prior(a[j], j, n, m, model.tension) *
               model.t[{pair.source[a[j]], f}];
        }
      }
      joint.emplace_back(a, p);
      z += p;
      std::size_t j = 0;
      while (j < m && a[j] == n) a[j++] = 0;
      if (j == m) break;
      ++a[j];
    }
    ll += std::log(z);
    for (const auto& [vec, p] : joint) {
      for (std::size_t j = 0; j < m; ++j) {
        const std::string e = vec[j] == n ? "" : pair.source[vec[j]];
        counts[{e, pair.target[j]}] += p / z;
      }
    }
  }
  std::map<std::string, double> totals;
  for (const auto& [key, _] : model.t) {
    totals[key.first] += counts[key] + smoothing;
  }
  for (auto& [key, value] : model.t) {
    value = (counts[key] + smoothing) / totals[key.first];
  }
  return ll;
}

}  // namespace xlner::oracle
