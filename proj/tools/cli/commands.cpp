#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "xlner/xlner.hpp"

namespace xlner::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// Runs `body` and rethrows any toolkit error with the file it came from.
template <typename T>
T with_file(const fs::path& path, const std::function<T()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<SentencePair> load_parallel(const fs::path& src,
                                        const fs::path& tgt) {
  const std::string src_text = read_text_file(src);
  const std::string tgt_text = read_text_file(tgt);
  try {
    return parse_parallel(src_text, tgt_text);
  } catch (const Error& e) {
    throw DataError(src.string() + " / " + tgt.string() + ": " + e.what());
  }
}

std::vector<Alignment> load_alignments(const fs::path& path) {
  return with_file<std::vector<Alignment>>(
      path, [&] { return parse_pharaoh_file(read_text_file(path)); });
}

std::vector<GoldAlignment> load_gold(const fs::path& path) {
  return with_file<std::vector<GoldAlignment>>(
      path, [&] { return parse_gold_file(read_text_file(path)); });
}

std::vector<Tokens> load_sentences(const fs::path& path) {
  // Empty lines are legal in hypothesis/reference files.
  return with_file<std::vector<Tokens>>(path, [&] {
    const std::string text = read_text_file(path);
    std::vector<Tokens> out;
    for (std::string_view line : split_lines(text)) {
      out.push_back(split_tokens(line));
    }
    return out;
  });
}

ordered_json report_json(const ProjectionReport& r) {
  return {{"entities_in", r.entities_in},
          {"entities_projected", r.entities_projected},
          {"entities_dropped_unaligned", r.entities_dropped_unaligned},
          {"entities_split", r.entities_split},
          {"token_collisions", r.token_collisions}};
}

ordered_json prf_json(const Prf& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

std::string_view metric_name(SelectMetric m) {
  return m == SelectMetric::kBleu ? "bleu" : "aer";
}

// ---------------------------------------------------------------------------
// Subcommand options and handlers.

struct AlignTrainArgs {
  fs::path src, tgt, out;
  AlignerConfig cfg;
  bool json = false;
};

void cmd_align_train(const AlignTrainArgs& a, bool verbose, std::ostream& out,
                     std::ostream& err) {
  const auto bitext = load_parallel(a.src, a.tgt);
  TrainingTrace trace;
  const AlignmentModel model = train(bitext, a.cfg, &trace);
  save_model_file(model, a.out);
  if (verbose) {
    for (std::size_t k = 0; k < trace.log_likelihood.size(); ++k) {
      err << "iteration " << k + 1 << ": log-likelihood "
          << fixed(trace.log_likelihood[k]) << " tension "
          << fixed(trace.tension[k]) << '\n';
    }
  }
  if (a.json) {
    out << ordered_json{{"pairs", bitext.size()},
                        {"iterations", a.cfg.iterations},
                        {"tension", model.tension()},
                        {"null_prob", model.null_prob()},
                        {"entries", model.num_entries()},
                        {"log_likelihood", trace.log_likelihood}}
               .dump(2)
        << '\n';
  } else {
    out << "trained on " << bitext.size() << " pairs, " << model.num_entries()
        << " entries, final log-likelihood "
        << fixed(trace.log_likelihood.back()) << '\n';
  }
}

struct AlignArgs {
  fs::path model, src, tgt, out;
  bool json = false;
};

void cmd_align(const AlignArgs& a, std::ostream& out) {
  const AlignmentModel model = with_file<AlignmentModel>(
      a.model, [&] { return load_model_file(a.model); });
  const auto bitext = load_parallel(a.src, a.tgt);
  std::vector<Alignment> links;
  links.reserve(bitext.size());
  std::size_t total = 0;
  for (const SentencePair& pair : bitext) {
    links.push_back(viterbi_align(model, pair));
    total += links.back().size();
  }
  write_text_file(a.out, write_pharaoh_file(links));
  if (a.json) {
    out << ordered_json{{"pairs", bitext.size()}, {"links", total}}.dump(2)
        << '\n';
  } else {
    out << "aligned " << bitext.size() << " pairs, " << total << " links\n";
  }
}

struct ProjectArgs {
  fs::path conll, src, tgt, align, out, report;
  std::string gap = "keep-split";
  std::string collision = "most-links";
  std::string unaligned = "drop";
  bool json = false;
};

void cmd_project(const ProjectArgs& a, bool backward, std::ostream& out) {
  ProjectionConfig cfg;
  cfg.gap_strategy = parse_gap_strategy(a.gap);
  cfg.collision_policy = parse_collision_policy(a.collision);
  cfg.unaligned_policy = parse_unaligned_policy(a.unaligned);
  const auto labeled = load_corpus(a.conll);
  const auto pairs = load_parallel(a.src, a.tgt);
  const auto alignments = load_alignments(a.align);
  const CorpusProjection result =
      backward ? back_project_corpus(labeled, pairs, alignments, cfg)
               : project_corpus(labeled, pairs, alignments, cfg);
  write_text_file(a.out, write_conll(result.sentences));
  const ordered_json report = report_json(result.report);
  if (!a.report.empty()) write_text_file(a.report, report.dump(2) + "\n");
  if (a.json) {
    out << report.dump(2) << '\n';
  } else {
    const auto& r = result.report;
    out << "sentences            " << result.sentences.size() << '\n'
        << "entities in          " << r.entities_in << '\n'
        << "entities projected   " << r.entities_projected << '\n'
        << "dropped (unaligned)  " << r.entities_dropped_unaligned << '\n'
        << "split entities       " << r.entities_split << '\n'
        << "token collisions     " << r.token_collisions << '\n';
  }
}

struct ExtractArgs {
  fs::path src, tgt, align, out;
  bool json = false;
};

void cmd_extract_pairs(const ExtractArgs& a, std::ostream& out) {
  const auto pairs = load_parallel(a.src, a.tgt);
  const auto alignments = load_alignments(a.align);
  if (pairs.size() != alignments.size()) {
    throw DataError("alignment file has " + std::to_string(alignments.size()) +
                    " lines for " + std::to_string(pairs.size()) + " pairs");
  }
  std::string tsv;
  std::size_t count = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    std::vector<std::pair<Token, Token>> words;
    try {
      words = extract_aligned_pairs(pairs[k], alignments[k]);
    } catch (const Error& e) {
      throw DataError("sentence " + std::to_string(k + 1) + ": " + e.what());
    }
    for (const auto& [s, t] : words) {
      tsv += s.text;
      tsv += '\t';
      tsv += t.text;
      tsv += '\n';
      ++count;
    }
  }
  write_text_file(a.out, tsv);
  if (a.json) {
    out << ordered_json{{"pairs", count}}.dump(2) << '\n';
  } else {
    out << "extracted " << count << " word pairs\n";
  }
}

struct EvalNerArgs {
  fs::path gold, pred;
  bool per_label = false;
  bool json = false;
};

void cmd_eval_ner(const EvalNerArgs& a, std::ostream& out) {
  const auto gold = load_corpus(a.gold);
  const auto pred = load_corpus(a.pred);
  const EvalReport r = ner_prf(gold, pred);
  if (a.json) {
    ordered_json j;
    j["micro"] = prf_json(r.micro);
    j["macro_f1"] = r.macro_f1;
    j["gold_count"] = r.gold_count;
    j["pred_count"] = r.pred_count;
    j["match_count"] = r.match_count;
    ordered_json labels = ordered_json::object();
    for (const auto& [label, s] : r.per_label) {
      ordered_json entry = prf_json(s.prf);
      entry["gold_count"] = s.gold_count;
      entry["pred_count"] = s.pred_count;
      entry["match_count"] = s.match_count;
      labels[label] = entry;
    }
    j["per_label"] = labels;
    out << j.dump(2) << '\n';
    return;
  }
  auto row = [&](const std::string& name, const Prf& p, std::size_t gold_n,
                 std::size_t pred_n, std::size_t match_n) {
    out << std::left << std::setw(12) << name << std::right << std::setw(10)
        << fixed(p.precision) << std::setw(10) << fixed(p.recall)
        << std::setw(10) << fixed(p.f1) << std::setw(8) << gold_n
        << std::setw(8) << pred_n << std::setw(8) << match_n << '\n';
  };
  out << std::left << std::setw(12) << "label" << std::right << std::setw(10)
      << "precision" << std::setw(10) << "recall" << std::setw(10) << "f1"
      << std::setw(8) << "gold" << std::setw(8) << "pred" << std::setw(8)
      << "match" << '\n';
  if (a.per_label) {
    for (const auto& [label, s] : r.per_label) {
      row(label, s.prf, s.gold_count, s.pred_count, s.match_count);
    }
  }
  row("micro", r.micro, r.gold_count, r.pred_count, r.match_count);
  out << "macro-f1 " << fixed(r.macro_f1) << '\n';
}

struct EvalAerArgs {
  fs::path pred, gold;
  bool json = false;
};

void cmd_eval_aer(const EvalAerArgs& a, std::ostream& out) {
  const auto pred = load_alignments(a.pred);
  const auto gold = load_gold(a.gold);
  const AerReport r = aer_report(pred, gold);
  if (a.json) {
    out << ordered_json{{"aer", r.aer},
                        {"predicted", r.predicted},
                        {"sure", r.sure},
                        {"possible", r.possible},
                        {"hits_sure", r.hits_sure},
                        {"hits_possible", r.hits_possible}}
               .dump(2)
        << '\n';
  } else {
    out << "AER " << fixed(100.0 * r.aer, 2) << " (|A|=" << r.predicted
        << " |S|=" << r.sure << " |P|=" << r.possible
        << " |A∩S|=" << r.hits_sure << " |A∩P|=" << r.hits_possible << ")\n";
  }
}

struct EvalBleuArgs {
  fs::path hyp, ref;
  int max_n = 4;
  bool smooth = false;
  bool json = false;
};

void cmd_eval_bleu(const EvalBleuArgs& a, std::ostream& out) {
  const auto hyps = load_sentences(a.hyp);
  const auto refs = load_sentences(a.ref);
  const BleuReport r = corpus_bleu(hyps, refs, a.max_n, a.smooth);
  if (a.json) {
    out << ordered_json{{"bleu", r.score},
                        {"precisions", r.precisions},
                        {"matches", r.matches},
                        {"totals", r.totals},
                        {"brevity_penalty", r.brevity_penalty},
                        {"hyp_length", r.hyp_length},
                        {"ref_length", r.ref_length}}
               .dump(2)
        << '\n';
    return;
  }
  out << "BLEU = " << fixed(r.score, 2) << ", ";
  for (std::size_t n = 0; n < r.precisions.size(); ++n) {
    out << (n ? "/" : "") << fixed(100.0 * r.precisions[n], 1);
  }
  out << " (BP=" << fixed(r.brevity_penalty, 3) << ", hyp_len=" << r.hyp_length
      << ", ref_len=" << r.ref_length << ")\n";
}

struct StatsArgs {
  fs::path conll, jsonl;
  bool json = false;
};

void cmd_stats(const StatsArgs& a, std::ostream& out) {
  std::vector<TaggedSentence> corpus;
  if (!a.jsonl.empty()) {
    corpus = with_file<std::vector<TaggedSentence>>(
        a.jsonl, [&] { return parse_jsonl(read_text_file(a.jsonl)); });
  } else {
    corpus = load_corpus(a.conll);
  }
  const LabelStats s = label_distribution(corpus);
  if (a.json) {
    ordered_json labels = ordered_json::object();
    for (const auto& [label, n] : s.counts) labels[label] = n;
    out << ordered_json{{"sentences", s.sentences},
                        {"tokens", s.tokens},
                        {"entities", s.entities},
                        {"labels", labels}}
               .dump(2)
        << '\n';
    return;
  }
  out << "sentences  " << s.sentences << '\n'
      << "tokens     " << s.tokens << '\n'
      << "entities   " << s.entities << '\n';
  for (const auto& [label, n] : s.counts) {
    out << "  " << std::left << std::setw(12) << label << n << '\n';
  }
}

struct SelectArgs {
  std::string metric = "bleu";
  std::vector<std::string> candidates;
  fs::path ref, gold, out;
  int max_n = 4;
  bool smooth = false;
  bool json = false;
};

void cmd_select(const SelectArgs& a, std::ostream& out) {
  SelectOptions options;
  if (a.metric == "bleu") {
    options.metric = SelectMetric::kBleu;
    if (a.ref.empty()) throw CLI::RequiredError("--ref (required for bleu)");
    options.reference = a.ref;
  } else {
    options.metric = SelectMetric::kAer;
    if (a.gold.empty()) throw CLI::RequiredError("--gold (required for aer)");
    options.reference = a.gold;
  }
  options.max_n = a.max_n;
  options.smooth = a.smooth;

  std::vector<Candidate> candidates;
  for (const std::string& spec : a.candidates) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw CLI::ValidationError("--candidate",
                                 "expected NAME=FILE, got '" + spec + "'");
    }
    candidates.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
  }
  const SelectionReport report = select_candidates(candidates, options);

  ordered_json ranking = ordered_json::array();
  for (const CandidateScore& s : report.ranking) {
    ranking.push_back(
        {{"rank", s.rank}, {"name", s.name}, {metric_name(report.metric), s.value}});
  }
  const ordered_json j{{"metric", metric_name(report.metric)},
                       {"ranking", ranking}};
  if (!a.out.empty()) write_text_file(a.out, j.dump(2) + "\n");
  if (a.json) {
    out << j.dump(2) << '\n';
    return;
  }
  out << std::left << std::setw(6) << "rank" << std::setw(24) << "candidate"
      << metric_name(report.metric)
      << (report.metric == SelectMetric::kAer ? " (%)" : "") << '\n';
  for (const CandidateScore& s : report.ranking) {
    out << std::left << std::setw(6) << s.rank << std::setw(24) << s.name
        << fixed(report.metric == SelectMetric::kBleu ? s.value
                                                       : 100.0 * s.value,
                 2)
        << '\n';
  }
}

}  // namespace

std::vector<TaggedSentence> load_corpus(const fs::path& path) {
  return with_file<std::vector<TaggedSentence>>(path, [&] {
    const std::string text = read_text_file(path);
    return path.extension() == ".jsonl" ? parse_jsonl(text) : parse_conll(text);
  });
}

std::vector<CandidateScore> rank_scores(std::vector<CandidateScore> scores,
                                        SelectMetric metric) {
  std::sort(scores.begin(), scores.end(),
            [metric](const CandidateScore& a, const CandidateScore& b) {
              if (a.value != b.value) {
                return metric == SelectMetric::kBleu ? a.value > b.value
                                                     : a.value < b.value;
              }
              return a.name < b.name;
            });
  for (std::size_t k = 0; k < scores.size(); ++k) scores[k].rank = k + 1;
  return scores;
}

SelectionReport select_candidates(std::span<const Candidate> candidates,
                                  const SelectOptions& options) {
  if (candidates.empty()) throw DataError("no candidates given");
  SelectionReport report;
  report.metric = options.metric;
  std::vector<CandidateScore> scores;
  if (options.metric == SelectMetric::kBleu) {
    const auto refs = load_sentences(options.reference);
    for (const Candidate& c : candidates) {
      try {
        const auto hyps = load_sentences(c.file);
        scores.push_back(
            {c.name, corpus_bleu(hyps, refs, options.max_n, options.smooth).score});
      } catch (const Error& e) {
        throw DataError("candidate '" + c.name + "': " + e.what());
      }
    }
  } else {
    const auto gold = load_gold(options.reference);
    for (const Candidate& c : candidates) {
      try {
        scores.push_back({c.name, aer(load_alignments(c.file), gold)});
      } catch (const Error& e) {
        throw DataError("candidate '" + c.name + "': " + e.what());
      }
    }
  }
  report.ranking = rank_scores(std::move(scores), options.metric);
  return report;
}

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Cross-lingual NER toolkit: alignment, annotation projection "
               "and evaluation",
               "xlner"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  std::function<void()> action;

  AlignTrainArgs train_args;
  {
    auto* sub = app.add_subcommand("align-train", "Train the statistical aligner");
    sub->add_option("--src", train_args.src, "Source sentences")->required()->check(CLI::ExistingFile);
    sub->add_option("--tgt", train_args.tgt, "Target sentences")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", train_args.out, "Model file to write")->required();
    sub->add_option("--iters", train_args.cfg.iterations, "EM iterations")->capture_default_str();
    sub->add_option("--tension", train_args.cfg.tension, "Diagonal tension")->capture_default_str();
    sub->add_option("--p0", train_args.cfg.null_prob, "Null alignment probability")->capture_default_str();
    sub->add_option("--smoothing", train_args.cfg.smoothing, "Additive count smoothing")->capture_default_str();
    sub->add_flag("--optimize-tension", train_args.cfg.optimize_tension, "Re-fit the tension each iteration");
    sub->add_option("--threads", train_args.cfg.threads, "E-step worker threads")->capture_default_str();
    sub->add_flag("--json", train_args.json, "Print a JSON summary");
    sub->callback([&] { action = [&] { cmd_align_train(train_args, verbose, out, err); }; });
  }

  AlignArgs align_args;
  {
    auto* sub = app.add_subcommand("align", "Viterbi-align a bitext with a trained model");
    sub->add_option("--model", align_args.model)->required()->check(CLI::ExistingFile);
    sub->add_option("--src", align_args.src)->required()->check(CLI::ExistingFile);
    sub->add_option("--tgt", align_args.tgt)->required()->check(CLI::ExistingFile);
    sub->add_option("--out", align_args.out, "Pharaoh file to write")->required();
    sub->add_flag("--json", align_args.json);
    sub->callback([&] { action = [&] { cmd_align(align_args, out); }; });
  }

  ProjectArgs project_args;
  bool backward = false;
  for (const char* name : {"project", "backproject"}) {
    const bool back = std::string_view(name) == "backproject";
    auto* sub = app.add_subcommand(
        name, back ? "Carry predictions on translations back to the originals"
                   : "Project source labels onto translations");
    sub->add_option("--conll", project_args.conll, "Labeled side (CoNLL or .jsonl)")->required()->check(CLI::ExistingFile);
    sub->add_option("--src", project_args.src, "Labeled-side sentences")->required()->check(CLI::ExistingFile);
    sub->add_option("--tgt", project_args.tgt, "Unlabeled-side sentences")->required()->check(CLI::ExistingFile);
    sub->add_option("--align", project_args.align, "Pharaoh links, labeled side first")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", project_args.out, "CoNLL file to write")->required();
    sub->add_option("--gap-strategy", project_args.gap)->check(CLI::IsMember({"keep-split", "merge-gaps"}))->capture_default_str();
    sub->add_option("--collision", project_args.collision)->check(CLI::IsMember({"most-links", "leftmost-entity", "drop-token"}))->capture_default_str();
    sub->add_option("--unaligned", project_args.unaligned)->check(CLI::IsMember({"drop", "error"}))->capture_default_str();
    sub->add_option("--report", project_args.report, "JSON report file");
    sub->add_flag("--json", project_args.json);
    sub->callback([&, back] {
      backward = back;
      action = [&] { cmd_project(project_args, backward, out); };
    });
  }

  ExtractArgs extract_args;
  {
    auto* sub = app.add_subcommand("extract-pairs", "Write aligned word pairs as TSV");
    sub->add_option("--src", extract_args.src)->required()->check(CLI::ExistingFile);
    sub->add_option("--tgt", extract_args.tgt)->required()->check(CLI::ExistingFile);
    sub->add_option("--align", extract_args.align)->required()->check(CLI::ExistingFile);
    sub->add_option("--out", extract_args.out)->required();
    sub->add_flag("--json", extract_args.json);
    sub->callback([&] { action = [&] { cmd_extract_pairs(extract_args, out); }; });
  }

  EvalNerArgs ner_args;
  {
    auto* sub = app.add_subcommand("eval-ner", "Entity-level precision/recall/F1");
    sub->add_option("--gold", ner_args.gold)->required()->check(CLI::ExistingFile);
    sub->add_option("--pred", ner_args.pred)->required()->check(CLI::ExistingFile);
    sub->add_flag("--per-label", ner_args.per_label, "Show one row per label");
    sub->add_flag("--json", ner_args.json);
    sub->callback([&] { action = [&] { cmd_eval_ner(ner_args, out); }; });
  }

  EvalAerArgs aer_args;
  {
    auto* sub = app.add_subcommand("eval-aer", "Alignment error rate against gold links");
    sub->add_option("--pred", aer_args.pred)->required()->check(CLI::ExistingFile);
    sub->add_option("--gold", aer_args.gold)->required()->check(CLI::ExistingFile);
    sub->add_flag("--json", aer_args.json);
    sub->callback([&] { action = [&] { cmd_eval_aer(aer_args, out); }; });
  }

  EvalBleuArgs bleu_args;
  {
    auto* sub = app.add_subcommand("eval-bleu", "Corpus BLEU");
    sub->add_option("--hyp", bleu_args.hyp)->required()->check(CLI::ExistingFile);
    sub->add_option("--ref", bleu_args.ref)->required()->check(CLI::ExistingFile);
    sub->add_option("--max-n", bleu_args.max_n)->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_flag("--smooth", bleu_args.smooth, "Add-one smoothing for n > 1");
    sub->add_flag("--json", bleu_args.json);
    sub->callback([&] { action = [&] { cmd_eval_bleu(bleu_args, out); }; });
  }

  StatsArgs stats_args;
  {
    auto* sub = app.add_subcommand("stats", "Sentence, entity and label counts");
    auto* conll = sub->add_option("--conll", stats_args.conll)->check(CLI::ExistingFile);
    auto* jsonl = sub->add_option("--jsonl", stats_args.jsonl)->check(CLI::ExistingFile);
    conll->excludes(jsonl);
    sub->add_flag("--json", stats_args.json);
    sub->callback([&, conll, jsonl] {
      if (conll->count() + jsonl->count() == 0) {
        throw CLI::RequiredError("--conll or --jsonl");
      }
      action = [&] { cmd_stats(stats_args, out); };
    });
  }

  SelectArgs select_args;
  {
    auto* sub = app.add_subcommand("select", "Rank translation or alignment candidates");
    sub->add_option("--metric", select_args.metric)->check(CLI::IsMember({"bleu", "aer"}))->capture_default_str();
    sub->add_option("--candidate", select_args.candidates, "NAME=FILE, repeatable")->required();
    sub->add_option("--ref", select_args.ref, "Reference sentences (bleu)")->check(CLI::ExistingFile);
    sub->add_option("--gold", select_args.gold, "Gold alignments (aer)")->check(CLI::ExistingFile);
    sub->add_option("--out", select_args.out, "JSON report file");
    sub->add_option("--max-n", select_args.max_n)->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_flag("--smooth", select_args.smooth);
    sub->add_flag("--json", select_args.json);
    sub->callback([&] { action = [&] { cmd_select(select_args, out); }; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    action();
  } catch (const CLI::Error& e) {
    err << "xlner: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "xlner: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "xlner: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace xlner::cli
