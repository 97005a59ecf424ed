#include <benchmark/benchmark.h>

#include "generators.hpp"
#include "xlner/metrics.hpp"

namespace {

void BM_CorpusBleu(benchmark::State& state) {
  xlner::gen::Rng rng(4);
  std::vector<xlner::Tokens> hyps, refs;
  for (int k = 0; k < state.range(0); ++k) {
    hyps.push_back(xlner::gen::tokens(rng, xlner::gen::uniform(rng, 5, 30)));
    refs.push_back(xlner::gen::tokens(rng, xlner::gen::uniform(rng, 5, 30)));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(xlner::corpus_bleu(hyps, refs));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CorpusBleu)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_NerPrf(benchmark::State& state) {
  xlner::gen::Rng rng(5);
  std::vector<xlner::TaggedSentence> gold, pred;
  for (int k = 0; k < state.range(0); ++k) {
    const std::size_t len = xlner::gen::uniform(rng, 5, 30);
    const auto toks = xlner::gen::tokens(rng, len);
    gold.push_back({toks, xlner::gen::tags(rng, len, 6)});
    pred.push_back({toks, xlner::gen::tags(rng, len, 6)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(xlner::ner_prf(gold, pred));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NerPrf)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
