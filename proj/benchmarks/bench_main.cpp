#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "evotrack/corpus.hpp"
#include "evotrack/hmm.hpp"
#include "evotrack/svm.hpp"
#include "evotrack/timeline.hpp"
#include "evotrack/word2vec.hpp"

using namespace evotrack;

namespace {

std::vector<std::vector<int>> random_sequences(std::size_t count, std::size_t length,
                                               int alphabet, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> symbol(0, alphabet - 1);
  std::vector<std::vector<int>> out(count, std::vector<int>(length));
  for (auto& seq : out)
    for (auto& s : seq) s = symbol(rng);
  return out;
}

void BM_Forward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = initial_model(n, 21, 1);
  const auto seq = random_sequences(1, 1000, 21, 2).front();
  for (auto _ : state) benchmark::DoNotOptimize(log_likelihood(model, seq));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(seq.size()));
}
BENCHMARK(BM_Forward)->Arg(2)->Arg(3)->Arg(5);

void BM_BaumWelchStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto seqs = random_sequences(360, 200, 21, 3);
  const std::vector<SequenceView> views(seqs.begin(), seqs.end());
  const auto model = initial_model(n, 21, 1);
  HmmModel next;
  for (auto _ : state) benchmark::DoNotOptimize(baum_welch_step(model, views, next));
  state.SetItemsProcessed(state.iterations() * 360 * 200);
}
BENCHMARK(BM_BaumWelchStep)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_TrainSvm(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<FeatureVector> pos(360), neg(30);
  for (auto* group : {&pos, &neg})
    for (auto& x : *group) {
      x.values.resize(dim);
      for (auto& v : x.values) v = g(rng) + (group == &pos ? 0.3 : -0.3);
    }
  for (auto _ : state) benchmark::DoNotOptimize(train_linear_svm(pos, neg, SvmParams{}).objective);
}
BENCHMARK(BM_TrainSvm)->Arg(21)->Arg(42)->Unit(benchmark::kMillisecond);

void BM_Word2Vec(benchmark::State& state) {
  PlantedOptions options;
  options.months = 12;
  options.evolve_at = -1;
  const auto corpus = generate_synthetic(planted_spec(options));
  const auto vocab = build_vocabulary(corpus.samples(), 20, 1);
  SgnsParams params;
  params.dim = 2;
  for (auto _ : state)
    benchmark::DoNotOptimize(train_word2vec(corpus.samples(), vocab, params).epoch_loss.back());
}
BENCHMARK(BM_Word2Vec)->Unit(benchmark::kMillisecond);

void BM_Chi2(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> a(dim), b(dim);
  for (auto& v : a) v = g(rng);
  for (auto& v : b) v = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(chi2_distance(a, b));
}
BENCHMARK(BM_Chi2)->Arg(21)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
