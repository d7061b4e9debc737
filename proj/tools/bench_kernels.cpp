// Serial vs OpenMP kernels. Arg(0) = serial, Arg(1) = parallel.
#include <benchmark/benchmark.h>

#include "langnav/corpus.hpp"
#include "langnav/kernels.hpp"
#include "langnav/random.hpp"

using namespace langnav;
using kernels::Execution;

namespace {

Execution exec_of(const benchmark::State& state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

std::vector<std::uint8_t> random_lethal(int w, int h, double density) {
  Rng rng(11);
  std::vector<std::uint8_t> m(static_cast<std::size_t>(w) * h);
  for (auto& c : m) c = rng.chance(density) ? 1 : 0;
  return m;
}

void BM_DistanceTransform(benchmark::State& state) {
  const int n = static_cast<int>(state.range(1));
  const auto seeds = random_lethal(n, n, 0.02);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::squared_distance_transform(seeds, n, n, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * n * n);
}

void BM_Inflate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(1));
  const auto lethal = random_lethal(n, n, 0.02);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::inflate(lethal, n, n, {}, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * n * n);
}

void BM_RasterizeDisks(benchmark::State& state) {
  const int n = static_cast<int>(state.range(1));
  Rng rng(3);
  std::vector<kernels::Disk> disks(64);
  for (auto& d : disks) d = {{rng.uniform(0.0, n * 0.05), rng.uniform(0.0, n * 0.05)}, rng.uniform(0.2, 1.5)};
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n);
  for (auto _ : state) {
    std::fill(mask.begin(), mask.end(), 0);
    kernels::rasterize_disks(mask, n, n, {0, 0}, 0.05, disks, exec_of(state));
    benchmark::DoNotOptimize(mask.data());
  }
}

struct Batch {
  Vocabulary vocab;
  std::vector<LabeledPhrase> samples;
  ModelParams params;
};

const Batch& batch() {
  static const Batch b = [] {
    const auto corpus = generate_corpus(Grammar::load(LANGNAV_DATA_DIR "/grammar.json"), 7, 200);
    Batch out;
    out.vocab = build_vocabulary(corpus.train);
    out.samples = tokenize_all(corpus.train, out.vocab);
    out.samples.resize(std::min<std::size_t>(out.samples.size(), 64));
    out.params = init_params(Architecture::AttBiLstm, {out.vocab.size(), 32, 64}, 1);
    return out;
  }();
  return b;
}

void BM_BatchGradients(benchmark::State& state) {
  const auto& b = batch();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::batch_gradients(b.samples, b.params, Architecture::AttBiLstm, exec_of(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(b.samples.size()));
}

void BM_BatchClassify(benchmark::State& state) {
  const auto& b = batch();
  std::vector<Phrase> phrases;
  for (const auto& s : b.samples) phrases.push_back(s.phrase);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::batch_classify(phrases, b.params, Architecture::AttBiLstm, exec_of(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(phrases.size()));
}

}  // namespace

BENCHMARK(BM_DistanceTransform)->ArgsProduct({{0, 1}, {120, 400}});
BENCHMARK(BM_Inflate)->ArgsProduct({{0, 1}, {120, 400}});
BENCHMARK(BM_RasterizeDisks)->ArgsProduct({{0, 1}, {120, 400}});
BENCHMARK(BM_BatchGradients)->Arg(0)->Arg(1);
BENCHMARK(BM_BatchClassify)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
