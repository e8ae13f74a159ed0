// Serial reference vs OpenMP kernels on a synthetic column of 10^6 comments.
// Pass --benchmark_filter=... as usual; OMP_NUM_THREADS sets the team size.

#include <benchmark/benchmark.h>

#include "emoseq/kernels.hpp"
#include "emoseq/synth.hpp"

namespace {

using namespace emoseq;

struct Fixture {
  ThreadColumn pos;
  ThreadColumn sub;
  std::vector<kernels::Code> codes;
  BinSpec spec{0.1};
  std::vector<double> grid = default_threshold_grid();

  Fixture() {
    MarkovModel m;
    m.states = {0.05, 0.55, 0.95};
    m.transition = {0.8, 0.15, 0.05, 0.1, 0.8, 0.1, 0.05, 0.15, 0.8};
    GeneratorConfig cfg;
    cfg.thread_count = 10000;
    cfg.length = {LengthLaw::Kind::geometric, 100};
    cfg.seed = Seed{1};
    const Dataset ds = generate_markov(m, cfg);
    pos = extract_column(ds, Field::positive);
    sub = extract_column(ds, Field::subjective);
    codes = kernels::serial::bin_codes(pos.values, spec);
  }
};

const Fixture& data() {
  static const Fixture f;
  return f;
}

template <bool Parallel>
void BM_bin_codes(benchmark::State& state) {
  const auto& f = data();
  for (auto _ : state) {
    auto c = Parallel ? kernels::parallel::bin_codes(f.pos.values, f.spec) : kernels::serial::bin_codes(f.pos.values, f.spec);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.pos.values.size()));
}

template <bool Parallel>
void BM_pair_counts(benchmark::State& state) {
  const auto& f = data();
  for (auto _ : state) {
    auto c = Parallel ? kernels::parallel::pair_counts(f.codes, f.pos.offsets, f.spec.bin_count())
                      : kernels::serial::pair_counts(f.codes, f.pos.offsets, f.spec.bin_count());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.pos.values.size()));
}

template <bool Parallel>
void BM_triple_counts(benchmark::State& state) {
  const auto& f = data();
  for (auto _ : state) {
    auto t = Parallel ? kernels::parallel::triple_counts(f.pos.values, f.codes, f.pos.offsets, f.spec.bin_count(), 0.9, 0.1)
                      : kernels::serial::triple_counts(f.pos.values, f.codes, f.pos.offsets, f.spec.bin_count(), 0.9, 0.1);
    benchmark::DoNotOptimize(t.triples);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.pos.values.size()));
}

template <bool Parallel>
void BM_cluster_tally(benchmark::State& state) {
  const auto& f = data();
  for (auto _ : state) {
    auto t = Parallel ? kernels::parallel::cluster_tally(f.sub.values, f.sub.offsets, f.grid)
                      : kernels::serial::cluster_tally(f.sub.values, f.sub.offsets, f.grid);
    benchmark::DoNotOptimize(t.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.sub.values.size()));
}

template <bool Parallel>
void BM_thread_means(benchmark::State& state) {
  const auto& f = data();
  for (auto _ : state) {
    auto m = Parallel ? kernels::parallel::thread_means(f.pos.values, f.sub.values, 0.5, f.pos.offsets)
                      : kernels::serial::thread_means(f.pos.values, f.sub.values, 0.5, f.pos.offsets);
    benchmark::DoNotOptimize(m.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.pos.values.size()));
}

}  // namespace

BENCHMARK(BM_bin_codes<false>)->Name("bin_codes/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bin_codes<true>)->Name("bin_codes/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pair_counts<false>)->Name("pair_counts/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pair_counts<true>)->Name("pair_counts/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_triple_counts<false>)->Name("triple_counts/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_triple_counts<true>)->Name("triple_counts/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_cluster_tally<false>)->Name("cluster_tally/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_cluster_tally<true>)->Name("cluster_tally/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_thread_means<false>)->Name("thread_means/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_thread_means<true>)->Name("thread_means/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
