#include "emoseq/nullmodels.hpp"

#include <tuple>
#include <utility>
#include <vector>

namespace emoseq {

Seed entropy_seed() {
  std::random_device rd;
  const std::uint64_t hi = rd();
  const std::uint64_t lo = rd();
  return {(hi << 32) ^ lo};
}

namespace {

void renumber(Thread& thread) {
  for (std::size_t i = 0; i < thread.comments.size(); ++i) thread.comments[i].index = i;
}

}  // namespace

Dataset thread_shuffle(const Dataset& dataset, Seed seed) {
  Dataset out = dataset;
  const auto n = static_cast<std::ptrdiff_t>(out.threads.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    Thread& thread = out.threads[t];
    if (thread.comments.size() < 2) continue;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    rng.shuffle(thread.comments.begin(), thread.comments.end());
    renumber(thread);
  }
  return out;
}

Dataset global_shuffle(const Dataset& dataset, Seed seed) {
  std::vector<std::pair<double, double>> pool;
  pool.reserve(dataset.comment_count());
  for (const Thread& thread : dataset.threads) {
    for (const Comment& c : thread.comments) pool.emplace_back(c.p_pos, c.p_sub);
  }
  Rng rng(seed);
  rng.shuffle(pool.begin(), pool.end());

  Dataset out = dataset;
  std::size_t next = 0;
  for (Thread& thread : out.threads) {
    for (Comment& c : thread.comments) {
      std::tie(c.p_pos, c.p_sub) = pool[next++];
    }
  }
  return out;
}

Dataset iid_resample(const Dataset& dataset, Field field, Seed seed) {
  const ThreadColumn column = extract_column(dataset, field);
  const std::vector<double>& pool = column.values;
  Dataset out = dataset;
  if (pool.empty()) return out;

  const auto n = static_cast<std::ptrdiff_t>(out.threads.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    for (Comment& c : out.threads[t].comments) {
      const double v = pool[rng.uniform_below(pool.size())];
      (field == Field::positive ? c.p_pos : c.p_sub) = v;
    }
  }
  return out;
}

}  // namespace emoseq
