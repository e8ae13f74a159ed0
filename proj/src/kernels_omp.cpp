#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "emoseq/kernels.hpp"

namespace emoseq::kernels::parallel {

namespace {

std::size_t thread_count(Offsets offsets) { return offsets.empty() ? 0 : offsets.size() - 1; }

void merge_into(std::vector<std::uint64_t>& dst, const std::vector<std::uint64_t>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

std::vector<Code> bin_codes(std::span<const double> values, const BinSpec& spec) {
  std::vector<Code> codes(values.size());
  const auto n = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    codes[i] = static_cast<Code>(spec.bin_of_unchecked(values[i]));
  }
  return codes;
}

std::vector<std::uint64_t> histogram(std::span<const Code> codes, std::size_t bins) {
  std::vector<std::uint64_t> counts(bins, 0);
  const auto n = static_cast<std::ptrdiff_t>(codes.size());
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(bins, 0);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) ++local[codes[i]];
#pragma omp critical(emoseq_histogram_merge)
    merge_into(counts, local);
  }
  return counts;
}

std::vector<std::uint64_t> pair_counts(std::span<const Code> codes, Offsets offsets, std::size_t bins) {
  std::vector<std::uint64_t> counts(bins * bins, 0);
  const auto threads = static_cast<std::ptrdiff_t>(thread_count(offsets));
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(bins * bins, 0);
#pragma omp for schedule(dynamic, 64) nowait
    for (std::ptrdiff_t t = 0; t < threads; ++t) {
      for (std::size_t i = offsets[t] + 1; i < offsets[t + 1]; ++i) {
        ++local[codes[i - 1] * bins + codes[i]];
      }
    }
#pragma omp critical(emoseq_pair_merge)
    merge_into(counts, local);
  }
  return counts;
}

TripleTally triple_counts(std::span<const double> values, std::span<const Code> codes, Offsets offsets,
                          std::size_t bins, double top_cut, double bottom_cut) {
  TripleTally total;
  total.plus_joint.assign(bins, 0);
  total.minus_joint.assign(bins, 0);
  total.marginal.assign(bins, 0);
  const auto threads = static_cast<std::ptrdiff_t>(thread_count(offsets));
#pragma omp parallel
  {
    TripleTally local;
    local.plus_joint.assign(bins, 0);
    local.minus_joint.assign(bins, 0);
    local.marginal.assign(bins, 0);
#pragma omp for schedule(dynamic, 64) nowait
    for (std::ptrdiff_t t = 0; t < threads; ++t) {
      for (std::size_t i = offsets[t] + 2; i < offsets[t + 1]; ++i) {
        const double a = values[i - 2];
        const double b = values[i - 1];
        ++local.triples;
        ++local.marginal[codes[i]];
        if (a >= top_cut && b >= top_cut) {
          ++local.plus_events;
          ++local.plus_joint[codes[i]];
        }
        if (a <= bottom_cut && b <= bottom_cut) {
          ++local.minus_events;
          ++local.minus_joint[codes[i]];
        }
      }
    }
#pragma omp critical(emoseq_triple_merge)
    {
      merge_into(total.plus_joint, local.plus_joint);
      merge_into(total.minus_joint, local.minus_joint);
      merge_into(total.marginal, local.marginal);
      total.plus_events += local.plus_events;
      total.minus_events += local.minus_events;
      total.triples += local.triples;
    }
  }
  return total;
}

std::vector<ClusterTally> cluster_tally(std::span<const double> values, Offsets offsets,
                                        std::span<const double> thresholds) {
  const std::size_t threads = thread_count(offsets);
  const std::size_t nt = thresholds.size();
  const std::size_t blocks = (threads + kReductionBlock - 1) / kReductionBlock;
  std::vector<ClusterTally> per_block(blocks * nt);

  const auto nblocks = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
    ClusterTally* tallies = per_block.data() + b * nt;
    const std::size_t first = b * kReductionBlock;
    const std::size_t last = std::min(threads, first + kReductionBlock);
    for (std::size_t t = first; t < last; ++t) {
      const double* v = values.data() + offsets[t];
      const std::size_t len = offsets[t + 1] - offsets[t];
      for (std::size_t k = 0; k < nt; ++k) {
        const double T = thresholds[k];
        std::uint64_t runs = 0, members = 0;
        bool inside = false;
        for (std::size_t i = 0; i < len; ++i) {
          const bool hit = v[i] >= T;
          members += hit;
          runs += hit && !inside;
          inside = hit;
        }
        ClusterTally& tally = tallies[k];
        tally.clusters += runs;
        tally.clustered += members;
        if (runs > 0) {
          tally.thread_mean_sum += static_cast<double>(members) / static_cast<double>(runs);
          ++tally.threads_with_clusters;
        }
      }
    }
  }

  std::vector<ClusterTally> out(nt);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t k = 0; k < nt; ++k) {
      const ClusterTally& src = per_block[b * nt + k];
      out[k].clusters += src.clusters;
      out[k].clustered += src.clustered;
      out[k].thread_mean_sum += src.thread_mean_sum;
      out[k].threads_with_clusters += src.threads_with_clusters;
    }
  }
  return out;
}

std::vector<double> thread_means(std::span<const double> values, std::span<const double> filter, double cut,
                                 Offsets offsets) {
  const auto threads = static_cast<std::ptrdiff_t>(thread_count(offsets));
  std::vector<double> means(static_cast<std::size_t>(threads), std::numeric_limits<double>::quiet_NaN());
#pragma omp parallel
  {
    std::vector<double> kept;
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t t = 0; t < threads; ++t) {
      kept.clear();
      for (std::size_t i = offsets[t]; i < offsets[t + 1]; ++i) {
        if (filter.empty() || filter[i] >= cut) kept.push_back(values[i]);
      }
      if (kept.empty()) continue;
      std::sort(kept.begin(), kept.end());
      double sum = 0.0;
      for (double v : kept) sum += v;
      means[t] = sum / static_cast<double>(kept.size());
    }
  }
  return means;
}

}  // namespace emoseq::kernels::parallel
