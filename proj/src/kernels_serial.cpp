#include <algorithm>
#include <cmath>
#include <limits>

#include "emoseq/kernels.hpp"

namespace emoseq::kernels::serial {

std::vector<Code> bin_codes(std::span<const double> values, const BinSpec& spec) {
  std::vector<Code> codes(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    codes[i] = static_cast<Code>(spec.bin_of_unchecked(values[i]));
  }
  return codes;
}

std::vector<std::uint64_t> histogram(std::span<const Code> codes, std::size_t bins) {
  std::vector<std::uint64_t> counts(bins, 0);
  for (Code c : codes) ++counts[c];
  return counts;
}

std::vector<std::uint64_t> pair_counts(std::span<const Code> codes, Offsets offsets, std::size_t bins) {
  std::vector<std::uint64_t> counts(bins * bins, 0);
  for (std::size_t t = 0; t + 1 < offsets.size(); ++t) {
    for (std::size_t i = offsets[t] + 1; i < offsets[t + 1]; ++i) {
      ++counts[codes[i - 1] * bins + codes[i]];
    }
  }
  return counts;
}

TripleTally triple_counts(std::span<const double> values, std::span<const Code> codes, Offsets offsets,
                          std::size_t bins, double top_cut, double bottom_cut) {
  TripleTally tally;
  tally.plus_joint.assign(bins, 0);
  tally.minus_joint.assign(bins, 0);
  tally.marginal.assign(bins, 0);
  for (std::size_t t = 0; t + 1 < offsets.size(); ++t) {
    for (std::size_t i = offsets[t] + 2; i < offsets[t + 1]; ++i) {
      const double a = values[i - 2];
      const double b = values[i - 1];
      ++tally.triples;
      ++tally.marginal[codes[i]];
      if (a >= top_cut && b >= top_cut) {
        ++tally.plus_events;
        ++tally.plus_joint[codes[i]];
      }
      if (a <= bottom_cut && b <= bottom_cut) {
        ++tally.minus_events;
        ++tally.minus_joint[codes[i]];
      }
    }
  }
  return tally;
}

std::vector<ClusterTally> cluster_tally(std::span<const double> values, Offsets offsets,
                                        std::span<const double> thresholds) {
  std::vector<ClusterTally> out(thresholds.size());
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const double T = thresholds[k];
    ClusterTally& tally = out[k];
    for (std::size_t t = 0; t + 1 < offsets.size(); ++t) {
      std::uint64_t runs = 0, members = 0;
      bool inside = false;
      for (std::size_t i = offsets[t]; i < offsets[t + 1]; ++i) {
        const bool hit = values[i] >= T;
        if (hit) {
          ++members;
          if (!inside) ++runs;
        }
        inside = hit;
      }
      tally.clusters += runs;
      tally.clustered += members;
      if (runs > 0) {
        tally.thread_mean_sum += static_cast<double>(members) / static_cast<double>(runs);
        ++tally.threads_with_clusters;
      }
    }
  }
  return out;
}

std::vector<double> thread_means(std::span<const double> values, std::span<const double> filter, double cut,
                                 Offsets offsets) {
  const std::size_t threads = offsets.empty() ? 0 : offsets.size() - 1;
  std::vector<double> means(threads, std::numeric_limits<double>::quiet_NaN());
  // Summing in sorted order makes a mean depend only on the thread's multiset
  // of values, so reordering comments inside a thread leaves it bit-identical.
  std::vector<double> kept;
  for (std::size_t t = 0; t < threads; ++t) {
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
  return means;
}

}  // namespace emoseq::kernels::serial
