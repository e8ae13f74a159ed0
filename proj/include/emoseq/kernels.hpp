#pragma once

// Counting kernels over flattened thread columns (see ThreadColumn).
//
// Two implementations share each signature: `serial` is the straightforward
// reference kept for testing, `parallel` splits the work over threads of the
// dataset with OpenMP. Integer outputs are identical between the two. Floating
// sums in `parallel` are reduced over fixed-size blocks of threads in block
// order, so they do not depend on the OpenMP team size.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "emoseq/core.hpp"

namespace emoseq::kernels {

using Code = std::uint32_t;
using Offsets = std::span<const std::size_t>;

struct ClusterTally {
  std::uint64_t clusters = 0;           // maximal runs with value >= T
  std::uint64_t clustered = 0;          // comments inside those runs
  double thread_mean_sum = 0.0;         // sum over threads of (clustered / clusters)
  std::uint64_t threads_with_clusters = 0;

  friend bool operator==(const ClusterTally&, const ClusterTally&) = default;
};

struct TripleTally {
  std::vector<std::uint64_t> plus_joint;   // x_n bin counts given both predecessors >= top_cut
  std::vector<std::uint64_t> minus_joint;  // x_n bin counts given both predecessors <= bottom_cut
  std::vector<std::uint64_t> marginal;     // x_n bin counts over every triple end
  std::uint64_t plus_events = 0;
  std::uint64_t minus_events = 0;
  std::uint64_t triples = 0;

  friend bool operator==(const TripleTally&, const TripleTally&) = default;
};

/// Values of at most this many threads are reduced together before blocks are combined.
inline constexpr std::size_t kReductionBlock = 256;

namespace serial {

std::vector<Code> bin_codes(std::span<const double> values, const BinSpec& spec);
std::vector<std::uint64_t> histogram(std::span<const Code> codes, std::size_t bins);
/// Row-major bins x bins matrix; entry (i, j) counts consecutive pairs (prev in i, next in j).
std::vector<std::uint64_t> pair_counts(std::span<const Code> codes, Offsets offsets, std::size_t bins);
TripleTally triple_counts(std::span<const double> values, std::span<const Code> codes, Offsets offsets,
                          std::size_t bins, double top_cut, double bottom_cut);
std::vector<ClusterTally> cluster_tally(std::span<const double> values, Offsets offsets,
                                        std::span<const double> thresholds);
/// Per-thread mean of `values` over comments whose `filter` value is >= cut
/// (every comment when filter is empty). NaN marks threads with no qualifying comment.
std::vector<double> thread_means(std::span<const double> values, std::span<const double> filter, double cut,
                                 Offsets offsets);

}  // namespace serial

namespace parallel {

std::vector<Code> bin_codes(std::span<const double> values, const BinSpec& spec);
std::vector<std::uint64_t> histogram(std::span<const Code> codes, std::size_t bins);
std::vector<std::uint64_t> pair_counts(std::span<const Code> codes, Offsets offsets, std::size_t bins);
TripleTally triple_counts(std::span<const double> values, std::span<const Code> codes, Offsets offsets,
                          std::size_t bins, double top_cut, double bottom_cut);
std::vector<ClusterTally> cluster_tally(std::span<const double> values, Offsets offsets,
                                        std::span<const double> thresholds);
std::vector<double> thread_means(std::span<const double> values, std::span<const double> filter, double cut,
                                 Offsets offsets);

}  // namespace parallel

}  // namespace emoseq::kernels
