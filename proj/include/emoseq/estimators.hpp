#pragma once

// Distributional statistics: value histograms, distributions of per-thread
// means, and average cluster sizes of above-threshold runs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "emoseq/core.hpp"

namespace emoseq {

struct Histogram {
  BinSpec spec;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  /// counts / total; all zeros when total == 0.
  std::vector<double> frequencies() const;
};

Histogram make_histogram(const BinSpec& spec, std::span<const double> values);

Histogram histogram(const Dataset& dataset, Field field, const BinSpec& spec);

struct ThreadMeans {
  Histogram histogram;
  std::vector<double> means;      // one per qualifying thread, dataset order
  std::size_t excluded_threads = 0;
};

/// Mean of `field` per thread, then binned. With `subjectivity_cut`, only
/// comments with p_sub >= cut enter a thread's mean; threads left with no
/// qualifying comment are excluded and counted.
ThreadMeans thread_means(const Dataset& dataset, Field field, std::optional<double> subjectivity_cut,
                         const BinSpec& spec);

/// Lengths of maximal runs of consecutive comments with p_sub >= threshold.
std::vector<std::size_t> find_clusters(const Thread& thread, double threshold);

enum class ClusterAveraging {
  pooled,      // total clustered comments / total clusters, over all threads
  per_thread,  // mean over threads (with >= 1 cluster) of each thread's mean size
};

struct ClusterCurve {
  std::vector<double> thresholds;
  std::vector<double> mean_sizes;              // NaN where cluster_counts == 0
  std::vector<std::uint64_t> cluster_counts;
  std::vector<std::uint64_t> clustered_comments;
};

/// T = 0.00, 0.05, ..., 1.00.
std::vector<double> default_threshold_grid();

/// Throws std::invalid_argument for an empty or non-ascending grid and
/// DomainError for thresholds outside [0,1].
ClusterCurve cluster_curve(const Dataset& dataset, std::span<const double> thresholds,
                           ClusterAveraging averaging = ClusterAveraging::pooled,
                           Field field = Field::subjective);

}  // namespace emoseq
