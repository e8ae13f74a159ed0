#include "emoseq/estimators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "emoseq/kernels.hpp"

namespace emoseq {

std::vector<double> Histogram::frequencies() const {
  std::vector<double> f(counts.size(), 0.0);
  if (total == 0) return f;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    f[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return f;
}

Histogram make_histogram(const BinSpec& spec, std::span<const double> values) {
  for (double v : values) spec.bin_of(v);  // range check
  const auto codes = kernels::parallel::bin_codes(values, spec);
  Histogram h{spec, kernels::parallel::histogram(codes, spec.bin_count()), values.size()};
  return h;
}

Histogram histogram(const Dataset& dataset, Field field, const BinSpec& spec) {
  const ThreadColumn column = extract_column(dataset, field);
  return make_histogram(spec, column.values);
}

ThreadMeans thread_means(const Dataset& dataset, Field field, std::optional<double> subjectivity_cut,
                         const BinSpec& spec) {
  const ThreadColumn column = extract_column(dataset, field);
  ThreadColumn filter;
  if (subjectivity_cut) filter = extract_column(dataset, Field::subjective);

  const auto all = kernels::parallel::thread_means(
      column.values, subjectivity_cut ? std::span<const double>(filter.values) : std::span<const double>{},
      subjectivity_cut.value_or(0.0), column.offsets);

  ThreadMeans out{Histogram{spec, {}, 0}, {}, 0};
  out.means.reserve(all.size());
  for (double m : all) {
    if (std::isnan(m)) {
      ++out.excluded_threads;
    } else {
      out.means.push_back(m);
    }
  }
  out.histogram = make_histogram(spec, out.means);
  return out;
}

std::vector<std::size_t> find_clusters(const Thread& thread, double threshold) {
  std::vector<std::size_t> runs;
  std::size_t current = 0;
  for (const Comment& c : thread.comments) {
    if (c.p_sub >= threshold) {
      ++current;
    } else if (current > 0) {
      runs.push_back(current);
      current = 0;
    }
  }
  if (current > 0) runs.push_back(current);
  return runs;
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(k / 20.0);
  return grid;
}

ClusterCurve cluster_curve(const Dataset& dataset, std::span<const double> thresholds, ClusterAveraging averaging,
                           Field field) {
  if (thresholds.empty()) throw std::invalid_argument("threshold grid is empty");
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    if (!(thresholds[k] >= 0.0 && thresholds[k] <= 1.0)) {
      throw DomainError("threshold " + std::to_string(thresholds[k]) + " outside [0, 1]");
    }
    if (k > 0 && !(thresholds[k] > thresholds[k - 1])) {
      throw std::invalid_argument("threshold grid must be strictly ascending");
    }
  }

  const ThreadColumn column = extract_column(dataset, field);
  const auto tallies = kernels::parallel::cluster_tally(column.values, column.offsets, thresholds);

  ClusterCurve curve;
  curve.thresholds.assign(thresholds.begin(), thresholds.end());
  for (const auto& t : tallies) {
    curve.cluster_counts.push_back(t.clusters);
    curve.clustered_comments.push_back(t.clustered);
    double mean = std::numeric_limits<double>::quiet_NaN();
    if (t.clusters > 0) {
      mean = averaging == ClusterAveraging::pooled
                 ? static_cast<double>(t.clustered) / static_cast<double>(t.clusters)
                 : t.thread_mean_sum / static_cast<double>(t.threads_with_clusters);
    }
    curve.mean_sizes.push_back(mean);
  }
  return curve;
}

}  // namespace emoseq
