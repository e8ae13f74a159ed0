#include "emoseq/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "emoseq/nullmodels.hpp"

namespace emoseq {

LogBase parse_log_base(std::string_view text) {
  if (text == "e" || text == "natural" || text == "nats") return LogBase::natural;
  if (text == "2" || text == "bits") return LogBase::two;
  if (text == "10") return LogBase::ten;
  throw std::invalid_argument("unknown log base '" + std::string(text) + "' (expected e, 2 or 10)");
}

double ln_of_base(LogBase base) noexcept {
  switch (base) {
    case LogBase::natural: return 1.0;
    case LogBase::two: return std::log(2.0);
    case LogBase::ten: return std::log(10.0);
  }
  return 1.0;
}

PairCountMatrix::PairCountMatrix(BinSpec spec, std::vector<std::uint64_t> counts)
    : spec_(spec), counts_(std::move(counts)), rows_(spec.bin_count(), 0), cols_(spec.bin_count(), 0) {
  const std::size_t b = spec_.bin_count();
  if (counts_.size() != b * b) throw std::invalid_argument("pair count table does not match bin spec");
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const std::uint64_t n = counts_[i * b + j];
      rows_[i] += n;
      cols_[j] += n;
      total_ += n;
    }
  }
}

PairCountMatrix PairCountMatrix::transposed() const {
  const std::size_t b = bins();
  std::vector<std::uint64_t> t(b * b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) t[j * b + i] = counts_[i * b + j];
  }
  return {spec_, std::move(t)};
}

PairCountMatrix pair_counts(const Dataset& dataset, Field field, const BinSpec& spec) {
  const ThreadColumn column = extract_column(dataset, field);
  for (double v : column.values) spec.bin_of(v);
  const auto codes = kernels::parallel::bin_codes(column.values, spec);
  return {spec, kernels::parallel::pair_counts(codes, column.offsets, spec.bin_count())};
}

std::size_t CorrelationMatrix::defined_count() const noexcept {
  return static_cast<std::size_t>(std::count(defined.begin(), defined.end(), std::uint8_t{1}));
}

CorrelationMatrix correlation_ratio(const PairCountMatrix& pairs, std::uint64_t min_count) {
  if (pairs.total_pairs() == 0) throw std::invalid_argument("correlation ratio needs at least one pair");
  const std::size_t b = pairs.bins();
  const double total = static_cast<double>(pairs.total_pairs());
  const std::uint64_t floor_count = std::max<std::uint64_t>(min_count, 1);

  CorrelationMatrix out{pairs.spec(), CorrelationMatrix::Kind::ratio,
                        std::vector<double>(b * b, std::numeric_limits<double>::quiet_NaN()),
                        std::vector<std::uint8_t>(b * b, 0)};
  for (std::size_t i = 0; i < b; ++i) {
    const std::uint64_t row = pairs.row_total(i);
    if (row < floor_count) continue;
    for (std::size_t j = 0; j < b; ++j) {
      const std::uint64_t col = pairs.col_total(j);
      const std::uint64_t n = pairs.at(i, j);
      if (col < floor_count || n == 0) continue;
      out.values[i * b + j] = (static_cast<double>(n) * total) / (static_cast<double>(row) * static_cast<double>(col));
      out.defined[i * b + j] = 1;
    }
  }
  if (out.defined_count() == 0) {
    throw EmptyResultError("every correlation-ratio entry is below min_count " + std::to_string(min_count));
  }
  return out;
}

CorrelationMatrix pmi_matrix(const CorrelationMatrix& ratio, LogBase base) {
  CorrelationMatrix out = ratio;
  out.kind = CorrelationMatrix::Kind::pmi;
  const double scale = ln_of_base(base);
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    if (out.defined[k] && out.values[k] > 0.0) {
      out.values[k] = std::log(out.values[k]) / scale;
    } else {
      out.defined[k] = 0;
      out.values[k] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

MiEstimate estimate_mi(std::span<const std::uint64_t> counts, std::size_t bins, LogBase base) {
  std::vector<std::uint64_t> rows(bins, 0), cols(bins, 0);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < bins; ++i) {
    for (std::size_t j = 0; j < bins; ++j) {
      rows[i] += counts[i * bins + j];
      cols[j] += counts[i * bins + j];
    }
    total += rows[i];
  }
  if (total == 0) throw std::invalid_argument("mutual information needs at least one pair");

  MiEstimate est;
  est.total_pairs = total;
  const double n = static_cast<double>(total);
  double sum = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    if (rows[i] == 0) continue;
    ++est.occupied_rows;
    for (std::size_t j = 0; j < bins; ++j) {
      const std::uint64_t c = counts[i * bins + j];
      if (c == 0) continue;
      ++est.occupied_cells;
      const double nij = static_cast<double>(c);
      sum += nij * std::log((nij * n) / (static_cast<double>(rows[i]) * static_cast<double>(cols[j])));
    }
  }
  est.occupied_cols = static_cast<std::size_t>(std::count_if(cols.begin(), cols.end(), [](auto c) { return c > 0; }));

  const double scale = ln_of_base(base);
  // Jensen gives sum >= 0; clamp the last-ulp rounding of near-independent tables.
  est.plugin = std::max(0.0, sum / n) / scale;
  const double dof = static_cast<double>(est.occupied_cells) - static_cast<double>(est.occupied_rows) -
                     static_cast<double>(est.occupied_cols) + 1.0;
  est.miller_madow = est.plugin - dof / (2.0 * n) / scale;
  return est;
}

MiEstimate estimate_mi(const PairCountMatrix& pairs, LogBase base) {
  return estimate_mi(pairs.counts(), pairs.bins(), base);
}

double mutual_information(const PairCountMatrix& pairs, LogBase base) { return estimate_mi(pairs, base).plugin; }

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

MiReportRow report_row(std::string condition, const Dataset& data, Field field, const BinSpec& spec,
                       const MiReportOptions& options, Seed bootstrap_seed) {
  const ThreadColumn column = extract_column(data, field);
  for (double v : column.values) spec.bin_of(v);
  const auto codes = kernels::parallel::bin_codes(column.values, spec);
  const std::size_t bins = spec.bin_count();

  MiReportRow row;
  row.condition = std::move(condition);
  row.estimate = estimate_mi(kernels::parallel::pair_counts(codes, column.offsets, bins), bins, options.base);

  const std::size_t threads = column.thread_count();
  const std::size_t reps = options.bootstrap_replicates;
  std::vector<double> replicate(reps, std::numeric_limits<double>::quiet_NaN());
  const auto nreps = static_cast<std::ptrdiff_t>(reps);
#pragma omp parallel
  {
    std::vector<std::uint64_t> counts(bins * bins);
#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t r = 0; r < nreps; ++r) {
      Rng rng(derive_seed(bootstrap_seed, static_cast<std::uint64_t>(r)));
      std::fill(counts.begin(), counts.end(), 0);
      std::uint64_t drawn_pairs = 0;
      for (std::size_t k = 0; k < threads; ++k) {
        const std::size_t t = rng.uniform_below(threads);
        for (std::size_t i = column.offsets[t] + 1; i < column.offsets[t + 1]; ++i) {
          ++counts[codes[i - 1] * bins + codes[i]];
          ++drawn_pairs;
        }
      }
      if (drawn_pairs > 0) replicate[r] = estimate_mi(counts, bins, options.base).miller_madow;
    }
  }

  std::vector<double> valid;
  valid.reserve(reps);
  for (double v : replicate) {
    if (!std::isnan(v)) valid.push_back(v);
  }
  if (valid.size() >= 2) {
    const double mean = std::accumulate(valid.begin(), valid.end(), 0.0) / static_cast<double>(valid.size());
    double ss = 0.0;
    for (double v : valid) ss += (v - mean) * (v - mean);
    row.bootstrap_se = std::sqrt(ss / static_cast<double>(valid.size() - 1));
    std::sort(valid.begin(), valid.end());
    const double tail = 0.5 * (1.0 - options.confidence);
    row.ci_low = quantile_sorted(valid, tail);
    row.ci_high = quantile_sorted(valid, 1.0 - tail);
  } else {
    row.bootstrap_se = std::numeric_limits<double>::quiet_NaN();
    row.ci_low = row.ci_high = row.estimate.miller_madow;
  }
  return row;
}

}  // namespace

MiReport mi_report(const Dataset& dataset, Field field, const BinSpec& spec, const MiReportOptions& options) {
  if (!(options.confidence > 0.0 && options.confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0, 1)");
  }
  MiReport report;
  report.seed = options.seed;
  report.bootstrap_replicates = options.bootstrap_replicates;
  report.rows[0] = report_row("no_shuffle", dataset, field, spec, options, derive_seed(options.seed, 10));
  report.rows[1] = report_row("thread_shuffle", thread_shuffle(dataset, derive_seed(options.seed, 1)), field, spec,
                              options, derive_seed(options.seed, 11));
  report.rows[2] = report_row("global_shuffle", global_shuffle(dataset, derive_seed(options.seed, 2)), field, spec,
                              options, derive_seed(options.seed, 12));
  return report;
}

ThreeStepCurve three_step(const Dataset& dataset, Field field, const BinSpec& spec, const ThreeStepOptions& options) {
  const ThreadColumn column = extract_column(dataset, field);
  for (double v : column.values) spec.bin_of(v);
  const auto codes = kernels::parallel::bin_codes(column.values, spec);
  const std::size_t bins = spec.bin_count();
  kernels::TripleTally tally = kernels::parallel::triple_counts(column.values, codes, column.offsets, bins,
                                                                options.top_cut, options.bottom_cut);
  if (tally.triples == 0) {
    throw EmptyResultError("no thread has three consecutive comments; three-step correlations undefined");
  }

  ThreeStepCurve curve;
  curve.spec = spec;
  curve.top_cut = options.top_cut;
  curve.bottom_cut = options.bottom_cut;
  curve.plus_events = tally.plus_events;
  curve.minus_events = tally.minus_events;
  curve.triples = tally.triples;
  curve.c_plus.assign(bins, std::numeric_limits<double>::quiet_NaN());
  curve.c_minus.assign(bins, std::numeric_limits<double>::quiet_NaN());
  curve.plus_defined.assign(bins, 0);
  curve.minus_defined.assign(bins, 0);

  const std::uint64_t floor_count = std::max<std::uint64_t>(options.min_count, 1);
  const double triples = static_cast<double>(tally.triples);
  auto fill = [&](std::uint64_t events, const std::vector<std::uint64_t>& joint, std::vector<double>& c,
                  std::vector<std::uint8_t>& defined) {
    if (events < floor_count) return;
    for (std::size_t b = 0; b < bins; ++b) {
      if (tally.marginal[b] < floor_count) continue;
      const double conditional = static_cast<double>(joint[b]) / static_cast<double>(events);
      const double marginal = static_cast<double>(tally.marginal[b]) / triples;
      c[b] = conditional / marginal;
      defined[b] = 1;
    }
  };
  fill(tally.plus_events, tally.plus_joint, curve.c_plus, curve.plus_defined);
  fill(tally.minus_events, tally.minus_joint, curve.c_minus, curve.minus_defined);

  curve.plus_counts = std::move(tally.plus_joint);
  curve.minus_counts = std::move(tally.minus_joint);
  curve.marginal_counts = std::move(tally.marginal);
  return curve;
}

}  // namespace emoseq
