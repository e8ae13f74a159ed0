#pragma once

// Sequential-dependence statistics between consecutive comments of a thread:
// correlation ratio C(x_n, x_{n-1}) = p(x_n | x_{n-1}) / p(x_n), its logarithm
// (PMI), mutual information of the consecutive-pair table, and the two-step
// conditioned ratios C+ / C-.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "emoseq/core.hpp"
#include "emoseq/kernels.hpp"
#include "emoseq/rng.hpp"

namespace emoseq {

enum class LogBase { natural, two, ten };

LogBase parse_log_base(std::string_view text);
/// log(x) in `base` = ln(x) / ln_of_base(base).
double ln_of_base(LogBase base) noexcept;

/// Joint counts of consecutive pairs: entry (i, j) counts x_{n-1} in bin i, x_n in bin j.
class PairCountMatrix {
public:
  PairCountMatrix(BinSpec spec, std::vector<std::uint64_t> counts);

  const BinSpec& spec() const noexcept { return spec_; }
  std::size_t bins() const noexcept { return spec_.bin_count(); }
  std::uint64_t at(std::size_t prev, std::size_t next) const noexcept { return counts_[prev * bins() + next]; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t total_pairs() const noexcept { return total_; }
  std::uint64_t row_total(std::size_t prev) const noexcept { return rows_[prev]; }
  std::uint64_t col_total(std::size_t next) const noexcept { return cols_[next]; }

  PairCountMatrix transposed() const;

private:
  BinSpec spec_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> rows_;
  std::vector<std::uint64_t> cols_;
  std::uint64_t total_ = 0;
};

/// Every within-thread consecutive pair counted once; pairs never cross threads.
PairCountMatrix pair_counts(const Dataset& dataset, Field field, const BinSpec& spec);

struct CorrelationMatrix {
  enum class Kind { ratio, pmi };

  BinSpec spec;
  Kind kind = Kind::ratio;
  std::vector<double> values;         // row-major, row = previous comment's bin
  std::vector<std::uint8_t> defined;  // 1 where values[k] is meaningful

  std::size_t bins() const noexcept { return spec.bin_count(); }
  double at(std::size_t prev, std::size_t next) const noexcept { return values[prev * bins() + next]; }
  bool is_defined(std::size_t prev, std::size_t next) const noexcept { return defined[prev * bins() + next] != 0; }
  std::size_t defined_count() const noexcept;
};

inline constexpr std::uint64_t kDefaultMinCount = 10;

/// Entry (i, j) = [n_ij / row_i] / [col_j / N]. Cells are masked when the row
/// or column total is below `min_count` or the cell is empty. Throws
/// std::invalid_argument when there are no pairs and EmptyResultError when
/// every entry is masked.
CorrelationMatrix correlation_ratio(const PairCountMatrix& pairs, std::uint64_t min_count = kDefaultMinCount);

/// Entry-wise logarithm of the defined entries of a ratio matrix.
CorrelationMatrix pmi_matrix(const CorrelationMatrix& ratio, LogBase base = LogBase::natural);

struct MiEstimate {
  double plugin = 0.0;        // sum of p log(p / (p_row p_col)) over occupied cells
  double miller_madow = 0.0;  // plugin - (cells - rows - cols + 1) / (2 N), occupied counts
  std::size_t occupied_cells = 0;
  std::size_t occupied_rows = 0;
  std::size_t occupied_cols = 0;
  std::uint64_t total_pairs = 0;
};

/// Plug-in mutual information of the pair table; never negative.
double mutual_information(const PairCountMatrix& pairs, LogBase base = LogBase::natural);
MiEstimate estimate_mi(const PairCountMatrix& pairs, LogBase base = LogBase::natural);
/// Same estimate from a raw row-major bins x bins count table.
MiEstimate estimate_mi(std::span<const std::uint64_t> counts, std::size_t bins, LogBase base = LogBase::natural);

struct MiReportOptions {
  Seed seed{};
  std::size_t bootstrap_replicates = 200;
  double confidence = 0.95;
  LogBase base = LogBase::natural;
};

struct MiReportRow {
  std::string condition;  // no_shuffle | thread_shuffle | global_shuffle
  MiEstimate estimate;
  double bootstrap_se = 0.0;  // std. deviation of bias-corrected MI over thread-resampled replicates
  double ci_low = 0.0;        // percentile interval of the same replicates
  double ci_high = 0.0;
};

struct MiReport {
  std::array<MiReportRow, 3> rows;
  Seed seed{};
  std::size_t bootstrap_replicates = 0;
};

/// MI of the original data, a thread shuffle (stream derive_seed(seed, 1)) and
/// a global shuffle (derive_seed(seed, 2)). Errors are from resampling whole
/// threads with replacement.
MiReport mi_report(const Dataset& dataset, Field field, const BinSpec& spec, const MiReportOptions& options);

struct ThreeStepOptions {
  double top_cut = 0.9;
  double bottom_cut = 0.1;
  std::uint64_t min_count = kDefaultMinCount;
};

struct ThreeStepCurve {
  BinSpec spec;
  double top_cut = 0.9;
  double bottom_cut = 0.1;
  std::vector<double> c_plus;
  std::vector<double> c_minus;
  std::vector<std::uint8_t> plus_defined;
  std::vector<std::uint8_t> minus_defined;
  std::vector<std::uint64_t> plus_counts;      // x_n bin counts after two comments >= top_cut
  std::vector<std::uint64_t> minus_counts;     // x_n bin counts after two comments <= bottom_cut
  std::vector<std::uint64_t> marginal_counts;  // x_n bin counts over all triples
  std::uint64_t plus_events = 0;
  std::uint64_t minus_events = 0;
  std::uint64_t triples = 0;

  bool plus_available() const noexcept { return plus_events > 0; }
  bool minus_available() const noexcept { return minus_events > 0; }
};

/// C+(bin) = P(x_n in bin | x_{n-1}, x_{n-2} >= top_cut) / P(x_n in bin), and
/// C- likewise with <= bottom_cut; P(x_n in bin) is taken over every triple
/// end. A bin is defined when its conditioning count and marginal count both
/// reach min_count (and are positive). Throws EmptyResultError when the
/// dataset holds no triple.
ThreeStepCurve three_step(const Dataset& dataset, Field field, const BinSpec& spec,
                          const ThreeStepOptions& options = {});

}  // namespace emoseq
