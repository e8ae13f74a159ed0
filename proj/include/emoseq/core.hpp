#pragma once

// Domain model for threaded comment chains annotated with a positive-probability
// and a subjectivity-probability score per comment.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace emoseq {

/// Raised when a probability or parameter falls outside its admissible range.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised when an estimator has nothing to report (every entry masked, no triples, ...).
class EmptyResultError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Field { positive, subjective };

std::string_view field_name(Field f) noexcept;
/// Accepts "pos"/"p_pos"/"positive" and "sub"/"p_sub"/"subjective".
Field parse_field(std::string_view text);

struct Comment {
  std::size_t index = 0;
  double p_pos = 0.0;
  double p_sub = 0.0;

  double value(Field f) const noexcept { return f == Field::positive ? p_pos : p_sub; }
  friend bool operator==(const Comment&, const Comment&) = default;
};

struct Thread {
  std::string thread_id;
  std::vector<Comment> comments;

  std::size_t length() const noexcept { return comments.size(); }
  friend bool operator==(const Thread&, const Thread&) = default;
};

struct Dataset {
  std::vector<Thread> threads;
  std::string source_label;

  std::size_t comment_count() const noexcept;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Which bin owns a value lying exactly on an interior edge.
enum class EdgeRule {
  upper_bin,  // [lo, hi): the edge belongs to the bin above it
  lower_bin,  // (lo, hi]: the edge belongs to the bin below it
};

/// Uniform binning of [0,1]. The last bin is closed at 1.0 and may be narrower
/// than `width` when 1/width is not an integer.
class BinSpec {
public:
  explicit BinSpec(double width = 0.1, EdgeRule rule = EdgeRule::upper_bin);

  double width() const noexcept { return width_; }
  EdgeRule edge_rule() const noexcept { return rule_; }
  std::size_t bin_count() const noexcept { return bins_; }

  double lower_edge(std::size_t bin) const noexcept;
  double upper_edge(std::size_t bin) const noexcept;
  double center(std::size_t bin) const noexcept { return 0.5 * (lower_edge(bin) + upper_edge(bin)); }

  /// Throws DomainError for values outside [0,1] (NaN included).
  std::size_t bin_of(double value) const;
  /// Unchecked variant used by the kernels once the dataset is validated.
  std::size_t bin_of_unchecked(double value) const noexcept;

  friend bool operator==(const BinSpec& a, const BinSpec& b) noexcept {
    return a.width_ == b.width_ && a.rule_ == b.rule_;
  }

private:
  double width_;
  EdgeRule rule_;
  std::size_t bins_;
};

inline std::size_t bin_of(double value, const BinSpec& spec) { return spec.bin_of(value); }

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  range,          // a probability outside [0,1]
  index_order,    // comment indices not contiguous 0..N-1 in order
  empty_thread,   // stored thread with no comments
  duplicate_id,   // thread_id seen twice
};

std::string_view violation_name(ViolationKind k) noexcept;

struct Violation {
  ViolationKind kind;
  std::string thread_id;
  std::size_t comment_index = 0;
  std::string detail;
};

struct ValidationReport {
  std::size_t thread_count = 0;
  std::size_t comment_count = 0;
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

ValidationReport validate(const Dataset& dataset);

// ---------------------------------------------------------------------------
// Flat column view used by the counting kernels.

/// One field of every comment laid out contiguously, with thread boundaries in
/// CSR form: thread t occupies values[offsets[t], offsets[t+1]).
struct ThreadColumn {
  std::vector<double> values;
  std::vector<std::size_t> offsets{0};

  std::size_t thread_count() const noexcept { return offsets.size() - 1; }
  std::span<const double> thread(std::size_t t) const noexcept {
    return {values.data() + offsets[t], offsets[t + 1] - offsets[t]};
  }
};

ThreadColumn extract_column(const Dataset& dataset, Field field);

}  // namespace emoseq
