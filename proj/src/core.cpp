#include "emoseq/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

namespace emoseq {

namespace {

// Slack applied when deciding whether a value sits on a bin edge, so that
// decimal edges such as 0.3 = 3 * 0.1 land where a reader expects.
constexpr double kEdgeSlack = 1e-9;

bool in_unit_interval(double v) noexcept { return v >= 0.0 && v <= 1.0; }

}  // namespace

std::string_view field_name(Field f) noexcept {
  return f == Field::positive ? "pos" : "sub";
}

Field parse_field(std::string_view text) {
  if (text == "pos" || text == "p_pos" || text == "positive") return Field::positive;
  if (text == "sub" || text == "p_sub" || text == "subjective") return Field::subjective;
  throw std::invalid_argument("unknown field '" + std::string(text) + "' (expected pos or sub)");
}

std::size_t Dataset::comment_count() const noexcept {
  std::size_t n = 0;
  for (const auto& t : threads) n += t.comments.size();
  return n;
}

BinSpec::BinSpec(double width, EdgeRule rule) : width_(width), rule_(rule) {
  if (!(width > 0.0 && width <= 1.0)) {
    throw DomainError("bin width must lie in (0, 1], got " + std::to_string(width));
  }
  bins_ = static_cast<std::size_t>(std::ceil(1.0 / width - kEdgeSlack));
  bins_ = std::max<std::size_t>(bins_, 1);
}

double BinSpec::lower_edge(std::size_t bin) const noexcept {
  return std::min(1.0, static_cast<double>(bin) * width_);
}

double BinSpec::upper_edge(std::size_t bin) const noexcept {
  return bin + 1 >= bins_ ? 1.0 : static_cast<double>(bin + 1) * width_;
}

std::size_t BinSpec::bin_of(double value) const {
  if (!in_unit_interval(value)) {
    throw DomainError("value " + std::to_string(value) + " outside [0, 1]");
  }
  return bin_of_unchecked(value);
}

std::size_t BinSpec::bin_of_unchecked(double value) const noexcept {
  const double scaled = value / width_;
  double k = rule_ == EdgeRule::upper_bin ? std::floor(scaled + kEdgeSlack)
                                          : std::ceil(scaled - kEdgeSlack) - 1.0;
  k = std::clamp(k, 0.0, static_cast<double>(bins_ - 1));
  return static_cast<std::size_t>(k);
}

std::string_view violation_name(ViolationKind k) noexcept {
  switch (k) {
    case ViolationKind::range: return "range";
    case ViolationKind::index_order: return "index_order";
    case ViolationKind::empty_thread: return "empty_thread";
    case ViolationKind::duplicate_id: return "duplicate_id";
  }
  return "unknown";
}

ValidationReport validate(const Dataset& dataset) {
  ValidationReport report;
  report.thread_count = dataset.threads.size();
  std::unordered_set<std::string> seen;
  seen.reserve(dataset.threads.size());

  for (const Thread& thread : dataset.threads) {
    report.comment_count += thread.comments.size();
    if (!seen.insert(thread.thread_id).second) {
      report.violations.push_back({ViolationKind::duplicate_id, thread.thread_id, 0, "thread_id repeated"});
    }
    if (thread.comments.empty()) {
      report.violations.push_back({ViolationKind::empty_thread, thread.thread_id, 0, "thread has no comments"});
      continue;
    }
    for (std::size_t pos = 0; pos < thread.comments.size(); ++pos) {
      const Comment& c = thread.comments[pos];
      if (c.index != pos) {
        report.violations.push_back({ViolationKind::index_order, thread.thread_id, c.index,
                                     "expected index " + std::to_string(pos)});
      }
      if (!in_unit_interval(c.p_pos)) {
        report.violations.push_back({ViolationKind::range, thread.thread_id, c.index,
                                     "p_pos = " + std::to_string(c.p_pos)});
      }
      if (!in_unit_interval(c.p_sub)) {
        report.violations.push_back({ViolationKind::range, thread.thread_id, c.index,
                                     "p_sub = " + std::to_string(c.p_sub)});
      }
    }
  }
  return report;
}

ThreadColumn extract_column(const Dataset& dataset, Field field) {
  ThreadColumn col;
  col.values.reserve(dataset.comment_count());
  col.offsets.reserve(dataset.threads.size() + 1);
  for (const Thread& thread : dataset.threads) {
    for (const Comment& c : thread.comments) col.values.push_back(c.value(field));
    col.offsets.push_back(col.values.size());
  }
  return col;
}

}  // namespace emoseq
