#pragma once

// Record-per-comment file formats.
//
//   JSONL: {"thread_id": "...", "index": 0, "p_pos": 0.91, "p_sub": 0.77}
//          one object per line; unknown keys are ignored.
//   CSV:   header row naming thread_id,index,p_pos,p_sub (any column order),
//          then one row per comment. thread_id may be double-quoted.
//
// Records may appear in any order. Threads come back in order of first
// appearance, comments sorted by index.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "emoseq/core.hpp"

namespace emoseq {

enum class Format { jsonl, csv };

std::string_view format_name(Format f) noexcept;
Format parse_format(std::string_view text);
/// ".csv" selects CSV; anything else JSONL.
Format format_from_path(const std::filesystem::path& path) noexcept;

class IngestError : public std::runtime_error {
public:
  enum class Kind { io, parse, duplicate, contiguity, range };

  IngestError(Kind kind, std::size_t line, const std::string& what)
      : std::runtime_error(what), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  /// 1-based line number in the source, 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

private:
  Kind kind_;
  std::size_t line_;
};

Dataset read_dataset(std::istream& in, Format format, std::string source_label = {});
Dataset read_dataset(const std::filesystem::path& path, Format format);

void write_dataset(const Dataset& dataset, std::ostream& out, Format format);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path, Format format);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace emoseq
