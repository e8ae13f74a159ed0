#include "emoseq/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace emoseq {

namespace {

using Kind = IngestError::Kind;
using nlohmann::json;

struct PendingComment {
  Comment comment;
  std::size_t line;
};

struct PendingThread {
  std::string id;
  std::vector<PendingComment> comments;
};

// Accumulates records in arrival order; finish() sorts and checks contiguity.
class DatasetBuilder {
public:
  void add(std::string_view thread_id, long long index, double p_pos, double p_sub, std::size_t line) {
    if (index < 0) {
      throw IngestError(Kind::parse, line, "line " + std::to_string(line) + ": negative index");
    }
    check_probability("p_pos", p_pos, thread_id, line);
    check_probability("p_sub", p_sub, thread_id, line);

    std::string key(thread_id);
    auto [it, inserted] = lookup_.try_emplace(key, threads_.size());
    if (inserted) threads_.push_back({std::move(key), {}});
    threads_[it->second].comments.push_back({{static_cast<std::size_t>(index), p_pos, p_sub}, line});
  }

  Dataset finish(std::string label) && {
    Dataset ds;
    ds.source_label = std::move(label);
    ds.threads.reserve(threads_.size());
    for (PendingThread& pt : threads_) {
      auto& cs = pt.comments;
      std::stable_sort(cs.begin(), cs.end(), [](const PendingComment& a, const PendingComment& b) {
        return a.comment.index < b.comment.index;
      });
      Thread thread;
      thread.thread_id = std::move(pt.id);
      thread.comments.reserve(cs.size());
      for (std::size_t k = 0; k < cs.size(); ++k) {
        if (k > 0 && cs[k].comment.index == cs[k - 1].comment.index) {
          throw IngestError(Kind::duplicate, cs[k].line,
                            "line " + std::to_string(cs[k].line) + ": duplicate record (thread_id '" +
                                thread.thread_id + "', index " + std::to_string(cs[k].comment.index) +
                                ") first seen on line " + std::to_string(cs[k - 1].line));
        }
        if (cs[k].comment.index != k) {
          throw IngestError(Kind::contiguity, cs[k].line,
                            "thread '" + thread.thread_id + "': indices are not contiguous from 0 (missing index " +
                                std::to_string(k) + ")");
        }
        thread.comments.push_back(cs[k].comment);
      }
      ds.threads.push_back(std::move(thread));
    }
    return ds;
  }

private:
  static void check_probability(const char* name, double v, std::string_view thread_id, std::size_t line) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw IngestError(Kind::range, line,
                        "line " + std::to_string(line) + ": " + name + " = " + format_double(v) +
                            " outside [0, 1] (thread_id '" + std::string(thread_id) + "')");
    }
  }

  std::vector<PendingThread> threads_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  throw IngestError(Kind::parse, line, "line " + std::to_string(line) + ": " + msg);
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

void read_jsonl(std::istream& in, DatasetBuilder& builder) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (is_blank(text)) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      parse_fail(line, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) parse_fail(line, "expected a JSON object");

    auto field = [&](const char* key) -> const json& {
      auto it = obj.find(key);
      if (it == obj.end()) parse_fail(line, std::string("missing key '") + key + "'");
      return *it;
    };
    const json& id = field("thread_id");
    std::string thread_id;
    if (id.is_string()) {
      thread_id = id.get<std::string>();
    } else if (id.is_number_integer()) {
      thread_id = id.dump();
    } else {
      parse_fail(line, "thread_id must be a string or integer");
    }
    const json& index = field("index");
    if (!index.is_number_integer()) parse_fail(line, "index must be an integer");
    const json& pos = field("p_pos");
    const json& sub = field("p_sub");
    if (!pos.is_number() || !sub.is_number()) parse_fail(line, "p_pos and p_sub must be numbers");

    builder.add(thread_id, index.get<long long>(), pos.get<double>(), sub.get<double>(), line);
  }
  if (in.bad()) throw IngestError(Kind::io, line, "read failure after line " + std::to_string(line));
}

// Splits one CSV row. Fields may be double-quoted with "" as an escaped quote.
std::vector<std::string> split_csv(std::string_view row, std::size_t line) {
  std::vector<std::string> out;
  std::string cur;
  std::size_t i = 0;
  while (true) {
    cur.clear();
    if (i < row.size() && row[i] == '"') {
      ++i;
      while (true) {
        if (i >= row.size()) parse_fail(line, "unterminated quoted field");
        if (row[i] == '"') {
          if (i + 1 < row.size() && row[i + 1] == '"') {
            cur.push_back('"');
            i += 2;
          } else {
            ++i;
            break;
          }
        } else {
          cur.push_back(row[i++]);
        }
      }
      if (i < row.size() && row[i] != ',') parse_fail(line, "unexpected text after quoted field");
    } else {
      while (i < row.size() && row[i] != ',') cur.push_back(row[i++]);
    }
    out.push_back(cur);
    if (i >= row.size()) break;
    ++i;  // comma
  }
  return out;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line, const char* what) {
  T v{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || first == last) {
    parse_fail(line, std::string("cannot parse ") + what + " from '" + s + "'");
  }
  return v;
}

void read_csv(std::istream& in, DatasetBuilder& builder) {
  std::string text;
  std::size_t line = 0;
  int col_id = -1, col_index = -1, col_pos = -1, col_sub = -1;
  std::size_t width = 0;
  bool have_header = false;

  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (is_blank(text)) continue;
    auto cells = split_csv(text, line);
    if (!have_header) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::string& name = cells[c];
        if (name == "thread_id") col_id = static_cast<int>(c);
        else if (name == "index") col_index = static_cast<int>(c);
        else if (name == "p_pos") col_pos = static_cast<int>(c);
        else if (name == "p_sub") col_sub = static_cast<int>(c);
      }
      if (col_id < 0 || col_index < 0 || col_pos < 0 || col_sub < 0) {
        parse_fail(line, "CSV header must name thread_id, index, p_pos and p_sub");
      }
      width = cells.size();
      have_header = true;
      continue;
    }
    if (cells.size() != width) {
      parse_fail(line, "expected " + std::to_string(width) + " columns, found " + std::to_string(cells.size()));
    }
    builder.add(cells[col_id], parse_number<long long>(cells[col_index], line, "index"),
                parse_number<double>(cells[col_pos], line, "p_pos"),
                parse_number<double>(cells[col_sub], line, "p_sub"), line);
  }
  if (in.bad()) throw IngestError(Kind::io, line, "read failure after line " + std::to_string(line));
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string_view format_name(Format f) noexcept { return f == Format::jsonl ? "jsonl" : "csv"; }

Format parse_format(std::string_view text) {
  if (text == "jsonl" || text == "json") return Format::jsonl;
  if (text == "csv") return Format::csv;
  throw std::invalid_argument("unknown format '" + std::string(text) + "' (expected jsonl or csv)");
}

Format format_from_path(const std::filesystem::path& path) noexcept {
  return path.extension() == ".csv" ? Format::csv : Format::jsonl;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Dataset read_dataset(std::istream& in, Format format, std::string source_label) {
  DatasetBuilder builder;
  if (format == Format::jsonl) {
    read_jsonl(in, builder);
  } else {
    read_csv(in, builder);
  }
  return std::move(builder).finish(std::move(source_label));
}

Dataset read_dataset(const std::filesystem::path& path, Format format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(Kind::io, 0, "cannot open '" + path.string() + "' for reading");
  return read_dataset(in, format, path.string());
}

void write_dataset(const Dataset& dataset, std::ostream& out, Format format) {
  std::string row;
  if (format == Format::csv) out << "thread_id,index,p_pos,p_sub\n";
  for (const Thread& thread : dataset.threads) {
    const std::string id = format == Format::jsonl ? json(thread.thread_id).dump() : csv_quote(thread.thread_id);
    for (const Comment& c : thread.comments) {
      row.clear();
      if (format == Format::jsonl) {
        row += "{\"thread_id\":";
        row += id;
        row += ",\"index\":";
        row += std::to_string(c.index);
        row += ",\"p_pos\":";
        row += format_double(c.p_pos);
        row += ",\"p_sub\":";
        row += format_double(c.p_sub);
        row += "}\n";
      } else {
        row += id;
        row += ',';
        row += std::to_string(c.index);
        row += ',';
        row += format_double(c.p_pos);
        row += ',';
        row += format_double(c.p_sub);
        row += '\n';
      }
      out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
  }
  if (!out) throw IngestError(Kind::io, 0, "write failure");
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path, Format format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestError(Kind::io, 0, "cannot open '" + path.string() + "' for writing");
  write_dataset(dataset, out, format);
  out.flush();
  if (!out) throw IngestError(Kind::io, 0, "write failure on '" + path.string() + "'");
}

}  // namespace emoseq
