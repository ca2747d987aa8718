#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "claimnet/error.hpp"

namespace claimnet {

/// Shortest round-trip representation of a double (deterministic output files).
inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

inline double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw DataError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return v;
}

inline long parse_long(std::string_view s, std::string_view what) {
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw DataError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return v;
}

// Plain comma-separated files: no quoting or embedded commas, which all of the
// formats used by this project satisfy by construction.
class CsvReader {
 public:
  explicit CsvReader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!next_line(line)) throw DataError("'" + path + "' is empty, expected a header row");
    split(line, header_);
  }

  const std::vector<std::string>& header() const { return header_; }

  /// Index of a header column, or nullopt when absent.
  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (header_[i] == name) return i;
    }
    return std::nullopt;
  }

  std::size_t require_column(std::string_view name) const {
    if (auto c = column(name)) return *c;
    throw DataError("'" + path_ + "': missing required column '" + std::string(name) + "'");
  }

  /// Reads the next record. Returns false at end of file.
  bool read_row(std::vector<std::string>& fields) {
    std::string line;
    if (!next_line(line)) return false;
    split(line, fields);
    ++row_number_;
    if (fields.size() != header_.size()) {
      throw DataError("'" + path_ + "' row " + std::to_string(row_number_) + ": expected " +
                      std::to_string(header_.size()) + " fields, found " + std::to_string(fields.size()));
    }
    return true;
  }

  std::size_t row_number() const { return row_number_; }
  const std::string& path() const { return path_; }

 private:
  bool next_line(std::string& line) {
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }

  static void split(const std::string& line, std::vector<std::string>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        out.emplace_back(line.substr(start));
        break;
      }
      out.emplace_back(line.substr(start, pos - start));
      start = pos + 1;
    }
  }

  std::string path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::size_t row_number_ = 0;
};

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open '" + path + "' for writing");
  }

  void write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("failed writing '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace claimnet
