// CSV reading and writing. Fields may be double-quoted; embedded quotes are
// doubled. Every row must match the header width.
#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "corisk/error.hpp"
#include "corisk/io.hpp"

namespace corisk {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return static_cast<int>(j);
    return -1;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, int line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw Error(ErrorKind::Parse, "csv line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

inline CsvTable read_csv_string(const std::string& text) {
  CsvTable t;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.eof()) break;
    std::vector<std::string> fields = detail::split_csv_line(line, line_no);
    if (line_no == 1) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size())
        throw Error(ErrorKind::Parse, "csv line " + std::to_string(line_no) + ": expected " +
                                          std::to_string(t.header.size()) + " fields, got " +
                                          std::to_string(fields.size()));
      t.rows.push_back(std::move(fields));
    }
  }
  if (t.header.empty()) throw Error(ErrorKind::Parse, "csv: missing header row");
  return t;
}

inline CsvTable read_csv_file(const std::string& path) { return read_csv_string(read_text_file(path)); }

inline std::string csv_escape(const std::string& field) {
  bool needs = field.find_first_of(",\"\n") != std::string::npos;
  if (!needs) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline std::string write_csv_string(const CsvTable& t) {
  std::ostringstream out;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (j) out << ',';
    out << csv_escape(t.header[j]);
  }
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << csv_escape(row[j]);
    }
    out << '\n';
  }
  return out.str();
}

inline void write_csv_file(const std::string& path, const CsvTable& t) {
  atomic_write_text(path, write_csv_string(t));
}

inline double parse_double_field(const std::string& s, const std::string& what, int line_no) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw Error(ErrorKind::Parse, "csv line " + std::to_string(line_no) + ": bad numeric value '" + s +
                                      "' in column " + what);
  return v;
}

}  // namespace corisk
