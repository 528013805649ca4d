// Minimal TOML-subset reader used for every corisk config file.
//
// Supported syntax:
//   # comment
//   [table] / [table.subtable]      table headers
//   [[table]]                       array-of-tables element
//   key = "string" | number | true | false | [scalar, scalar, ...]
// Arrays may span lines until the closing bracket. Scalars inside one array
// must share one type. Duplicate keys are a parse error.
#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "corisk/error.hpp"

namespace corisk {

class ConfigNode {
public:
  enum class Kind { Table, TableArray, String, Number, Bool, Array };

  Kind kind = Kind::Table;
  std::string str;
  double num = 0.0;
  bool flag = false;
  std::vector<ConfigNode> items;                           // Array / TableArray
  std::vector<std::pair<std::string, ConfigNode>> entries; // Table

  const ConfigNode* find(const std::string& key) const {
    for (const auto& e : entries)
      if (e.first == key) return &e.second;
    return nullptr;
  }

  bool has(const std::string& key) const { return find(key) != nullptr; }

  const ConfigNode& at(const std::string& key) const {
    const ConfigNode* n = find(key);
    if (!n) throw Error(ErrorKind::Schema, "config: missing key '" + key + "'");
    return *n;
  }

  ConfigNode& obtain(const std::string& key) {
    for (auto& e : entries)
      if (e.first == key) return e.second;
    entries.emplace_back(key, ConfigNode{});
    return entries.back().second;
  }

  std::string get_string(const std::string& key) const {
    const ConfigNode& n = at(key);
    if (n.kind != Kind::String) throw Error(ErrorKind::Schema, "config: '" + key + "' is not a string");
    return n.str;
  }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    return has(key) ? get_string(key) : dflt;
  }

  double get_number(const std::string& key) const {
    const ConfigNode& n = at(key);
    if (n.kind != Kind::Number) throw Error(ErrorKind::Schema, "config: '" + key + "' is not a number");
    return n.num;
  }

  double get_number(const std::string& key, double dflt) const {
    return has(key) ? get_number(key) : dflt;
  }

  std::int64_t get_int(const std::string& key) const {
    double v = get_number(key);
    double r = std::nearbyint(v);
    if (std::fabs(v - r) > 1e-9) throw Error(ErrorKind::Schema, "config: '" + key + "' is not an integer");
    return static_cast<std::int64_t>(r);
  }

  std::int64_t get_int(const std::string& key, std::int64_t dflt) const {
    return has(key) ? get_int(key) : dflt;
  }

  bool get_bool(const std::string& key) const {
    const ConfigNode& n = at(key);
    if (n.kind != Kind::Bool) throw Error(ErrorKind::Schema, "config: '" + key + "' is not a boolean");
    return n.flag;
  }

  bool get_bool(const std::string& key, bool dflt) const {
    return has(key) ? get_bool(key) : dflt;
  }

  std::vector<double> get_number_array(const std::string& key) const {
    const ConfigNode& n = at(key);
    if (n.kind != Kind::Array) throw Error(ErrorKind::Schema, "config: '" + key + "' is not an array");
    std::vector<double> out;
    for (const auto& it : n.items) {
      if (it.kind != Kind::Number) throw Error(ErrorKind::Schema, "config: '" + key + "' holds non-numeric items");
      out.push_back(it.num);
    }
    return out;
  }

  std::vector<std::string> get_string_array(const std::string& key) const {
    const ConfigNode& n = at(key);
    if (n.kind != Kind::Array) throw Error(ErrorKind::Schema, "config: '" + key + "' is not an array");
    std::vector<std::string> out;
    for (const auto& it : n.items) {
      if (it.kind != Kind::String) throw Error(ErrorKind::Schema, "config: '" + key + "' holds non-string items");
      out.push_back(it.str);
    }
    return out;
  }

  std::vector<std::string> get_string_array(const std::string& key, const std::vector<std::string>& dflt) const {
    return has(key) ? get_string_array(key) : dflt;
  }

  const ConfigNode* table(const std::string& key) const {
    const ConfigNode* n = find(key);
    if (n && n->kind != Kind::Table) throw Error(ErrorKind::Schema, "config: '" + key + "' is not a table");
    return n;
  }

  std::vector<const ConfigNode*> table_array(const std::string& key) const {
    std::vector<const ConfigNode*> out;
    const ConfigNode* n = find(key);
    if (!n) return out;
    if (n->kind != Kind::TableArray) throw Error(ErrorKind::Schema, "config: '" + key + "' is not an array of tables");
    for (const auto& t : n->items) out.push_back(&t);
    return out;
  }
};

namespace detail {

inline std::string config_trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"') in_str = !in_str;
    if (c == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

inline ConfigNode parse_scalar(const std::string& tok, int line_no) {
  ConfigNode n;
  std::string t = config_trim(tok);
  if (t.empty()) throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": empty value");
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"')
      throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": unterminated string");
    n.kind = ConfigNode::Kind::String;
    n.str = t.substr(1, t.size() - 2);
    return n;
  }
  if (t == "true" || t == "false") {
    n.kind = ConfigNode::Kind::Bool;
    n.flag = (t == "true");
    return n;
  }
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0')
    throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": bad value '" + t + "'");
  n.kind = ConfigNode::Kind::Number;
  n.num = v;
  return n;
}

inline ConfigNode parse_value(const std::string& raw, int line_no) {
  std::string t = config_trim(raw);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']')
      throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": unterminated array");
    ConfigNode arr;
    arr.kind = ConfigNode::Kind::Array;
    std::string body = t.substr(1, t.size() - 2);
    std::string tok;
    bool in_str = false;
    for (char c : body) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        if (!config_trim(tok).empty()) arr.items.push_back(parse_scalar(tok, line_no));
        tok.clear();
      } else {
        tok += c;
      }
    }
    if (!config_trim(tok).empty()) arr.items.push_back(parse_scalar(tok, line_no));
    for (const auto& it : arr.items)
      if (it.kind != arr.items.front().kind)
        throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": mixed array types");
    return arr;
  }
  return parse_scalar(t, line_no);
}

inline ConfigNode* descend_path(ConfigNode& root, const std::string& path, int line_no) {
  ConfigNode* cur = &root;
  std::string part;
  std::stringstream ss(path);
  while (std::getline(ss, part, '.')) {
    part = config_trim(part);
    if (part.empty()) throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": bad table name");
    ConfigNode& next = cur->obtain(part);
    if (next.kind == ConfigNode::Kind::TableArray) {
      if (next.items.empty()) next.items.emplace_back();
      cur = &next.items.back();
    } else {
      if (next.kind != ConfigNode::Kind::Table && !(next.entries.empty() && next.items.empty()))
        throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": '" + part + "' is not a table");
      next.kind = ConfigNode::Kind::Table;
      cur = &next;
    }
  }
  return cur;
}

}  // namespace detail

inline ConfigNode parse_config_string(const std::string& text) {
  ConfigNode root;
  ConfigNode* current = &root;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::config_trim(detail::strip_comment(line));
    if (line.empty()) continue;

    if (line.size() >= 4 && line.substr(0, 2) == "[[" && line.substr(line.size() - 2) == "]]") {
      std::string path = detail::config_trim(line.substr(2, line.size() - 4));
      std::size_t dot = path.rfind('.');
      ConfigNode* parent = &root;
      std::string leaf = path;
      if (dot != std::string::npos) {
        parent = detail::descend_path(root, path.substr(0, dot), line_no);
        leaf = detail::config_trim(path.substr(dot + 1));
      }
      ConfigNode& arr = parent->obtain(leaf);
      if (arr.kind != ConfigNode::Kind::TableArray && !(arr.entries.empty() && arr.items.empty()))
        throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": '" + leaf + "' is not an array of tables");
      arr.kind = ConfigNode::Kind::TableArray;
      arr.items.emplace_back();
      current = &arr.items.back();
      continue;
    }

    if (line.front() == '[' && line.back() == ']') {
      std::string path = detail::config_trim(line.substr(1, line.size() - 2));
      current = detail::descend_path(root, path, line_no);
      continue;
    }

    std::size_t eq = std::string::npos;
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_str = !in_str;
      if (line[i] == '=' && !in_str) { eq = i; break; }
    }
    if (eq == std::string::npos)
      throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = detail::config_trim(line.substr(0, eq));
    std::string value = detail::config_trim(line.substr(eq + 1));
    if (key.empty())
      throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": empty key");

    // A multi-line array keeps consuming lines until brackets balance.
    if (!value.empty() && value.front() == '[') {
      auto bracket_balance = [](const std::string& s) {
        int bal = 0;
        bool q = false;
        for (char c : s) {
          if (c == '"') q = !q;
          if (!q && c == '[') ++bal;
          if (!q && c == ']') --bal;
        }
        return bal;
      };
      while (bracket_balance(value) != 0) {
        std::string more;
        if (!std::getline(in, more))
          throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": unterminated array");
        ++line_no;
        value += " " + detail::config_trim(detail::strip_comment(more));
      }
    }

    if (current->has(key))
      throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    current->entries.emplace_back(key, detail::parse_value(value, line_no));
  }
  return root;
}

inline ConfigNode parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

}  // namespace corisk
