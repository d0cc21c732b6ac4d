#pragma once

// A small TOML subset for scenario files: comments, [table] and
// [[array-of-tables]] headers, and key = value pairs whose values are
// strings, numbers, booleans or (possibly multi-line) arrays of those.

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hankel/error.hpp"

namespace hankel::config {

struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<std::string, double, bool, Array> data;
  int line = 0;

  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }

  const std::string& as_string(std::string_view key) const {
    if (!is_string()) fail(key, "a string");
    return std::get<std::string>(data);
  }
  double as_number(std::string_view key) const {
    if (!is_number()) fail(key, "a number");
    return std::get<double>(data);
  }
  long long as_integer(std::string_view key) const {
    const double v = as_number(key);
    if (v != static_cast<double>(static_cast<long long>(v))) fail(key, "an integer");
    return static_cast<long long>(v);
  }
  bool as_bool(std::string_view key) const {
    if (!std::holds_alternative<bool>(data)) fail(key, "true or false");
    return std::get<bool>(data);
  }
  const Array& as_array(std::string_view key) const {
    if (!is_array()) fail(key, "an array");
    return std::get<Array>(data);
  }

 private:
  [[noreturn]] void fail(std::string_view key, std::string_view what) const {
    throw input_error("config line " + std::to_string(line) + ": '" + std::string(key) + "' must be " +
                      std::string(what));
  }
};

struct Table {
  std::string name;
  int line = 0;
  std::map<std::string, Value> values;

  const Value* find(const std::string& key) const {
    auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  }
};

struct Document {
  Table root;
  std::map<std::string, Table> tables;
  std::map<std::string, std::vector<Table>> arrays;

  const Table* table(const std::string& name) const {
    auto it = tables.find(name);
    return it == tables.end() ? nullptr : &it->second;
  }
  const std::vector<Table>& array(const std::string& name) const {
    static const std::vector<Table> empty;
    auto it = arrays.find(name);
    return it == arrays.end() ? empty : it->second;
  }
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string text) : text_(std::move(text)) {}

  Document parse() {
    Document doc;
    Table* current = &doc.root;
    for (;;) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        const int at = line_;
        const bool array = text_.compare(pos_, 2, "[[") == 0;
        pos_ += array ? 2 : 1;
        const auto close = text_.find(array ? "]]" : "]", pos_);
        if (close == std::string::npos) error("unterminated table header");
        std::string name(trim(std::string_view(text_).substr(pos_, close - pos_)));
        if (name.empty()) error("empty table name");
        pos_ = close + (array ? 2 : 1);
        end_of_line();
        if (array) {
          auto& list = doc.arrays[name];
          list.push_back(Table{name, at, {}});
          current = &list.back();
        } else {
          if (doc.tables.count(name)) error("table [" + name + "] defined twice");
          current = &doc.tables[name];
          current->name = name;
          current->line = at;
        }
        continue;
      }
      const int at = line_;
      std::string key = read_key();
      skip_spaces();
      if (eof() || peek() != '=') error("expected '=' after key '" + key + "'");
      ++pos_;
      skip_spaces();
      Value v = read_value();
      v.line = at;
      end_of_line();
      if (!current->values.emplace(key, std::move(v)).second) error("duplicate key '" + key + "'");
    }
    return doc;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  [[noreturn]] void error(const std::string& msg) const {
    throw input_error("config line " + std::to_string(line_) + ": " + msg);
  }

  static std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  }

  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }

  void skip_comment() {
    if (!eof() && peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }

  void skip_blank_lines() {
    for (;;) {
      skip_spaces();
      skip_comment();
      if (eof() || peek() != '\n') return;
      ++pos_;
      ++line_;
    }
  }

  // whitespace, comments and newlines inside arrays
  void skip_array_space() {
    for (;;) {
      skip_spaces();
      skip_comment();
      if (eof() || peek() != '\n') return;
      ++pos_;
      ++line_;
    }
  }

  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') error("unexpected text after value");
    ++pos_;
    ++line_;
  }

  std::string read_key() {
    const auto start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
    if (pos_ == start) error("expected a key");
    return text_.substr(start, pos_ - start);
  }

  Value read_value() {
    if (eof()) error("missing value");
    Value v;
    v.line = line_;
    const char c = peek();
    if (c == '"') {
      ++pos_;
      std::string s;
      while (!eof() && peek() != '"') {
        if (peek() == '\n') error("unterminated string");
        if (peek() == '\\' && pos_ + 1 < text_.size()) {
          ++pos_;
          const char e = peek();
          s += e == 'n' ? '\n' : e == 't' ? '\t' : e;
        } else {
          s += peek();
        }
        ++pos_;
      }
      if (eof()) error("unterminated string");
      ++pos_;
      v.data = std::move(s);
      return v;
    }
    if (c == '[') {
      ++pos_;
      Array items;
      skip_array_space();
      while (!eof() && peek() != ']') {
        items.push_back(read_value());
        skip_array_space();
        if (!eof() && peek() == ',') {
          ++pos_;
          skip_array_space();
        } else if (!eof() && peek() != ']') {
          error("expected ',' or ']' in array");
        }
      }
      if (eof()) error("unterminated array");
      ++pos_;
      v.data = std::move(items);
      return v;
    }
    const auto start = pos_;
    while (!eof() && peek() != ',' && peek() != ']' && peek() != '\n' && peek() != '#') ++pos_;
    const auto token = trim(std::string_view(text_).substr(start, pos_ - start));
    if (token == "true" || token == "false") {
      v.data = token == "true";
      return v;
    }
    std::string digits;
    for (char ch : token)
      if (ch != '_') digits += ch;
    double num = 0.0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), num);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size())
      error("cannot parse value '" + std::string(token) + "' (strings need double quotes)");
    v.data = num;
    return v;
  }

  std::string text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace detail

inline Document parse(std::string text) { return detail::Parser(std::move(text)).parse(); }

inline Document parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace hankel::config
