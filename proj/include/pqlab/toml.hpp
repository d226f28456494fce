#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pqlab/params.hpp"

namespace pqlab {

/// Reader for the TOML subset used by experiment configs: tables and dotted
/// table headers, bare and dotted keys, basic and literal strings, integers,
/// floats (with inf/nan), booleans, arrays (multi-line, nested) and inline
/// tables. Dates and arrays of tables are rejected.
class TomlReader {
 public:
  explicit TomlReader(std::string_view text) : s_(text) {}

  nlohmann::json parse() {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++i_;
        if (peek() == '[') fail("arrays of tables are not supported");
        skip_ws();
        auto path = key_path();
        skip_ws();
        expect(']');
        table = &root;
        for (const auto& k : path) {
          nlohmann::json& next = (*table)[k];
          if (next.is_null()) next = nlohmann::json::object();
          if (!next.is_object()) fail("key '" + k + "' is not a table");
          table = &next;
        }
      } else {
        auto path = key_path();
        skip_ws();
        expect('=');
        skip_ws();
        assign(*table, path, value());
      }
      end_of_line();
    }
    return root;
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
  int line_ = 1;

  [[noreturn]] void fail(const std::string& msg) const {
    throw LabError(Errc::parse_error, "toml line " + std::to_string(line_) + ": " + msg);
  }
  bool eof() const { return i_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[i_]; }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }
  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++i_;
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++i_;
  }
  void newline() {
    if (peek() == '\r') ++i_;
    if (peek() == '\n') {
      ++i_;
      ++line_;
    }
  }
  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r')
        newline();
      else
        break;
    }
  }
  /// Whitespace, comments and newlines inside arrays.
  void skip_space_in_array() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r')
        newline();
      else
        break;
    }
  }
  void end_of_line() {
    skip_ws();
    skip_comment();
    if (!eof() && peek() != '\n' && peek() != '\r') fail("unexpected trailing characters");
    newline();
  }

  std::string key() {
    if (peek() == '"' || peek() == '\'') return string_value();
    std::size_t start = i_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++i_;
    if (start == i_) fail("expected a key");
    return std::string(s_.substr(start, i_ - start));
  }
  std::vector<std::string> key_path() {
    std::vector<std::string> path{key()};
    skip_ws();
    while (peek() == '.') {
      ++i_;
      skip_ws();
      path.push_back(key());
      skip_ws();
    }
    return path;
  }
  void assign(nlohmann::json& table, const std::vector<std::string>& path, nlohmann::json v) {
    nlohmann::json* t = &table;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      nlohmann::json& next = (*t)[path[k]];
      if (next.is_null()) next = nlohmann::json::object();
      if (!next.is_object()) fail("key '" + path[k] + "' is not a table");
      t = &next;
    }
    if (t->contains(path.back())) fail("duplicate key '" + path.back() + "'");
    (*t)[path.back()] = std::move(v);
  }

  std::string string_value() {
    const char quote = peek();
    ++i_;
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = s_[i_++];
      if (c == quote) break;
      if (c == '\\' && quote == '"') {
        if (eof()) fail("unterminated escape");
        char e = s_[i_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  nlohmann::json number_or_bool() {
    std::size_t start = i_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                      peek() == '.' || peek() == '_'))
      ++i_;
    std::string tok(s_.substr(start, i_ - start));
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::string clean;
    for (char c : tok)
      if (c != '_') clean += c;
    std::string_view body = clean;
    double sign = 1.0;
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
      sign = body[0] == '-' ? -1.0 : 1.0;
      body.remove_prefix(1);
    }
    if (body == "inf") return sign * std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
      long long v = 0;
      auto [p, ec] = std::from_chars(clean.data() + (clean[0] == '+' ? 1 : 0), clean.data() + clean.size(), v);
      if (ec != std::errc() || p != clean.data() + clean.size()) fail("bad value '" + tok + "'");
      return v;
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(clean.data() + (clean[0] == '+' ? 1 : 0), clean.data() + clean.size(), v);
    if (ec != std::errc() || p != clean.data() + clean.size()) fail("bad value '" + tok + "'");
    return v;
  }

  nlohmann::json value() {
    const char c = peek();
    if (c == '"' || c == '\'') return string_value();
    if (c == '[') {
      ++i_;
      nlohmann::json arr = nlohmann::json::array();
      skip_space_in_array();
      while (peek() != ']') {
        arr.push_back(value());
        skip_space_in_array();
        if (peek() == ',') {
          ++i_;
          skip_space_in_array();
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
      ++i_;
      return arr;
    }
    if (c == '{') {
      ++i_;
      nlohmann::json obj = nlohmann::json::object();
      skip_ws();
      while (peek() != '}') {
        auto path = key_path();
        skip_ws();
        expect('=');
        skip_ws();
        assign(obj, path, value());
        skip_ws();
        if (peek() == ',') {
          ++i_;
          skip_ws();
        } else if (peek() != '}') {
          fail("expected ',' or '}' in inline table");
        }
      }
      ++i_;
      return obj;
    }
    if (eof() || c == '\n') fail("missing value");
    return number_or_bool();
  }
};

inline nlohmann::json parse_toml(std::string_view text) { return TomlReader(text).parse(); }

}  // namespace pqlab
