#include "seqdesign/config_file.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "seqdesign/error.hpp"

namespace seqdesign {
namespace {

class LineParser {
 public:
  LineParser(const std::string& text, std::size_t line_no) : s_(text), line_(line_no) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  std::string key() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected a key");
    if (s_[pos_] == '"' || s_[pos_] == '\'') return string_value();
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a key");
    return s_.substr(start, pos_ - start);
  }

  std::vector<std::string> dotted_key() {
    std::vector<std::string> parts{key()};
    while (consume('.')) parts.push_back(key());
    return parts;
  }

  nlohmann::json value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected a value");
    char c = s_[pos_];
    if (c == '"' || c == '\'') return string_value();
    if (c == '[') return array();
    if (s_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return false;
    }
    return number();
  }

 private:
  std::string string_value() {
    char quote = s_[pos_++];
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != quote) {
      char c = s_[pos_++];
      if (quote == '"' && c == '\\') {
        if (pos_ >= s_.size()) fail("dangling escape");
        char e = s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '\\': out += '\\'; break;
          case '"': out += '"'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  nlohmann::json array() {
    ++pos_;
    nlohmann::json arr = nlohmann::json::array();
    if (consume(']')) return arr;
    while (true) {
      arr.push_back(value());
      if (consume(']')) return arr;
      expect(',');
      if (consume(']')) return arr;
    }
  }

  nlohmann::json number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '+' ||
                                s_[pos_] == '-' || s_[pos_] == '.' || s_[pos_] == '_')) {
      ++pos_;
    }
    std::string text;
    for (std::size_t i = start; i < pos_; ++i) {
      if (s_[i] != '_') text += s_[i];
    }
    if (text.empty()) fail("expected a value");
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    bool is_float = text.find_first_of(".eE") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_float) {
        double v = std::stod(text, &used);
        if (used == text.size()) return v;
      } else {
        long long v = std::stoll(text, &used);
        if (used == text.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("invalid value '" + text + "'");
  }

  const std::string& s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

nlohmann::json& descend(nlohmann::json& root, const std::vector<std::string>& path, std::size_t count,
                        const LineParser& p) {
  nlohmann::json* node = &root;
  for (std::size_t i = 0; i < count; ++i) {
    auto& child = (*node)[path[i]];
    if (child.is_null()) child = nlohmann::json::object();
    if (!child.is_object()) p.fail("'" + path[i] + "' is not a table");
    node = &child;
  }
  return *node;
}

}  // namespace

nlohmann::json parse_toml(std::istream& in) {
  nlohmann::json root = nlohmann::json::object();
  std::vector<std::string> table;
  std::set<std::vector<std::string>> headers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    LineParser p(line, line_no);
    if (p.at_end_or_comment()) continue;
    if (p.consume('[')) {
      if (p.consume('[')) p.fail("arrays of tables are not supported");
      table = p.dotted_key();
      p.expect(']');
      if (!p.at_end_or_comment()) p.fail("trailing characters after table header");
      if (!headers.insert(table).second) p.fail("duplicate table header");
      descend(root, table, table.size(), p);
      continue;
    }
    auto key = p.dotted_key();
    p.expect('=');
    nlohmann::json v = p.value();
    if (!p.at_end_or_comment()) p.fail("trailing characters after value");
    auto& parent = descend(descend(root, table, table.size(), p), key, key.size() - 1, p);
    if (parent.contains(key.back())) p.fail("duplicate key '" + key.back() + "'");
    parent[key.back()] = std::move(v);
  }
  return root;
}

nlohmann::json parse_toml_string(const std::string& text) {
  std::istringstream in(text);
  return parse_toml(in);
}

nlohmann::json parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_toml(in);
}

}  // namespace seqdesign
