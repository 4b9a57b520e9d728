#include "core/toml.hpp"

#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "core/rng.hpp"

namespace qpat {

namespace {

class Scanner {
 public:
  explicit Scanner(const std::string& text) : m_text(text) {}

  bool eof() const { return m_pos >= m_text.size(); }
  char peek() const { return eof() ? '\0' : m_text[m_pos]; }
  int line() const { return m_line; }
  int col() const { return m_col; }

  char advance() {
    char c = m_text[m_pos++];
    if (c == '\n') {
      ++m_line;
      m_col = 1;
    } else {
      ++m_col;
    }
    return c;
  }

  /// Skip spaces and tabs; with `cross_lines` also newlines and comments on
  /// their own lines (used inside arrays and between statements).
  void skip_ws(bool cross_lines) {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (c == '\n' && cross_lines) {
        advance();
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "config syntax error at line " << m_line << ", column " << m_col
       << ": " << msg;
    throw InvalidArgument(os.str());
  }

 private:
  const std::string& m_text;
  std::size_t m_pos = 0;
  int m_line = 1, m_col = 1;
};

bool bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_key_part(Scanner& s) {
  std::string out;
  while (!s.eof() && bare_key_char(s.peek())) out += s.advance();
  if (out.empty()) s.fail("expected a key");
  return out;
}

/// Dotted key: part(.part)*
std::string parse_dotted_key(Scanner& s) {
  std::string key = parse_key_part(s);
  while (s.peek() == '.') {
    s.advance();
    key += '.';
    key += parse_key_part(s);
  }
  return key;
}

std::string parse_string(Scanner& s) {
  s.advance();  // opening quote
  std::string out;
  while (true) {
    if (s.eof() || s.peek() == '\n') s.fail("unterminated string");
    char c = s.advance();
    if (c == '"') return out;
    if (c == '\\') {
      if (s.eof()) s.fail("unterminated escape");
      char e = s.advance();
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        default: s.fail(std::string("unsupported escape '\\") + e + "'");
      }
    } else {
      out += c;
    }
  }
}

TomlValue parse_value(Scanner& s);

TomlValue parse_array(Scanner& s) {
  TomlValue v;
  v.kind = TomlValue::Kind::Array;
  v.line = s.line();
  v.col = s.col();
  s.advance();  // '['
  s.skip_ws(true);
  if (s.peek() == ']') {
    s.advance();
    return v;
  }
  while (true) {
    v.array.push_back(parse_value(s));
    s.skip_ws(true);
    if (s.peek() == ',') {
      s.advance();
      s.skip_ws(true);
      if (s.peek() == ']') {  // trailing comma
        s.advance();
        return v;
      }
      continue;
    }
    if (s.peek() == ']') {
      s.advance();
      return v;
    }
    s.fail("expected ',' or ']' in array");
  }
}

TomlValue parse_scalar(Scanner& s) {
  TomlValue v;
  v.line = s.line();
  v.col = s.col();
  std::string word;
  while (!s.eof()) {
    char c = s.peek();
    if (bare_key_char(c) || c == '+' || c == '-' || c == '.') {
      word += s.advance();
    } else {
      break;
    }
  }
  if (word.empty()) s.fail("expected a value");
  if (word == "true" || word == "false") {
    v.kind = TomlValue::Kind::Boolean;
    v.boolean = word == "true";
    return v;
  }
  const char* begin = word.c_str();
  char* end = nullptr;
  v.num = std::strtod(begin, &end);
  if (end != begin + word.size())
    s.fail("'" + word + "' is not a number, boolean, or quoted string");
  v.kind = TomlValue::Kind::Number;
  v.is_integer = word.find_first_of(".eE") == std::string::npos;
  if (v.is_integer && word[0] != '-') {
    // keep 64-bit literals (seeds) exact; the double holds the rounded value
    v.uint_val = std::strtoull(begin, &end, 10);
    if (end != begin + word.size()) s.fail("'" + word + "' is not an integer");
  }
  return v;
}

TomlValue parse_value(Scanner& s) {
  char c = s.peek();
  if (c == '[') return parse_array(s);
  if (c == '"') {
    TomlValue v;
    v.kind = TomlValue::Kind::String;
    v.line = s.line();
    v.col = s.col();
    v.str = parse_string(s);
    return v;
  }
  return parse_scalar(s);
}

/// After a complete statement only a comment may follow on the line.
void expect_eol(Scanner& s) {
  s.skip_ws(false);
  if (s.eof()) return;
  if (s.peek() == '\n') {
    s.advance();
    return;
  }
  s.fail("unexpected trailing content");
}

void canonical_value(const TomlValue& v, std::string& out) {
  char buf[64];
  switch (v.kind) {
    case TomlValue::Kind::String:
      out += '"';
      for (char c : v.str) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      out += '"';
      break;
    case TomlValue::Kind::Boolean:
      out += v.boolean ? "true" : "false";
      break;
    case TomlValue::Kind::Number:
      if (v.is_integer && v.num >= 0)
        std::snprintf(buf, sizeof buf, "%" PRIu64, v.uint_val);
      else if (v.is_integer)
        std::snprintf(buf, sizeof buf, "%.0f", v.num);
      else
        std::snprintf(buf, sizeof buf, "%.17g", v.num);
      out += buf;
      break;
    case TomlValue::Kind::Array:
      out += '[';
      for (std::size_t i = 0; i < v.array.size(); ++i) {
        if (i) out += ", ";
        canonical_value(v.array[i], out);
      }
      out += ']';
      break;
  }
}

}  // namespace

TomlDoc parse_toml(const std::string& text) {
  Scanner s(text);
  TomlDoc doc;
  std::string prefix;
  while (true) {
    s.skip_ws(true);
    if (s.eof()) break;
    if (s.peek() == '[') {
      s.advance();
      s.skip_ws(false);
      prefix = parse_dotted_key(s);
      s.skip_ws(false);
      if (s.peek() != ']') s.fail("expected ']' to close the section header");
      s.advance();
      expect_eol(s);
      continue;
    }
    int kl = s.line(), kc = s.col();
    std::string key = parse_dotted_key(s);
    s.skip_ws(false);
    if (s.peek() != '=') s.fail("expected '=' after key '" + key + "'");
    s.advance();
    s.skip_ws(false);
    TomlValue value = parse_value(s);
    expect_eol(s);
    std::string full = prefix.empty() ? key : prefix + "." + key;
    if (doc.has(full)) {
      std::ostringstream os;
      os << "config syntax error at line " << kl << ", column " << kc
         << ": duplicate key '" << full << "'";
      throw InvalidArgument(os.str());
    }
    doc.values.emplace(std::move(full), std::move(value));
  }
  return doc;
}

std::string canonical_toml(const TomlDoc& doc) {
  std::string out;
  for (const auto& [key, value] : doc.values) {
    out += key;
    out += " = ";
    canonical_value(value, out);
    out += '\n';
  }
  return out;
}

std::uint64_t toml_hash(const TomlDoc& doc) { return fnv1a64(canonical_toml(doc)); }

}  // namespace qpat
