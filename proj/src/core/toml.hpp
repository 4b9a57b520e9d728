#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace qpat {

/// One parsed TOML value. Numbers are stored as doubles with a flag telling
/// whether the literal was an integer, which is what configuration consumers
/// need (dims, seeds, iteration counts).
struct TomlValue {
  enum class Kind { String, Number, Boolean, Array };
  Kind kind = Kind::Number;
  std::string str;
  double num = 0;
  bool boolean = false;
  bool is_integer = false;
  std::uint64_t uint_val = 0;  ///< exact value of a nonnegative integer literal
  std::vector<TomlValue> array;
  int line = 0, col = 0;
};

/// A parsed document flattened to dotted keys ("section.key" -> value),
/// sorted by key.
struct TomlDoc {
  std::map<std::string, TomlValue> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  const TomlValue* find(const std::string& key) const {
    auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  }
};

/// Parse the supported TOML subset: [section] and [a.b] headers, bare or
/// dotted keys, strings with the usual escapes, integers, floats, booleans,
/// and (possibly nested, possibly multi-line) arrays. Comments run from '#'
/// to end of line. Throws InvalidArgument with line and column on the first
/// syntax error; duplicate keys are syntax errors.
TomlDoc parse_toml(const std::string& text);

/// Canonical one-line-per-key rendering ("a.b = value", keys sorted, numbers
/// in round-trip precision). Two documents with the same semantic content
/// produce identical canonical text regardless of key order in the source.
std::string canonical_toml(const TomlDoc& doc);

/// FNV-1a64 of the canonical rendering.
std::uint64_t toml_hash(const TomlDoc& doc);

}  // namespace qpat
