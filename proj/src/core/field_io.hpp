#pragma once

#include <string>

#include "core/field.hpp"

namespace qpat {

/// Write a field as a JSON header plus a raw little-endian float64 payload in
/// C order (k fastest). The payload file sits next to the header and is named
/// after it ("v1.json" -> "v1.f64"). Both writes are atomic (temp + rename).
void write_field(const ScalarField& f, const std::string& header_path);

/// Read a field written by write_field. Values round-trip bit-exactly.
ScalarField read_field(const std::string& header_path);

/// Atomically write a text file (temp + rename).
void write_text_atomic(const std::string& path, const std::string& text);

std::string read_text(const std::string& path);

}  // namespace qpat
