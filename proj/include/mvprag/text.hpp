#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mvprag::text {

// Unicode NFC normalization of a UTF-8 string. Invalid byte sequences are
// replaced with U+FFFD.
std::string nfc(std::string_view s);

// Full lowercase with root-locale rules (locale independent).
std::string to_lower(std::string_view s);

// Strips leading/trailing Unicode whitespace.
std::string trim(std::string_view s);

// Collapses every run of Unicode whitespace (including newlines) to a single
// ASCII space and trims. Used when user text is placed on a single prompt line.
std::string collapse_ws(std::string_view s);

// trim(nfc(s)): the canonical form for identifiers and label values.
std::string canonical(std::string_view s);

std::vector<char32_t> code_points(std::string_view s);
std::size_t code_point_count(std::string_view s);
std::string encode_utf8(const char32_t* cps, std::size_t n);

// Splits a UTF-8 string at a code-point offset; offsets past the end split at
// the end. Returns byte offset of the split position.
std::size_t byte_offset_of_code_point(std::string_view s, std::size_t cp_offset);

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// ASCII-insensitive plus simple-Unicode-insensitive comparison via root-locale
// lowercasing of both sides.
bool iequals(std::string_view a, std::string_view b);

}  // namespace mvprag::text
