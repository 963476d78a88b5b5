#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mvprag::io {

using Json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes via a temp file in the same directory followed by a rename, so
// readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, std::string_view content);

// Parses one JSONL line; errors carry "<file>:<lineno>".
Json parse_json_line(const std::string& line, const std::filesystem::path& path,
                     std::size_t lineno);

std::string file_hash(const std::filesystem::path& path);

}  // namespace mvprag::io
