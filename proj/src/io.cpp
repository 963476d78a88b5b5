#include "mvprag/io.hpp"

#include <fstream>
#include <sstream>

#include "mvprag/error.hpp"
#include "mvprag/text.hpp"

namespace mvprag::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(ErrorCode::Io, "cannot open file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  return text::split_lines(read_file(path));
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      raise(ErrorCode::Io, "cannot open file for writing: " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      raise(ErrorCode::Io, "write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    raise(ErrorCode::Io,
          "rename failed: " + tmp.string() + " -> " + path.string() + ": " + ec.message());
  }
}

Json parse_json_line(const std::string& line, const std::filesystem::path& path,
                     std::size_t lineno) {
  Json value = Json::parse(line, nullptr, false);
  if (value.is_discarded()) {
    raise(ErrorCode::Parse,
          path.string() + ":" + std::to_string(lineno) + ": invalid JSON record");
  }
  return value;
}

std::string file_hash(const std::filesystem::path& path) {
  return "fnv1a64:" + text::fnv1a64_hex(read_file(path));
}

}  // namespace mvprag::io
