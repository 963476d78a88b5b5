#include "mvprag/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <array>
#include <cstdio>

#include "mvprag/error.hpp"

namespace mvprag::text {

namespace {

const icu::Normalizer2& nfc_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* inst = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || inst == nullptr) {
    raise(ErrorCode::Io, "ICU NFC normalizer unavailable");
  }
  return *inst;
}

}  // namespace

std::string nfc(std::string_view s) {
  icu::UnicodeString us = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString normalized = nfc_instance().normalize(us, status);
  if (U_FAILURE(status)) {
    raise(ErrorCode::Parse, "NFC normalization failed");
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::string to_lower(std::string_view s) {
  icu::UnicodeString us = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  us.toLower(icu::Locale::getRoot());
  std::string out;
  us.toUTF8String(out);
  return out;
}

std::string trim(std::string_view s) {
  std::vector<char32_t> cps = code_points(s);
  std::size_t begin = 0;
  std::size_t end = cps.size();
  while (begin < end && u_isUWhiteSpace(static_cast<UChar32>(cps[begin]))) ++begin;
  while (end > begin && u_isUWhiteSpace(static_cast<UChar32>(cps[end - 1]))) --end;
  return encode_utf8(cps.data() + begin, end - begin);
}

std::string collapse_ws(std::string_view s) {
  std::vector<char32_t> cps = code_points(s);
  std::vector<char32_t> out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (u_isUWhiteSpace(static_cast<UChar32>(cp))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(cp);
  }
  return encode_utf8(out.data(), out.size());
}

std::string canonical(std::string_view s) { return trim(nfc(s)); }

std::vector<char32_t> code_points(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  int32_t i = 0;
  const auto length = static_cast<int32_t>(s.size());
  while (i < length) {
    UChar32 cp;
    U8_NEXT(bytes, i, length, cp);
    if (cp < 0) cp = 0xFFFD;
    out.push_back(static_cast<char32_t>(cp));
  }
  return out;
}

std::size_t code_point_count(std::string_view s) { return code_points(s).size(); }

std::string encode_utf8(const char32_t* cps, std::size_t n) {
  std::string out;
  out.reserve(n * 2);
  for (std::size_t k = 0; k < n; ++k) {
    std::array<uint8_t, U8_MAX_LENGTH> buf{};
    int32_t len = 0;
    UBool err = false;
    U8_APPEND(buf.data(), len, static_cast<int32_t>(buf.size()),
              static_cast<UChar32>(cps[k]), err);
    if (err) {
      buf = {0xEF, 0xBF, 0xBD};
      len = 3;
    }
    out.append(reinterpret_cast<const char*>(buf.data()),
               static_cast<std::size_t>(len));
  }
  return out;
}

std::size_t byte_offset_of_code_point(std::string_view s, std::size_t cp_offset) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  int32_t i = 0;
  const auto length = static_cast<int32_t>(s.size());
  std::size_t seen = 0;
  while (i < length && seen < cp_offset) {
    U8_FWD_1(bytes, i, length);
    ++seen;
  }
  return static_cast<std::size_t>(i);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= static_cast<std::uint64_t>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(buf);
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t pos = s.find('\n', start);
    if (pos == std::string_view::npos) {
      lines.emplace_back(s.substr(start));
      break;
    }
    lines.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return lines;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return to_lower(a) == to_lower(b);
}

}  // namespace mvprag::text
