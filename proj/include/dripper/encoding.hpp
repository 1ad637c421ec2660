#pragma once

#include <iconv.h>

#include <cerrno>
#include <algorithm>
#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dripper/detail/utf8.hpp"
#include "dripper/error.hpp"

namespace dripper {

struct DecodedText {
  std::string utf8;
  std::string encoding;          // label of the strategy that succeeded
  std::size_t decodable = 0;     // codepoints other than U+FFFD
  std::size_t replacements = 0;  // U+FFFD substitutions
};

namespace detail {

inline std::string normalize_charset_label(std::string_view label) {
  std::string l = ascii_lower(trim_ascii(label));
  if (l == "utf8") return "utf-8";
  // WHATWG treats these labels as windows-1252.
  if (l == "latin1" || l == "iso-8859-1" || l == "iso8859-1" || l == "ascii" || l == "us-ascii" ||
      l == "cp1252") {
    return "windows-1252";
  }
  return l;
}

inline DecodedText decode_utf8_lossy(std::string_view bytes) {
  DecodedText out;
  out.encoding = "utf-8";
  out.utf8.reserve(bytes.size());
  for (std::size_t i = 0; i < bytes.size();) {
    const auto d = decode_utf8(bytes, i);
    if (d.valid) {
      out.utf8.append(bytes.substr(i, d.length));
      ++out.decodable;
    } else {
      append_utf8(out.utf8, kReplacementChar);
      ++out.replacements;
    }
    i += d.length;
  }
  return out;
}

class IconvHandle {
 public:
  IconvHandle(const char* to, const char* from) : handle_(iconv_open(to, from)) {}
  ~IconvHandle() {
    if (ok()) iconv_close(handle_);
  }
  IconvHandle(const IconvHandle&) = delete;
  IconvHandle& operator=(const IconvHandle&) = delete;

  [[nodiscard]] bool ok() const { return handle_ != reinterpret_cast<iconv_t>(-1); }
  [[nodiscard]] iconv_t get() const { return handle_; }

 private:
  iconv_t handle_;
};

inline std::optional<DecodedText> decode_with_iconv(std::string_view bytes, const std::string& charset) {
  IconvHandle cd("UTF-8", charset.c_str());
  if (!cd.ok()) return std::nullopt;
  std::string converted;
  converted.reserve(bytes.size() * 2);
  char* in = const_cast<char*>(bytes.data());
  std::size_t in_left = bytes.size();
  char buffer[4096];
  while (in_left > 0) {
    char* out = buffer;
    std::size_t out_left = sizeof(buffer);
    const std::size_t rc = iconv(cd.get(), &in, &in_left, &out, &out_left);
    converted.append(buffer, static_cast<std::size_t>(out - buffer));
    if (rc != static_cast<std::size_t>(-1)) continue;
    if (errno == E2BIG) continue;
    // EILSEQ or EINVAL: substitute and skip one input byte.
    append_utf8(converted, kReplacementChar);
    ++in;
    --in_left;
    iconv(cd.get(), nullptr, nullptr, nullptr, nullptr);
  }
  DecodedText out;
  out.encoding = charset;
  for (std::size_t i = 0; i < converted.size();) {
    const auto d = decode_utf8(converted, i);
    if (d.valid && d.value != kReplacementChar) {
      ++out.decodable;
    } else {
      ++out.replacements;
    }
    i += d.length;
  }
  out.utf8 = std::move(converted);
  return out;
}

inline DecodedText decode_with(std::string_view bytes, const std::string& charset) {
  if (charset == "utf-8") return decode_utf8_lossy(bytes);
  if (auto decoded = decode_with_iconv(bytes, charset)) return *decoded;
  return {};
}

}  // namespace detail

/// Charset declared by a <meta charset> or <meta http-equiv content> tag
/// within the first 4 KiB of the document.
inline std::optional<std::string> sniff_meta_charset(std::string_view bytes) {
  const std::string head = detail::ascii_lower(bytes.substr(0, std::min<std::size_t>(bytes.size(), 4096)));
  static const std::regex kMeta(R"(<meta[^>]*?charset\s*=\s*["']?\s*([a-z0-9_:.\-]+))");
  std::smatch m;
  if (std::regex_search(head, m, kMeta)) return m[1].str();
  return std::nullopt;
}

/// Resolves the document encoding (hint, then meta declaration, then lossy
/// UTF-8) and returns the text as UTF-8. A strategy is accepted when it
/// produces at least one decodable character.
inline DecodedText decode_document(std::string_view bytes, std::optional<std::string_view> encoding_hint = {}) {
  if (bytes.size() >= 3 && bytes.substr(0, 3) == "\xEF\xBB\xBF") {
    bytes.remove_prefix(3);
    encoding_hint = "utf-8";
  }
  std::vector<std::string> strategies;
  if (encoding_hint && !detail::trim_ascii(*encoding_hint).empty()) {
    strategies.push_back(detail::normalize_charset_label(*encoding_hint));
  }
  if (auto meta = sniff_meta_charset(bytes)) strategies.push_back(detail::normalize_charset_label(*meta));
  strategies.emplace_back("utf-8");
  for (const std::string& charset : strategies) {
    DecodedText decoded = detail::decode_with(bytes, charset);
    if (decoded.decodable > 0) return decoded;
  }
  throw Error(ErrorCode::EncodingUndecodable, "no strategy produced decodable characters");
}

}  // namespace dripper
