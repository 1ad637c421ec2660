#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>

#include "dripper/detail/utf8.hpp"

namespace dripper::detail {

struct NamedEntity {
  std::string_view name;
  char32_t codepoint;
};

// The named references that show up in practice. Anything else is left as
// literal text, which is what browsers do for unknown names as well.
inline constexpr std::array<NamedEntity, 138> kNamedEntities{{
    {"AElig", 0xC6},    {"Aacute", 0xC1},  {"Acirc", 0xC2},   {"Agrave", 0xC0},  {"Aring", 0xC5},
    {"Atilde", 0xC3},   {"Auml", 0xC4},    {"Ccedil", 0xC7},  {"Dagger", 0x2021}, {"Eacute", 0xC9},
    {"Ecirc", 0xCA},    {"Egrave", 0xC8},  {"Euml", 0xCB},    {"Iacute", 0xCD},  {"Icirc", 0xCE},
    {"Igrave", 0xCC},   {"Iuml", 0xCF},    {"Ntilde", 0xD1},  {"Oacute", 0xD3},  {"Ocirc", 0xD4},
    {"Ograve", 0xD2},   {"Oslash", 0xD8},  {"Otilde", 0xD5},  {"Ouml", 0xD6},    {"Uacute", 0xDA},
    {"Ucirc", 0xDB},    {"Ugrave", 0xD9},  {"Uuml", 0xDC},    {"aacute", 0xE1},  {"acirc", 0xE2},
    {"acute", 0xB4},    {"aelig", 0xE6},   {"agrave", 0xE0},  {"alpha", 0x3B1},  {"amp", 0x26},
    {"apos", 0x27},     {"aring", 0xE5},   {"atilde", 0xE3},  {"auml", 0xE4},    {"bdquo", 0x201E},
    {"beta", 0x3B2},    {"brvbar", 0xA6},  {"bull", 0x2022},  {"ccedil", 0xE7},  {"cedil", 0xB8},
    {"cent", 0xA2},     {"copy", 0xA9},    {"curren", 0xA4},  {"dagger", 0x2020}, {"darr", 0x2193},
    {"deg", 0xB0},      {"delta", 0x3B4},  {"divide", 0xF7},  {"eacute", 0xE9},  {"ecirc", 0xEA},
    {"egrave", 0xE8},   {"emsp", 0x2003},  {"ensp", 0x2002},  {"epsilon", 0x3B5}, {"euml", 0xEB},
    {"euro", 0x20AC},   {"frac12", 0xBD},  {"frac14", 0xBC},  {"frac34", 0xBE},  {"gamma", 0x3B3},
    {"ge", 0x2265},     {"gt", 0x3E},      {"harr", 0x2194},  {"hellip", 0x2026}, {"iacute", 0xED},
    {"icirc", 0xEE},    {"iexcl", 0xA1},   {"igrave", 0xEC},  {"infin", 0x221E}, {"iquest", 0xBF},
    {"iuml", 0xEF},     {"lambda", 0x3BB}, {"laquo", 0xAB},   {"larr", 0x2190},  {"ldquo", 0x201C},
    {"le", 0x2264},     {"lsaquo", 0x2039}, {"lsquo", 0x2018}, {"lt", 0x3C},      {"macr", 0xAF},
    {"mdash", 0x2014},  {"micro", 0xB5},   {"middot", 0xB7},  {"minus", 0x2212}, {"mu", 0x3BC},
    {"nbsp", 0xA0},     {"ndash", 0x2013}, {"ne", 0x2260},    {"not", 0xAC},     {"ntilde", 0xF1},
    {"oacute", 0xF3},   {"ocirc", 0xF4},   {"ograve", 0xF2},  {"ordf", 0xAA},    {"ordm", 0xBA},
    {"oslash", 0xF8},   {"otilde", 0xF5},  {"ouml", 0xF6},    {"para", 0xB6},    {"pi", 0x3C0},
    {"plusmn", 0xB1},   {"pound", 0xA3},   {"prime", 0x2032}, {"quot", 0x22},    {"raquo", 0xBB},
    {"rarr", 0x2192},   {"rdquo", 0x201D}, {"reg", 0xAE},     {"rsaquo", 0x203A}, {"rsquo", 0x2019},
    {"sbquo", 0x201A},  {"sect", 0xA7},    {"shy", 0xAD},     {"sigma", 0x3C3},  {"sup1", 0xB9},
    {"sup2", 0xB2},     {"sup3", 0xB3},    {"szlig", 0xDF},   {"theta", 0x3B8},
    {"thinsp", 0x2009}, {"times", 0xD7},
    {"trade", 0x2122},  {"uacute", 0xFA},  {"uarr", 0x2191},  {"ucirc", 0xFB},   {"ugrave", 0xF9},
    {"uml", 0xA8},      {"uuml", 0xFC},    {"yacute", 0xFD},  {"yen", 0xA5},     {"yuml", 0xFF},
    {"zwj", 0x200D},    {"zwnj", 0x200C},
}};

static_assert(std::is_sorted(kNamedEntities.begin(), kNamedEntities.end(),
                             [](const NamedEntity& a, const NamedEntity& b) { return a.name < b.name; }));

inline const NamedEntity* find_named_entity(std::string_view name) {
  const auto* it = std::lower_bound(kNamedEntities.begin(), kNamedEntities.end(), name,
                                    [](const NamedEntity& e, std::string_view n) { return e.name < n; });
  if (it != kNamedEntities.end() && it->name == name) return &*it;
  return nullptr;
}

// Windows-1252 remapping of the C1 range applied to numeric references, as
// browsers do (&#150; is an en dash, not a control character).
inline char32_t remap_numeric_reference(char32_t cp) {
  static constexpr std::array<char32_t, 32> kC1{
      0x20AC, 0x81,   0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
      0x2039, 0x0152, 0x8D,   0x017D, 0x8F,   0x90,   0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
      0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0x9D,   0x017E, 0x0178};
  if (cp >= 0x80 && cp <= 0x9F) return kC1[cp - 0x80];
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return kReplacementChar;
  return cp;
}

// Decodes character references in `s`. Unknown or malformed references are
// copied through unchanged.
inline std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t amp = s.find('&', i);
    if (amp == std::string_view::npos) {
      out.append(s.substr(i));
      break;
    }
    out.append(s.substr(i, amp - i));
    i = amp + 1;
    if (i < s.size() && s[i] == '#') {
      std::size_t j = i + 1;
      const bool hex = j < s.size() && (s[j] == 'x' || s[j] == 'X');
      if (hex) ++j;
      const std::size_t digits_begin = j;
      char32_t value = 0;
      bool overflow = false;
      while (j < s.size()) {
        const char c = s[j];
        int digit = -1;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (hex && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
        if (digit < 0) break;
        value = value * (hex ? 16 : 10) + static_cast<char32_t>(digit);
        if (value > 0x10FFFF) overflow = true;
        ++j;
      }
      if (j == digits_begin) {
        out.push_back('&');
        continue;
      }
      if (j < s.size() && s[j] == ';') ++j;
      append_utf8(out, overflow ? kReplacementChar : remap_numeric_reference(value));
      i = j;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && j - i < 32 &&
           ((s[j] >= 'a' && s[j] <= 'z') || (s[j] >= 'A' && s[j] <= 'Z') || (s[j] >= '0' && s[j] <= '9'))) {
      ++j;
    }
    const std::string_view name = s.substr(i, j - i);
    const NamedEntity* entity = name.empty() ? nullptr : find_named_entity(name);
    if (entity != nullptr && j < s.size() && s[j] == ';') {
      append_utf8(out, entity->codepoint);
      i = j + 1;
      continue;
    }
    // A handful of legacy names are honoured without the trailing semicolon.
    if (entity != nullptr && (name == "amp" || name == "lt" || name == "gt" || name == "quot" ||
                              name == "nbsp" || name == "copy" || name == "reg")) {
      append_utf8(out, entity->codepoint);
      i = j;
      continue;
    }
    out.push_back('&');
  }
  return out;
}

}  // namespace dripper::detail
