#include "cohort_audit/text_norm.hpp"

#include <algorithm>
#include <cstdint>
#include <iterator>

namespace cohort_audit {
namespace {

struct CodepointRange {
  std::uint32_t lo;
  std::uint32_t hi;
};

#include "unicode_tables.inc"

template <std::size_t N>
bool in_ranges(const CodepointRange (&table)[N], std::uint32_t cp) {
  auto it = std::upper_bound(std::begin(table), std::end(table), cp,
                             [](std::uint32_t v, const CodepointRange& r) { return v < r.lo; });
  return it != std::begin(table) && cp <= std::prev(it)->hi;
}

bool is_punctuation(std::uint32_t cp) { return in_ranges(kPunctuationRanges, cp); }
bool is_whitespace(std::uint32_t cp) { return in_ranges(kWhitespaceRanges, cp); }

// Case folding for ASCII and the Latin-1 supplement; other scripts pass
// through unchanged.
std::uint32_t to_lower(std::uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  return cp;
}

// Decodes one UTF-8 codepoint starting at i; advances i. Malformed bytes are
// passed through as single codepoints so normalization never fails.
std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(s[i]);
  std::size_t len = 0;
  std::uint32_t cp = 0;
  if (b0 < 0x80) {
    i += 1;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    i += 1;
    return b0;
  }
  if (i + len > s.size()) {
    i += 1;
    return b0;
  }
  for (std::size_t k = 1; k < len; ++k) {
    unsigned char bk = static_cast<unsigned char>(s[i + k]);
    if ((bk & 0xC0) != 0x80) {
      i += 1;
      return b0;
    }
    cp = (cp << 6) | (bk & 0x3F);
  }
  i += len;
  return cp;
}

void encode_utf8(std::uint32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace

std::vector<std::string> normalize_text(std::string_view raw) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t i = 0;
  while (i < raw.size()) {
    std::uint32_t cp = decode_utf8(raw, i);
    if (is_whitespace(cp)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
      continue;
    }
    if (is_punctuation(cp)) continue;
    encode_utf8(to_lower(cp), current);
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string normalize_join(std::string_view raw) {
  std::string out;
  for (const std::string& tok : normalize_text(raw)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

}  // namespace cohort_audit
