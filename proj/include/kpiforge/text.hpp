#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace kpiforge {

inline bool ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }

inline std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(ascii_lower(c));
    return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (ascii_lower(a[i]) != ascii_lower(b[i])) return false;
    return true;
}

inline std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && ascii_space(s[b])) ++b;
    while (e > b && ascii_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp <= 0x7F) {
        out.push_back(static_cast<char>(cp));
    } else if (cp <= 0x7FF) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp <= 0xFFFF) {
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

// Byte length of the whitespace character starting at s[i], or 0 when s[i] is
// not whitespace. Covers ASCII whitespace plus the Unicode space separators
// that show up in EDGAR HTML (NBSP, the U+2000 block, narrow NBSP, etc.).
inline size_t space_len(std::string_view s, size_t i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) return ascii_space(static_cast<char>(c)) ? 1 : 0;
    if (c == 0xC2 && i + 1 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0xA0) return 2;
    if (c == 0xE2 && i + 2 < s.size()) {
        unsigned char c1 = static_cast<unsigned char>(s[i + 1]);
        unsigned char c2 = static_cast<unsigned char>(s[i + 2]);
        if (c1 == 0x80 && ((c2 >= 0x80 && c2 <= 0x8A) || c2 == 0xA8 || c2 == 0xA9 || c2 == 0xAF))
            return 3;  // U+2000..200A, U+2028, U+2029, U+202F
        if (c1 == 0x81 && c2 == 0x9F) return 3;  // U+205F
    }
    if (c == 0xE3 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        static_cast<unsigned char>(s[i + 2]) == 0x80)
        return 3;  // U+3000
    return 0;
}

// Collapse whitespace runs to single spaces and strip the ends.
inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    size_t i = 0;
    while (i < s.size()) {
        size_t w = space_len(s, i);
        if (w > 0) {
            pending = true;
            i += w;
        } else {
            if (pending && !out.empty()) out.push_back(' ');
            pending = false;
            out.push_back(s[i]);
            ++i;
        }
    }
    return out;
}

inline size_t codepoint_count(std::string_view s) {
    size_t n = 0;
    for (char c : s)
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
    return n;
}

// Substring by codepoint offsets, [begin, end).
inline std::string_view utf8_slice(std::string_view s, size_t cp_begin, size_t cp_end) {
    size_t b = std::string_view::npos, e = s.size(), n = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        bool boundary = i == s.size() || (static_cast<unsigned char>(s[i]) & 0xC0) != 0x80;
        if (!boundary) continue;
        if (n == cp_begin && b == std::string_view::npos) b = i;
        if (n == cp_end) {
            e = i;
            break;
        }
        ++n;
    }
    if (b == std::string_view::npos) return {};
    return s.substr(b, e - b);
}

// Whitespace-token count, the word-count convention used for corpus stats.
inline std::int64_t count_words(std::string_view s) {
    std::int64_t n = 0;
    size_t i = 0;
    bool in_word = false;
    while (i < s.size()) {
        size_t w = space_len(s, i);
        if (w > 0) {
            in_word = false;
            i += w;
        } else {
            if (!in_word) ++n;
            in_word = true;
            ++i;
        }
    }
    return n;
}

}  // namespace kpiforge
