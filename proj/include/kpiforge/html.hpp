#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kpiforge/text.hpp"

// Tolerant streaming tokenizer for the HTML/XHTML and linkbase XML that SEC
// filings are made of. It does not build a tree; consumers keep whatever
// stack they need.
namespace kpiforge::html {

inline const std::unordered_map<std::string_view, std::uint32_t>& named_entities() {
    static const std::unordered_map<std::string_view, std::uint32_t> table = {
        {"amp", '&'},      {"lt", '<'},       {"gt", '>'},       {"quot", '"'},
        {"apos", '\''},    {"nbsp", 0xA0},    {"ndash", 0x2013}, {"mdash", 0x2014},
        {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D},
        {"bull", 0x2022},  {"middot", 0xB7},  {"hellip", 0x2026},{"copy", 0xA9},
        {"reg", 0xAE},     {"trade", 0x2122}, {"sect", 0xA7},    {"para", 0xB6},
        {"dagger", 0x2020},{"Dagger", 0x2021},{"cent", 0xA2},    {"pound", 0xA3},
        {"yen", 0xA5},     {"euro", 0x20AC},  {"deg", 0xB0},     {"plusmn", 0xB1},
        {"times", 0xD7},   {"divide", 0xF7},  {"frac12", 0xBD},  {"frac14", 0xBC},
        {"frac34", 0xBE},  {"shy", 0xAD},     {"laquo", 0xAB},   {"raquo", 0xBB},
        {"minus", 0x2212}, {"prime", 0x2032}, {"Prime", 0x2033}, {"micro", 0xB5},
        {"le", 0x2264},    {"ge", 0x2265},    {"ne", 0x2260},    {"asymp", 0x2248},
        {"infin", 0x221E}, {"ensp", 0x2002},  {"emsp", 0x2003},  {"thinsp", 0x2009},
        {"zwnj", 0x200C},  {"zwj", 0x200D},   {"lrm", 0x200E},   {"rlm", 0x200F},
        {"szlig", 0xDF},   {"agrave", 0xE0},  {"aacute", 0xE1},  {"auml", 0xE4},
        {"ccedil", 0xE7},  {"egrave", 0xE8},  {"eacute", 0xE9},  {"euml", 0xEB},
        {"iacute", 0xED},  {"iuml", 0xEF},    {"ntilde", 0xF1},  {"oacute", 0xF3},
        {"ouml", 0xF6},    {"oslash", 0xF8},  {"uacute", 0xFA},  {"uuml", 0xFC},
    };
    return table;
}

// Decode &name; &#NNN; and &#xHH; references. Anything unrecognized is kept
// verbatim; EDGAR documents contain plenty of stray ampersands.
inline std::string decode_entities(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    size_t i = 0;
    while (i < raw.size()) {
        char c = raw[i];
        if (c != '&') {
            out.push_back(c);
            ++i;
            continue;
        }
        size_t semi = raw.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 32) {
            out.push_back(c);
            ++i;
            continue;
        }
        std::string_view body = raw.substr(i + 1, semi - i - 1);
        std::uint32_t cp = 0;
        bool ok = false;
        if (body.size() >= 2 && body[0] == '#') {
            bool hex = body[1] == 'x' || body[1] == 'X';
            std::string_view digits = body.substr(hex ? 2 : 1);
            ok = !digits.empty();
            for (char d : digits) {
                std::uint32_t v;
                if (d >= '0' && d <= '9') v = static_cast<std::uint32_t>(d - '0');
                else if (hex && d >= 'a' && d <= 'f') v = static_cast<std::uint32_t>(d - 'a' + 10);
                else if (hex && d >= 'A' && d <= 'F') v = static_cast<std::uint32_t>(d - 'A' + 10);
                else { ok = false; break; }
                cp = cp * (hex ? 16 : 10) + v;
                if (cp > 0x10FFFF) { ok = false; break; }
            }
        } else {
            auto it = named_entities().find(body);
            if (it != named_entities().end()) {
                cp = it->second;
                ok = true;
            }
        }
        if (!ok || cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) {
            out.push_back(c);
            ++i;
            continue;
        }
        append_utf8(out, cp);
        i = semi + 1;
    }
    return out;
}

struct Attr {
    std::string name;   // lower-cased
    std::string value;  // entity-decoded
};

struct Token {
    enum class Type { start_tag, end_tag, text, comment, doctype, pi, eof };
    Type type = Type::eof;
    std::string name;  // original case, prefix retained
    std::string text;  // decoded text for text tokens
    std::vector<Attr> attrs;
    bool self_closing = false;

    const std::string* attr(std::string_view lower_name) const {
        for (const auto& a : attrs)
            if (a.name == lower_name) return &a.value;
        return nullptr;
    }
};

class Tokenizer {
public:
    explicit Tokenizer(std::string_view src) : src_(src) {}

    Token next() {
        Token t;
        if (!rawtext_end_.empty()) return read_rawtext(t);
        if (pos_ >= src_.size()) return t;
        if (src_[pos_] != '<') return read_text(t);

        if (starts_with("<!--")) return read_comment(t);
        if (starts_with("<![CDATA[")) return read_cdata(t);
        if (starts_with("<!")) return read_decl(t);
        if (starts_with("<?")) return read_pi(t);
        if (starts_with("</")) return read_end_tag(t);
        if (pos_ + 1 < src_.size() && is_name_start(src_[pos_ + 1])) return read_start_tag(t);

        // Lone '<' in text.
        t.type = Token::Type::text;
        t.text = "<";
        ++pos_;
        return t;
    }

private:
    static bool is_name_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':';
    }
    static bool is_name_char(char c) {
        return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
    }

    bool starts_with(std::string_view prefix) const {
        return src_.substr(pos_, prefix.size()) == prefix;
    }

    Token& read_text(Token& t) {
        size_t end = src_.find('<', pos_);
        if (end == std::string_view::npos) end = src_.size();
        t.type = Token::Type::text;
        t.text = decode_entities(src_.substr(pos_, end - pos_));
        pos_ = end;
        return t;
    }

    Token& read_rawtext(Token& t) {
        // Inside <script>/<style>: everything up to the matching end tag is
        // opaque text.
        size_t i = pos_;
        while (i < src_.size()) {
            i = src_.find('<', i);
            if (i == std::string_view::npos) {
                i = src_.size();
                break;
            }
            if (i + 1 < src_.size() && src_[i + 1] == '/') {
                size_t j = i + 2, k = 0;
                while (j < src_.size() && k < rawtext_end_.size() &&
                       ascii_lower(src_[j]) == rawtext_end_[k]) {
                    ++j;
                    ++k;
                }
                if (k == rawtext_end_.size() &&
                    (j >= src_.size() || src_[j] == '>' || ascii_space(src_[j]) || src_[j] == '/'))
                    break;
            }
            ++i;
        }
        if (i > pos_) {
            t.type = Token::Type::text;
            t.text = std::string(src_.substr(pos_, i - pos_));
            pos_ = i;
            return t;
        }
        rawtext_end_.clear();
        if (pos_ >= src_.size()) return t;
        return read_end_tag(t);
    }

    Token& read_comment(Token& t) {
        size_t end = src_.find("-->", pos_ + 4);
        t.type = Token::Type::comment;
        pos_ = end == std::string_view::npos ? src_.size() : end + 3;
        return t;
    }

    Token& read_cdata(Token& t) {
        size_t body = pos_ + 9;
        size_t end = src_.find("]]>", body);
        t.type = Token::Type::text;
        t.text = std::string(src_.substr(body, (end == std::string_view::npos ? src_.size() : end) - body));
        pos_ = end == std::string_view::npos ? src_.size() : end + 3;
        return t;
    }

    Token& read_decl(Token& t) {
        size_t end = src_.find('>', pos_);
        t.type = Token::Type::doctype;
        pos_ = end == std::string_view::npos ? src_.size() : end + 1;
        return t;
    }

    Token& read_pi(Token& t) {
        size_t end = src_.find("?>", pos_);
        t.type = Token::Type::pi;
        pos_ = end == std::string_view::npos ? src_.size() : end + 2;
        return t;
    }

    Token& read_end_tag(Token& t) {
        pos_ += 2;
        size_t b = pos_;
        while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
        t.type = Token::Type::end_tag;
        t.name = std::string(src_.substr(b, pos_ - b));
        size_t end = src_.find('>', pos_);
        pos_ = end == std::string_view::npos ? src_.size() : end + 1;
        if (!rawtext_end_.empty()) rawtext_end_.clear();
        return t;
    }

    Token& read_start_tag(Token& t) {
        ++pos_;
        size_t b = pos_;
        while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
        t.type = Token::Type::start_tag;
        t.name = std::string(src_.substr(b, pos_ - b));

        while (pos_ < src_.size()) {
            while (pos_ < src_.size() && ascii_space(src_[pos_])) ++pos_;
            if (pos_ >= src_.size()) break;
            char c = src_[pos_];
            if (c == '>') {
                ++pos_;
                break;
            }
            if (c == '/') {
                ++pos_;
                if (pos_ < src_.size() && src_[pos_] == '>') {
                    t.self_closing = true;
                    ++pos_;
                    break;
                }
                continue;
            }
            size_t nb = pos_;
            while (pos_ < src_.size() && src_[pos_] != '=' && src_[pos_] != '>' && src_[pos_] != '/' &&
                   !ascii_space(src_[pos_]))
                ++pos_;
            std::string name = to_lower(src_.substr(nb, pos_ - nb));
            std::string value;
            while (pos_ < src_.size() && ascii_space(src_[pos_])) ++pos_;
            if (pos_ < src_.size() && src_[pos_] == '=') {
                ++pos_;
                while (pos_ < src_.size() && ascii_space(src_[pos_])) ++pos_;
                if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
                    char q = src_[pos_++];
                    size_t vb = pos_;
                    while (pos_ < src_.size() && src_[pos_] != q) ++pos_;
                    value = decode_entities(src_.substr(vb, pos_ - vb));
                    if (pos_ < src_.size()) ++pos_;
                } else {
                    size_t vb = pos_;
                    while (pos_ < src_.size() && src_[pos_] != '>' && !ascii_space(src_[pos_])) ++pos_;
                    value = decode_entities(src_.substr(vb, pos_ - vb));
                }
            }
            if (!name.empty()) t.attrs.push_back({std::move(name), std::move(value)});
        }

        std::string lower = to_lower(t.name);
        if (!t.self_closing && (lower == "script" || lower == "style")) rawtext_end_ = lower;
        return t;
    }

    std::string_view src_;
    size_t pos_ = 0;
    std::string rawtext_end_;
};

// Splits "prefix:local" (lower-cased); no-prefix names get an empty prefix.
struct QName {
    std::string prefix;
    std::string local;
};

inline QName split_qname(std::string_view name) {
    auto colon = name.find(':');
    if (colon == std::string_view::npos) return {"", to_lower(name)};
    return {to_lower(name.substr(0, colon)), to_lower(name.substr(colon + 1))};
}

}  // namespace kpiforge::html
