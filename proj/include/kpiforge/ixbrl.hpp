#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kpiforge/dates.hpp"
#include "kpiforge/html.hpp"
#include "kpiforge/records.hpp"
#include "kpiforge/text.hpp"

namespace kpiforge {

// Reporting period resolved from an xbrli:context declaration. Instant
// contexts carry start == end.
struct FactContext {
    Date start;
    Date end;
};

// Why a scanned fact did not become an Entity. The per-document tally over
// these reasons plus the emitted count always equals the number of
// ix:nonFraction elements in the document.
namespace drop_reason {
inline constexpr const char* hidden = "hidden";
inline constexpr const char* in_table = "in_table";
inline constexpr const char* nested_outer = "nested_outer";
inline constexpr const char* snippet_misparsed = "snippet_misparsed";
inline constexpr const char* snippet_filtered = "snippet_filtered";
inline constexpr const char* missing_context = "missing_context";
inline constexpr const char* bad_value = "bad_value";
inline constexpr const char* bad_label = "bad_label";
inline constexpr const char* overlap = "overlap";
}  // namespace drop_reason

struct DocDiagnostics {
    std::int64_t facts_total = 0;
    std::int64_t facts_emitted = 0;
    std::map<std::string, std::int64_t> dropped;
    std::int64_t paragraphs_emitted = 0;

    std::int64_t dropped_total() const {
        std::int64_t n = 0;
        for (const auto& [k, v] : dropped) n += v;
        return n;
    }

    void merge(const DocDiagnostics& other) {
        facts_total += other.facts_total;
        facts_emitted += other.facts_emitted;
        paragraphs_emitted += other.paragraphs_emitted;
        for (const auto& [k, v] : other.dropped) dropped[k] += v;
    }
};

// Snippet quality gate: nonempty, no leading punctuation, first alphabetic
// character uppercase. ASCII-centric plus the usual typographic quote and
// dash codepoints.
inline bool filter_snippet(std::string_view text) {
    size_t i = 0;
    while (i < text.size()) {
        size_t w = space_len(text, i);
        if (w == 0) break;
        i += w;
    }
    if (i >= text.size()) return false;

    unsigned char first = static_cast<unsigned char>(text[i]);
    if (first < 0x80) {
        if (std::ispunct(first)) return false;
    } else {
        static const std::set<std::string> kUnicodePunct = {
            "‘", "’", "“", "”", "–", "—",
            "•", "·", "…", "«", "»", "¡", "¿"};
        size_t len = 1;
        while (i + len < text.size() && (static_cast<unsigned char>(text[i + len]) & 0xC0) == 0x80) ++len;
        if (kUnicodePunct.count(std::string(text.substr(i, len)))) return false;
    }
    for (size_t j = i; j < text.size(); ++j) {
        unsigned char c = static_cast<unsigned char>(text[j]);
        if (c < 0x80 && std::isalpha(c)) return std::isupper(c) != 0;
    }
    return true;  // no ASCII letter to judge
}

namespace detail {

// Shift the decimal point of a plain decimal string by `power` digits.
// Exact in decimal, so "3.3" at scale 9 becomes precisely 3300000000.
inline std::string shift_decimal(std::string_view digits, int power) {
    std::string intpart, frac;
    auto dot = digits.find('.');
    if (dot == std::string_view::npos) {
        intpart = std::string(digits);
    } else {
        intpart = std::string(digits.substr(0, dot));
        frac = std::string(digits.substr(dot + 1));
    }
    std::string all = intpart + frac;
    long point = static_cast<long>(intpart.size()) + power;
    if (point <= 0) {
        all.insert(0, static_cast<size_t>(-point), '0');
        point = 0;
    } else if (point > static_cast<long>(all.size())) {
        all.append(static_cast<size_t>(point) - all.size(), '0');
    }
    std::string out = all.substr(0, static_cast<size_t>(point));
    std::string rest = all.substr(static_cast<size_t>(point));
    if (out.empty()) out = "0";
    if (!rest.empty()) out += "." + rest;
    return out;
}

enum class NumFormat { dot_decimal, comma_decimal, fixed_zero };

inline NumFormat classify_format(std::string_view hint) {
    std::string h;
    h.reserve(hint.size());
    for (char c : hint) {
        if (c == '-' || c == '_') continue;
        h.push_back(ascii_lower(c));
    }
    if (auto colon = h.find(':'); colon != std::string::npos) h = h.substr(colon + 1);
    if (h.find("commadecimal") != std::string::npos) return NumFormat::comma_decimal;
    if (h.find("zerodash") != std::string::npos || h.find("numdash") != std::string::npos ||
        h.find("fixedzero") != std::string::npos)
        return NumFormat::fixed_zero;
    return NumFormat::dot_decimal;
}

inline bool is_dash_text(std::string_view t) {
    return t == "-" || t == "–" || t == "—" || t == "−";
}

}  // namespace detail

// Turn an inline fact's displayed text into its numeric value:
// numeric(text without grouping separators) * 10^scale, negated when the
// sign flag is set. Returns nullopt when non-numeric residue remains.
inline std::optional<double> resolve_value(std::string_view raw_text, int scale, bool negate,
                                           std::string_view format_hint = {}) {
    std::string cleaned = collapse_whitespace(raw_text);
    if (cleaned.empty()) return std::nullopt;

    auto fmt = detail::classify_format(format_hint);
    if (fmt == detail::NumFormat::fixed_zero || detail::is_dash_text(cleaned)) return 0.0;

    char group1 = ',', decimal = '.';
    if (fmt == detail::NumFormat::comma_decimal) {
        group1 = '.';
        decimal = ',';
    }

    std::string digits;
    digits.reserve(cleaned.size());
    bool seen_dot = false, seen_digit = false, neg_text = false;
    for (size_t i = 0; i < cleaned.size(); ++i) {
        char c = cleaned[i];
        if (c == ' ') continue;  // residual grouping space
        if (c == group1) continue;
        if ((c == '-' || c == '+') && !seen_digit && !seen_dot && digits.empty()) {
            neg_text = c == '-';
            continue;
        }
        if (c == decimal) {
            if (seen_dot) return std::nullopt;
            seen_dot = true;
            digits.push_back('.');
            continue;
        }
        if (c >= '0' && c <= '9') {
            seen_digit = true;
            digits.push_back(c);
            continue;
        }
        return std::nullopt;
    }
    if (!seen_digit) return std::nullopt;

    std::string shifted = detail::shift_decimal(digits, scale);
    double v = std::strtod(shifted.c_str(), nullptr);
    if (neg_text) v = -v;
    if (negate) v = -v;
    if (v == 0.0) v = 0.0;  // normalize -0
    return v;
}

namespace detail {

struct ScannedFact {
    std::string name;
    std::string context_ref;
    std::string unit_ref;
    std::string format;
    int scale = 0;
    bool negate = false;
    int run = -1;
    size_t begin = 0;  // byte offsets into the run's normalized text
    size_t end = 0;
    std::string own_text;  // independently accumulated visible text
    const char* drop = nullptr;
};

struct TextRun {
    std::string text;
    std::vector<size_t> facts;
    bool in_table = false;
};

inline const std::set<std::string>& block_tags() {
    static const std::set<std::string> tags = {
        "html", "head", "body",  "div",  "p",     "li",    "ul",    "ol",     "dl",     "dt",
        "dd",   "table","thead", "tbody","tfoot", "tr",    "td",    "th",     "caption","h1",
        "h2",   "h3",   "h4",    "h5",   "h6",    "br",    "hr",    "blockquote",      "pre",
        "center","section","article","aside","header","footer","nav", "form", "fieldset",
        "legend","address","figure","figcaption","title"};
    return tags;
}

inline const std::set<std::string>& void_tags() {
    static const std::set<std::string> tags = {"area", "base", "br",   "col",  "embed", "hr",
                                               "img",  "input","link", "meta", "param", "source",
                                               "track","wbr"};
    return tags;
}

inline constexpr std::string_view kInlineXbrlNs2013 = "http://www.xbrl.org/2013/inlineXBRL";
inline constexpr std::string_view kInlineXbrlNs2008 = "http://www.xbrl.org/2008/inlineXBRL";

class IxScanner {
public:
    explicit IxScanner(std::string_view src) : tok_(src) {}

    void scan() {
        for (;;) {
            html::Token t = tok_.next();
            switch (t.type) {
                case html::Token::Type::eof:
                    flush_run();
                    return;
                case html::Token::Type::start_tag:
                    on_start(t);
                    break;
                case html::Token::Type::end_tag:
                    on_end(t);
                    break;
                case html::Token::Type::text:
                    on_text(t.text);
                    break;
                default:
                    break;
            }
        }
    }

    std::vector<TextRun> runs;
    std::vector<ScannedFact> facts;
    std::map<std::string, FactContext> contexts;
    std::map<std::string, std::string> units;

private:
    bool is_ix(const html::QName& q) const {
        if (q.prefix.empty()) return false;
        auto it = ns_.find(q.prefix);
        if (it != ns_.end())
            return it->second == kInlineXbrlNs2013 || it->second == kInlineXbrlNs2008;
        return q.prefix == "ix";
    }

    void collect_xmlns(const html::Token& t) {
        for (const auto& a : t.attrs) {
            if (a.name.rfind("xmlns:", 0) == 0) ns_[a.name.substr(6)] = a.value;
        }
    }

    void on_start(const html::Token& t) {
        collect_xmlns(t);
        html::QName q = html::split_qname(t.name);

        if (q.local == "script" || q.local == "style") {
            if (!t.self_closing) ++skip_depth_;
            return;
        }

        // xbrli resource declarations; matched by local name, they only occur
        // inside ix:header/ix:resources.
        if (q.local == "context") {
            ctx_id_ = t.attr("id") ? *t.attr("id") : "";
            ctx_start_.reset();
            ctx_end_.reset();
            ctx_instant_.reset();
            in_context_ = true;
            return;
        }
        if (in_context_) {
            if (q.local == "startdate") ctx_field_ = 1;
            else if (q.local == "enddate") ctx_field_ = 2;
            else if (q.local == "instant") ctx_field_ = 3;
            if (ctx_field_ != 0) ctx_buf_.clear();
            return;
        }
        if (q.local == "unit") {
            unit_id_ = t.attr("id") ? *t.attr("id") : "";
            unit_measures_.clear();
            unit_num_.clear();
            unit_den_.clear();
            unit_slot_ = 0;
            in_unit_ = true;
            return;
        }
        if (in_unit_) {
            if (q.local == "unitnumerator") unit_slot_ = 1;
            else if (q.local == "unitdenominator") unit_slot_ = 2;
            else if (q.local == "measure") { in_measure_ = true; measure_buf_.clear(); }
            return;
        }

        if (is_ix(q)) {
            if (q.local == "header") {
                ++header_depth_;
                return;
            }
            if (q.local == "hidden") {
                ++hidden_depth_;
                return;
            }
            if (q.local == "nonfraction") {
                open_fact(t);
                if (t.self_closing) close_fact();
                return;
            }
            // ix:nonNumeric and friends: their text stays in the narrative flow.
            return;
        }

        if (block_tags().count(q.local)) {
            flush_run();
            if (q.local == "table") ++table_depth_;
        }
        if (void_tags().count(q.local)) return;
    }

    void on_end(const html::Token& t) {
        html::QName q = html::split_qname(t.name);

        if (q.local == "script" || q.local == "style") {
            if (skip_depth_ > 0) --skip_depth_;
            return;
        }
        if (in_context_) {
            if (q.local == "startdate" || q.local == "enddate" || q.local == "instant") {
                auto d = parse_date(trim(ctx_buf_));
                if (ctx_field_ == 1) ctx_start_ = d ? std::optional<Date>(*d) : std::nullopt;
                else if (ctx_field_ == 2) ctx_end_ = d ? std::optional<Date>(*d) : std::nullopt;
                else if (ctx_field_ == 3) ctx_instant_ = d ? std::optional<Date>(*d) : std::nullopt;
                ctx_field_ = 0;
                return;
            }
            if (q.local == "context") {
                if (!ctx_id_.empty()) {
                    if (ctx_instant_) contexts[ctx_id_] = {*ctx_instant_, *ctx_instant_};
                    else if (ctx_start_ && ctx_end_ && !(*ctx_end_ < *ctx_start_))
                        contexts[ctx_id_] = {*ctx_start_, *ctx_end_};
                }
                in_context_ = false;
                return;
            }
            return;
        }
        if (in_unit_) {
            if (q.local == "measure") {
                std::string m = std::string(trim(measure_buf_));
                if (auto colon = m.rfind(':'); colon != std::string::npos) m = m.substr(colon + 1);
                if (unit_slot_ == 1) unit_num_.push_back(m);
                else if (unit_slot_ == 2) unit_den_.push_back(m);
                else unit_measures_.push_back(m);
                in_measure_ = false;
                return;
            }
            if (q.local == "unitnumerator" || q.local == "unitdenominator") {
                unit_slot_ = 0;
                return;
            }
            if (q.local == "unit") {
                if (!unit_id_.empty()) {
                    std::string u;
                    if (!unit_num_.empty() && !unit_den_.empty()) u = unit_num_[0] + "/" + unit_den_[0];
                    else if (!unit_num_.empty()) u = unit_num_[0];
                    else if (!unit_measures_.empty()) u = unit_measures_[0];
                    if (!u.empty()) units[unit_id_] = u;
                }
                in_unit_ = false;
                return;
            }
            return;
        }

        if (is_ix(q)) {
            if (q.local == "header") {
                if (header_depth_ > 0) --header_depth_;
                return;
            }
            if (q.local == "hidden") {
                if (hidden_depth_ > 0) --hidden_depth_;
                return;
            }
            if (q.local == "nonfraction") {
                close_fact();
                return;
            }
            return;
        }

        if (block_tags().count(q.local)) {
            flush_run();
            if (q.local == "table" && table_depth_ > 0) --table_depth_;
        }
    }

    void on_text(std::string_view text) {
        if (in_context_) {
            if (ctx_field_ != 0) ctx_buf_.append(text);
            return;  // entity identifiers etc. are never narrative text
        }
        if (in_unit_) {
            if (in_measure_) measure_buf_.append(text);
            return;
        }
        if (skip_depth_ > 0 || header_depth_ > 0 || hidden_depth_ > 0) return;

        size_t i = 0;
        while (i < text.size()) {
            size_t w = space_len(text, i);
            if (w > 0) {
                pending_space_ = true;
                i += w;
                continue;
            }
            if (pending_space_ && !cur_.text.empty()) {
                cur_.text.push_back(' ');
                for (size_t idx : fact_stack_) facts[idx].own_text.push_back(' ');
            }
            pending_space_ = false;
            size_t len = 1;
            while (i + len < text.size() && (static_cast<unsigned char>(text[i + len]) & 0xC0) == 0x80)
                ++len;
            cur_.text.append(text.substr(i, len));
            for (size_t idx : fact_stack_) facts[idx].own_text.append(text.substr(i, len));
            i += len;
        }
    }

    void open_fact(const html::Token& t) {
        ScannedFact f;
        if (const auto* v = t.attr("name")) f.name = *v;
        if (const auto* v = t.attr("contextref")) f.context_ref = *v;
        if (const auto* v = t.attr("unitref")) f.unit_ref = *v;
        if (const auto* v = t.attr("format")) f.format = *v;
        if (const auto* v = t.attr("scale")) f.scale = std::atoi(v->c_str());
        if (const auto* v = t.attr("sign")) f.negate = !v->empty();

        if (header_depth_ > 0 || hidden_depth_ > 0 || skip_depth_ > 0) f.drop = drop_reason::hidden;
        else if (table_depth_ > 0) f.drop = drop_reason::in_table;
        f.begin = cur_.text.size();
        facts.push_back(std::move(f));
        if (!fact_stack_.empty()) {
            // An enclosing fact loses to its innermost child.
            ScannedFact& outer = facts[fact_stack_.back()];
            if (!outer.drop) outer.drop = drop_reason::nested_outer;
        }
        fact_stack_.push_back(facts.size() - 1);
    }

    void close_fact() {
        if (fact_stack_.empty()) return;
        size_t idx = fact_stack_.back();
        fact_stack_.pop_back();
        ScannedFact& f = facts[idx];
        f.end = cur_.text.size();
        if (!f.drop) cur_.facts.push_back(idx);
    }

    void flush_run() {
        // A fact split across block boundaries cannot get coherent offsets.
        for (size_t idx : fact_stack_) {
            if (!facts[idx].drop) facts[idx].drop = drop_reason::snippet_misparsed;
        }
        if (!cur_.text.empty() || !cur_.facts.empty()) {
            cur_.in_table = table_depth_ > 0;
            runs.push_back(std::move(cur_));
            int run_index = static_cast<int>(runs.size()) - 1;
            for (size_t idx : runs.back().facts) facts[idx].run = run_index;
        }
        cur_ = TextRun{};
        pending_space_ = false;
    }

    html::Tokenizer tok_;
    std::map<std::string, std::string> ns_;

    TextRun cur_;
    bool pending_space_ = false;
    std::vector<size_t> fact_stack_;
    int table_depth_ = 0;
    int header_depth_ = 0;
    int hidden_depth_ = 0;
    int skip_depth_ = 0;

    bool in_context_ = false;
    std::string ctx_id_, ctx_buf_;
    int ctx_field_ = 0;
    std::optional<Date> ctx_start_, ctx_end_, ctx_instant_;

    bool in_unit_ = false;
    bool in_measure_ = false;
    std::string unit_id_, measure_buf_;
    std::vector<std::string> unit_measures_, unit_num_, unit_den_;
    int unit_slot_ = 0;
};

inline std::string_view trim_span(std::string_view text, size_t& begin, size_t& end) {
    while (begin < end && text[begin] == ' ') ++begin;
    while (end > begin && text[end - 1] == ' ') --end;
    return text.substr(begin, end - begin);
}

}  // namespace detail

// Exposed for tests: segment a document into candidate snippets with fact
// anchors, before context/unit/value resolution.
struct SnippetAnchors {
    std::string text;
    std::vector<std::pair<size_t, size_t>> anchors;  // byte offsets
    bool in_table = false;
};

inline std::vector<SnippetAnchors> segment_snippets(std::string_view html_bytes) {
    detail::IxScanner scanner(html_bytes);
    scanner.scan();
    std::vector<SnippetAnchors> out;
    for (const auto& run : scanner.runs) {
        SnippetAnchors s;
        s.text = run.text;
        s.in_table = run.in_table;
        for (size_t idx : run.facts) {
            size_t b = scanner.facts[idx].begin, e = scanner.facts[idx].end;
            detail::trim_span(s.text, b, e);
            s.anchors.emplace_back(b, e);
        }
        out.push_back(std::move(s));
    }
    return out;
}

// Parse one iXBRL document into Listing-style paragraphs. Pure: no shared
// state, deterministic for fixed bytes.
inline std::vector<Paragraph> parse_document(std::string_view html_bytes, const FilingMeta& meta,
                                             DocDiagnostics* diag = nullptr) {
    detail::IxScanner scanner(html_bytes);
    scanner.scan();

    DocDiagnostics local;
    local.facts_total = static_cast<std::int64_t>(scanner.facts.size());

    std::vector<Paragraph> paragraphs;
    Date max_period_end{};
    bool have_period = false;

    for (size_t r = 0; r < scanner.runs.size(); ++r) {
        const detail::TextRun& run = scanner.runs[r];
        if (run.facts.empty()) continue;

        // Offset sanity: the recorded span must reproduce the fact's own text.
        bool misparsed = false;
        for (size_t idx : run.facts) {
            detail::ScannedFact& f = scanner.facts[idx];
            size_t b = f.begin, e = f.end;
            std::string_view span = detail::trim_span(run.text, b, e);
            if (span != trim(f.own_text)) {
                misparsed = true;
                break;
            }
        }
        if (misparsed) {
            for (size_t idx : run.facts) scanner.facts[idx].drop = drop_reason::snippet_misparsed;
            continue;
        }

        struct Candidate {
            size_t begin, end;
            Entity entity;
        };
        std::vector<Candidate> survivors;
        for (size_t idx : run.facts) {
            detail::ScannedFact& f = scanner.facts[idx];
            if (!valid_label(f.name)) {
                f.drop = drop_reason::bad_label;
                continue;
            }
            auto ctx = scanner.contexts.find(f.context_ref);
            if (f.context_ref.empty() || ctx == scanner.contexts.end()) {
                f.drop = drop_reason::missing_context;
                continue;
            }
            size_t b = f.begin, e = f.end;
            std::string_view span = detail::trim_span(run.text, b, e);
            auto value = resolve_value(span, f.scale, f.negate, f.format);
            if (!value) {
                f.drop = drop_reason::bad_value;
                continue;
            }
            std::string unit = "pure";
            if (!f.unit_ref.empty()) {
                auto u = scanner.units.find(f.unit_ref);
                if (u != scanner.units.end()) unit = u->second;
            }
            Candidate c;
            c.begin = b;
            c.end = e;
            c.entity.label = f.name;
            c.entity.period_start = ctx->second.start;
            c.entity.period_end = ctx->second.end;
            c.entity.unit = unit;
            c.entity.value = *value;
            survivors.push_back(std::move(c));
        }

        std::sort(survivors.begin(), survivors.end(), [](const Candidate& a, const Candidate& b) {
            return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
        });
        // Enforce non-overlap; later-starting offenders are dropped.
        std::vector<Candidate> kept;
        for (auto& c : survivors) {
            if (!kept.empty() && c.begin < kept.back().end) {
                local.dropped[drop_reason::overlap]++;
                continue;
            }
            kept.push_back(std::move(c));
        }
        if (kept.empty()) continue;

        if (!filter_snippet(run.text)) {
            local.dropped[drop_reason::snippet_filtered] += static_cast<std::int64_t>(kept.size());
            continue;
        }

        Paragraph p;
        p.form_type = meta.form_type;
        p.accession_number = meta.accession_number;
        p.filing_date_ms = meta.filing_epoch_ms;
        p.quarter_ending = meta.quarter_ending;
        p.company_name = meta.company_name;
        p.text = run.text;

        // Convert byte offsets to codepoint offsets (fast path: pure ASCII).
        bool ascii = true;
        for (char ch : run.text)
            if (static_cast<unsigned char>(ch) >= 0x80) {
                ascii = false;
                break;
            }
        for (auto& c : kept) {
            Entity e = std::move(c.entity);
            if (ascii) {
                e.start_char = static_cast<std::int64_t>(c.begin);
                e.end_char = static_cast<std::int64_t>(c.end);
            } else {
                e.start_char = static_cast<std::int64_t>(codepoint_count(std::string_view(run.text).substr(0, c.begin)));
                e.end_char = e.start_char + static_cast<std::int64_t>(codepoint_count(
                                                std::string_view(run.text).substr(c.begin, c.end - c.begin)));
            }
            if (!have_period || max_period_end < e.period_end) {
                max_period_end = e.period_end;
                have_period = true;
            }
            p.entities.push_back(std::move(e));
        }
        local.facts_emitted += static_cast<std::int64_t>(p.entities.size());
        paragraphs.push_back(std::move(p));
    }

    for (const auto& f : scanner.facts)
        if (f.drop) local.dropped[f.drop]++;

    if (meta.quarter_ending.empty() && have_period) {
        std::string qe = max_period_end.compact();
        for (auto& p : paragraphs) p.quarter_ending = qe;
    }

    local.paragraphs_emitted = static_cast<std::int64_t>(paragraphs.size());
    if (diag) diag->merge(local);
    return paragraphs;
}

}  // namespace kpiforge
