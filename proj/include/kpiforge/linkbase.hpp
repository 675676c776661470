#pragma once

#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kpiforge/errors.hpp"
#include "kpiforge/html.hpp"
#include "kpiforge/jsonl.hpp"
#include "kpiforge/records.hpp"

namespace kpiforge {

enum class LinkKind { calculation, presentation };

inline std::string_view kind_name(LinkKind k) {
    return k == LinkKind::calculation ? "calculation" : "presentation";
}

inline std::optional<LinkKind> parse_kind(std::string_view s) {
    if (s == "calculation" || s == "cal") return LinkKind::calculation;
    if (s == "presentation" || s == "pre") return LinkKind::presentation;
    return std::nullopt;
}

inline LinkKind require_kind(std::string_view s) {
    auto k = parse_kind(s);
    if (!k) throw ConfigError("unknown linkbase kind: '" + std::string(s) + "' (expected pre or cal)");
    return *k;
}

struct TaxonomyEdge {
    std::string parent;
    std::string child;
    LinkKind kind = LinkKind::presentation;
    std::optional<double> order_hint;
    std::optional<double> weight;  // calculation arcs only

    bool operator==(const TaxonomyEdge&) const = default;
};

struct LinkbaseDiagnostics {
    std::int64_t arcs_total = 0;
    std::int64_t self_loops = 0;
    std::int64_t unresolved_locators = 0;
    std::int64_t duplicate_arcs = 0;

    void merge(const LinkbaseDiagnostics& o) {
        arcs_total += o.arcs_total;
        self_loops += o.self_loops;
        unresolved_locators += o.unresolved_locators;
        duplicate_arcs += o.duplicate_arcs;
    }
};

namespace detail {

// xlink:href locators end in "#prefix_LocalName"; the first underscore in the
// fragment separates the namespace prefix from the concept name.
inline std::optional<std::string> tag_from_href(std::string_view href) {
    auto hash = href.rfind('#');
    std::string_view frag = hash == std::string_view::npos ? href : href.substr(hash + 1);
    if (frag.empty()) return std::nullopt;
    if (frag.find(':') != std::string_view::npos) {
        std::string tag(frag);
        return valid_label(tag) ? std::optional<std::string>(tag) : std::nullopt;
    }
    auto us = frag.find('_');
    if (us == std::string_view::npos || us == 0 || us + 1 == frag.size()) return std::nullopt;
    std::string tag = std::string(frag.substr(0, us)) + ":" + std::string(frag.substr(us + 1));
    return valid_label(tag) ? std::optional<std::string>(tag) : std::nullopt;
}

}  // namespace detail

// Parse a .pre/.cal linkbase into parent->child edges. Locator labels are
// scoped per extended link; all extended-link roles are merged. Throws
// KindMismatchError when the file's arcs are all of the other kind.
inline std::vector<TaxonomyEdge> parse_linkbase(std::string_view xml, LinkKind kind,
                                                LinkbaseDiagnostics* diag = nullptr) {
    const std::string want_arc = kind == LinkKind::calculation ? "calculationarc" : "presentationarc";
    const std::string other_arc = kind == LinkKind::calculation ? "presentationarc" : "calculationarc";

    struct RawArc {
        std::string from, to;
        std::optional<double> order, weight;
    };

    html::Tokenizer tok(xml);
    std::map<std::string, std::string> locators;  // xlink:label -> tag, current scope
    std::vector<RawArc> scope_arcs;
    std::vector<TaxonomyEdge> edges;
    std::set<std::pair<std::string, std::string>> seen;
    LinkbaseDiagnostics local;
    std::int64_t other_kind_arcs = 0;

    auto resolve_scope = [&]() {
        for (const auto& arc : scope_arcs) {
            auto from = locators.find(arc.from);
            auto to = locators.find(arc.to);
            if (from == locators.end() || to == locators.end()) {
                ++local.unresolved_locators;
                continue;
            }
            if (from->second == to->second) {
                ++local.self_loops;
                continue;
            }
            if (!seen.emplace(from->second, to->second).second) {
                ++local.duplicate_arcs;
                continue;
            }
            TaxonomyEdge e;
            e.parent = from->second;
            e.child = to->second;
            e.kind = kind;
            e.order_hint = arc.order;
            if (kind == LinkKind::calculation) e.weight = arc.weight;
            edges.push_back(std::move(e));
        }
        locators.clear();
        scope_arcs.clear();
    };

    for (;;) {
        html::Token t = tok.next();
        if (t.type == html::Token::Type::eof) break;
        if (t.type != html::Token::Type::start_tag && t.type != html::Token::Type::end_tag) continue;
        html::QName q = html::split_qname(t.name);

        if (t.type == html::Token::Type::end_tag) {
            if (q.local == "presentationlink" || q.local == "calculationlink") resolve_scope();
            continue;
        }

        if (q.local == "loc") {
            const std::string* href = t.attr("xlink:href");
            const std::string* label = t.attr("xlink:label");
            if (!href || !label) {
                ++local.unresolved_locators;
                continue;
            }
            auto tag = detail::tag_from_href(*href);
            if (!tag) {
                ++local.unresolved_locators;
                continue;
            }
            locators[*label] = *tag;
            continue;
        }
        if (q.local == want_arc || q.local == other_arc) {
            ++local.arcs_total;
            if (q.local == other_arc) {
                ++other_kind_arcs;
                continue;
            }
            const std::string* use = t.attr("use");
            if (use && *use == "prohibited") continue;
            RawArc arc;
            if (const auto* v = t.attr("xlink:from")) arc.from = *v;
            if (const auto* v = t.attr("xlink:to")) arc.to = *v;
            if (const auto* v = t.attr("order")) arc.order = std::strtod(v->c_str(), nullptr);
            if (const auto* v = t.attr("weight")) arc.weight = std::strtod(v->c_str(), nullptr);
            scope_arcs.push_back(std::move(arc));
            continue;
        }
    }
    resolve_scope();

    if (edges.empty() && other_kind_arcs > 0)
        throw KindMismatchError("linkbase contains only " +
                                std::string(kind == LinkKind::calculation ? "presentation" : "calculation") +
                                " arcs but was parsed as " + std::string(kind_name(kind)));

    if (diag) diag->merge(local);
    return edges;
}

// Interchange record: one parent->child relation attributed to a filing.
struct EdgeRecord {
    std::string parent;
    std::string child;
    LinkKind kind = LinkKind::presentation;
    std::string accession;

    bool operator==(const EdgeRecord&) const = default;
};

inline Json edge_record_to_json(const EdgeRecord& e) {
    Json j = Json::object();
    j["parent"] = e.parent;
    j["child"] = e.child;
    j["kind"] = std::string(kind_name(e.kind));
    j["accession"] = e.accession;
    return j;
}

inline EdgeRecord edge_record_from_json(const Json& j) {
    EdgeRecord e;
    e.parent = j.at("parent").get<std::string>();
    e.child = j.at("child").get<std::string>();
    e.kind = require_kind(j.at("kind").get<std::string>());
    e.accession = j.value("accession", std::string{});
    return e;
}

inline std::vector<EdgeRecord> read_edge_records(const std::filesystem::path& path) {
    std::vector<EdgeRecord> out;
    for_each_jsonl(path, [&](const Json& j) { out.push_back(edge_record_from_json(j)); });
    return out;
}

inline void write_edge_records(const std::filesystem::path& path, const std::vector<EdgeRecord>& records) {
    JsonlWriter w(path);
    for (const auto& e : records) w.write(edge_record_to_json(e));
}

}  // namespace kpiforge
