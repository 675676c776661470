#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kpiforge/errors.hpp"
#include "kpiforge/jsonl.hpp"
#include "kpiforge/linkbase.hpp"

namespace kpiforge {

// Commutative monoid of (parent, child) relation counts. Shards can be
// counted independently and merged; build order never matters.
class EdgeCounter {
public:
    explicit EdgeCounter(LinkKind kind) : kind_(kind) {}

    LinkKind kind() const { return kind_; }

    void add(const std::string& parent, const std::string& child, std::int64_t n = 1) {
        counts_[{child, parent}] += n;
    }

    void add(const EdgeRecord& e) {
        if (e.kind != kind_)
            throw KindMismatchError("edge of kind " + std::string(kind_name(e.kind)) +
                                    " added to a " + std::string(kind_name(kind_)) + " counter");
        add(e.parent, e.child);
    }

    void merge(const EdgeCounter& other) {
        if (other.kind_ != kind_) throw KindMismatchError("cannot merge counters of different kinds");
        for (const auto& [k, v] : other.counts_) counts_[k] += v;
    }

    // (child, parent) -> count, ordered.
    const std::map<std::pair<std::string, std::string>, std::int64_t>& counts() const { return counts_; }

    bool empty() const { return counts_.empty(); }

private:
    LinkKind kind_;
    std::map<std::pair<std::string, std::string>, std::int64_t> counts_;
};

// Corpus-level forest: each tag's parent is its most frequent parent across
// filings, with deterministic tie- and cycle-breaking.
struct MasterTaxonomy {
    struct ParentEntry {
        std::string parent;
        std::int64_t support = 0;

        bool operator==(const ParentEntry&) const = default;
    };

    LinkKind kind = LinkKind::presentation;
    std::map<std::string, ParentEntry> parent_of;
    std::set<std::string> roots;

    bool operator==(const MasterTaxonomy&) const = default;

    bool contains(const std::string& tag) const {
        return parent_of.count(tag) > 0 || roots.count(tag) > 0;
    }

    std::optional<std::string> parent(const std::string& tag) const {
        auto it = parent_of.find(tag);
        if (it == parent_of.end()) return std::nullopt;
        return it->second.parent;
    }

    std::set<std::string> all_tags() const {
        std::set<std::string> tags = roots;
        for (const auto& [child, entry] : parent_of) {
            tags.insert(child);
            tags.insert(entry.parent);
        }
        return tags;
    }

    size_t size() const { return all_tags().size(); }
};

namespace detail {

// The argmax parent map is a functional graph, so cycles are disjoint simple
// loops. Returns one cycle as a child list, or empty when acyclic.
inline std::vector<std::string> find_cycle(const std::map<std::string, MasterTaxonomy::ParentEntry>& parent_of) {
    std::map<std::string, int> color;  // 0 white, 1 gray, 2 black
    for (const auto& [start, _] : parent_of) {
        if (color[start] != 0) continue;
        std::vector<std::string> path;
        std::string node = start;
        while (true) {
            int& c = color[node];
            if (c == 1) {
                // Found a loop; trim the tail leading into it.
                auto it = std::find(path.begin(), path.end(), node);
                return {it, path.end()};
            }
            if (c == 2) break;
            c = 1;
            path.push_back(node);
            auto p = parent_of.find(node);
            if (p == parent_of.end()) break;
            node = p->second.parent;
        }
        for (const auto& n : path) color[n] = 2;
    }
    return {};
}

}  // namespace detail

// Aggregate per-document edges into the master forest:
// parent(t) = argmax over candidate parents of count(p, t).
// Ties pick the lexicographically smallest parent. Cycles created by the
// independent per-tag argmax are broken by deleting the lowest-support edge
// on the loop (tie: the lexicographically greatest child's edge).
inline MasterTaxonomy build_master(const EdgeCounter& counter) {
    MasterTaxonomy tax;
    tax.kind = counter.kind();

    std::set<std::string> universe;
    const auto& counts = counter.counts();
    for (auto it = counts.begin(); it != counts.end();) {
        const std::string& child = it->first.first;
        std::string best_parent;
        std::int64_t best = 0;
        for (; it != counts.end() && it->first.first == child; ++it) {
            universe.insert(it->first.second);
            if (it->second > best) {
                best = it->second;
                best_parent = it->first.second;
            }
            // map order makes the first maximal parent the lexicographically
            // smallest one, so strictly-greater comparison implements the tie rule
        }
        universe.insert(child);
        tax.parent_of[child] = {best_parent, best};
    }

    for (;;) {
        std::vector<std::string> cycle = detail::find_cycle(tax.parent_of);
        if (cycle.empty()) break;
        std::string victim;
        std::int64_t victim_support = 0;
        for (const auto& child : cycle) {
            const auto& entry = tax.parent_of.at(child);
            if (victim.empty() || entry.support < victim_support ||
                (entry.support == victim_support && child > victim)) {
                victim = child;
                victim_support = entry.support;
            }
        }
        tax.parent_of.erase(victim);
    }

    for (const auto& tag : universe)
        if (!tax.parent_of.count(tag)) tax.roots.insert(tag);
    return tax;
}

inline MasterTaxonomy build_master(const std::vector<EdgeRecord>& records, LinkKind kind) {
    EdgeCounter counter(kind);
    for (const auto& r : records) counter.add(r);
    return build_master(counter);
}

// Filter an edge stream down to one company before aggregation. The
// accession->cik map must cover every accession it is asked about; a cik
// that never appears is an error.
inline std::vector<EdgeRecord> edges_for_company(const std::vector<EdgeRecord>& records,
                                                 const std::map<std::string, std::string>& accession_to_cik,
                                                 const std::string& cik) {
    bool known = false;
    for (const auto& [acc, c] : accession_to_cik)
        if (c == cik) known = true;
    if (!known) throw UnknownCikError("cik " + cik + " does not appear in the accession map");

    std::vector<EdgeRecord> out;
    for (const auto& r : records) {
        auto it = accession_to_cik.find(r.accession);
        if (it != accession_to_cik.end() && it->second == cik) out.push_back(r);
    }
    return out;
}

// Sorted one-row-per-tag artifact. Root tags carry a null parent and zero
// support so the export round-trips losslessly.
inline void write_master(const std::filesystem::path& path, const MasterTaxonomy& tax) {
    JsonlWriter w(path);
    std::map<std::string, Json> rows;
    for (const auto& [child, entry] : tax.parent_of) {
        Json j = Json::object();
        j["child"] = child;
        j["parent"] = entry.parent;
        j["kind"] = std::string(kind_name(tax.kind));
        j["support"] = entry.support;
        rows[child] = std::move(j);
    }
    for (const auto& root : tax.roots) {
        Json j = Json::object();
        j["child"] = root;
        j["parent"] = nullptr;
        j["kind"] = std::string(kind_name(tax.kind));
        j["support"] = 0;
        rows[root] = std::move(j);
    }
    for (const auto& [_, j] : rows) w.write(j);
}

inline MasterTaxonomy read_master(const std::filesystem::path& path) {
    MasterTaxonomy tax;
    bool have_kind = false;
    for_each_jsonl(path, [&](const Json& j) {
        LinkKind k = require_kind(j.at("kind").get<std::string>());
        if (!have_kind) {
            tax.kind = k;
            have_kind = true;
        } else if (k != tax.kind) {
            throw KindMismatchError("mixed kinds in taxonomy file " + path.string());
        }
        std::string child = j.at("child").get<std::string>();
        if (j.at("parent").is_null()) {
            tax.roots.insert(child);
        } else {
            tax.parent_of[child] = {j.at("parent").get<std::string>(),
                                    j.at("support").get<std::int64_t>()};
        }
    });
    return tax;
}

// Nested forest of the top_k most frequent tags plus all their ancestors;
// roots are always present. Suitable for treemap plotting.
inline Json treemap_export(const MasterTaxonomy& tax,
                           const std::map<std::string, std::int64_t>& tag_frequency, std::int64_t top_k) {
    std::vector<std::pair<std::string, std::int64_t>> ranked;
    for (const auto& [tag, n] : tag_frequency)
        if (tax.contains(tag)) ranked.emplace_back(tag, n);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (top_k < static_cast<std::int64_t>(ranked.size())) ranked.resize(static_cast<size_t>(top_k));

    std::set<std::string> selected;
    for (const auto& [tag, _] : ranked) {
        std::string node = tag;
        while (selected.insert(node).second) {
            auto p = tax.parent(node);
            if (!p) break;
            node = *p;
        }
    }
    for (const auto& r : tax.roots) selected.insert(r);

    std::map<std::string, std::vector<std::string>> children;
    std::set<std::string> tops;
    for (const auto& tag : selected) {
        auto p = tax.parent(tag);
        if (p && selected.count(*p)) children[*p].push_back(tag);
        else tops.insert(tag);
    }

    auto count_of = [&](const std::string& tag) -> std::int64_t {
        auto it = tag_frequency.find(tag);
        return it == tag_frequency.end() ? 0 : it->second;
    };
    std::function<Json(const std::string&)> emit = [&](const std::string& tag) {
        Json node = Json::object();
        node["tag"] = tag;
        node["count"] = count_of(tag);
        Json kids = Json::array();
        for (const auto& c : children[tag]) kids.push_back(emit(c));
        node["children"] = std::move(kids);
        return node;
    };

    Json forest = Json::array();
    for (const auto& t : tops) forest.push_back(emit(t));
    return forest;
}

}  // namespace kpiforge
