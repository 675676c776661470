#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kpiforge/errors.hpp"
#include "kpiforge/jsonl.hpp"
#include "kpiforge/records.hpp"
#include "kpiforge/taxonomy.hpp"

namespace kpiforge {

// Label-coarsening function at granularity level n: every taxonomy tag maps
// to the ancestor it has been folded into after n bottom-up collapse rounds.
struct CollapseMap {
    int level = 0;
    LinkKind kind = LinkKind::presentation;
    std::map<std::string, std::string> mapping;  // total on the taxonomy's tags

    const std::string* lookup(const std::string& tag) const {
        auto it = mapping.find(tag);
        return it == mapping.end() ? nullptr : &it->second;
    }

    std::int64_t image_size() const {
        std::set<std::string> image;
        for (const auto& [_, v] : mapping) image.insert(v);
        return static_cast<std::int64_t>(image.size());
    }

    bool operator==(const CollapseMap&) const = default;
};

// Iterative bottom-up collapse. Each round recomputes the current leaf set
// and folds every leaf into its parent; leaves that are roots stay fixed.
// Runs exactly n rounds (stopping early once only roots remain, which is the
// fixed point anyway).
inline CollapseMap collapse(const MasterTaxonomy& tax, int level) {
    if (level < 0) throw ConfigError("collapse level must be >= 0");

    std::set<std::string> tags = tax.all_tags();

    // Guard against cyclic input from hand-edited files; walk each parent
    // chain with a step budget.
    for (const auto& tag : tags) {
        std::string node = tag;
        size_t steps = 0;
        while (auto p = tax.parent(node)) {
            node = *p;
            if (++steps > tags.size())
                throw CycleError("taxonomy contains a cycle through " + tag);
        }
    }

    std::map<std::string, int> child_count;
    for (const auto& tag : tags) child_count[tag] = 0;
    for (const auto& [child, entry] : tax.parent_of) child_count[entry.parent]++;

    std::set<std::string> alive = tags;
    std::map<std::string, std::string> folded_into;  // removed node -> its parent

    for (int round = 0; round < level; ++round) {
        std::vector<std::string> leaves;
        for (const auto& tag : alive) {
            if (child_count[tag] != 0) continue;
            if (!tax.parent_of.count(tag)) continue;  // leaf at a root: fixed
            leaves.push_back(tag);
        }
        if (leaves.empty()) break;
        for (const auto& leaf : leaves) {
            const std::string& parent = tax.parent_of.at(leaf).parent;
            folded_into[leaf] = parent;
            alive.erase(leaf);
            child_count[parent]--;
        }
    }

    CollapseMap cmap;
    cmap.level = level;
    cmap.kind = tax.kind;
    for (const auto& tag : tags) {
        std::string node = tag;
        auto it = folded_into.find(node);
        while (it != folded_into.end()) {
            node = it->second;
            it = folded_into.find(node);
        }
        cmap.mapping[tag] = node;
    }
    return cmap;
}

enum class OosPolicy { keep, map_to_oos };

// Relabel a paragraph's entities through the collapse map. Labels outside
// the taxonomy follow the out-of-scope policy; everything else is unchanged.
inline Paragraph remap_paragraph(Paragraph p, const CollapseMap& cmap, OosPolicy policy) {
    for (auto& e : p.entities) {
        if (const std::string* mapped = cmap.lookup(e.label)) {
            e.label = *mapped;
        } else if (policy == OosPolicy::map_to_oos) {
            e.label = kOosLabel;
        }
    }
    return p;
}

inline std::vector<Paragraph> remap_dataset(std::vector<Paragraph> paragraphs, const CollapseMap& cmap,
                                            OosPolicy policy) {
    for (auto& p : paragraphs) p = remap_paragraph(std::move(p), cmap, policy);
    return paragraphs;
}

inline std::int64_t unique_label_count(const std::vector<Paragraph>& paragraphs, const CollapseMap& cmap,
                                       OosPolicy policy = OosPolicy::keep) {
    std::set<std::string> labels;
    for (const auto& p : paragraphs) {
        for (const auto& e : p.entities) {
            if (const std::string* mapped = cmap.lookup(e.label)) labels.insert(*mapped);
            else labels.insert(policy == OosPolicy::map_to_oos ? std::string(kOosLabel) : e.label);
        }
    }
    return static_cast<std::int64_t>(labels.size());
}

inline void write_collapse_map(const std::filesystem::path& path, const CollapseMap& cmap) {
    JsonlWriter w(path);
    for (const auto& [tag, collapsed] : cmap.mapping) {
        Json j = Json::object();
        j["tag"] = tag;
        j["collapsed_tag"] = collapsed;
        j["level"] = cmap.level;
        j["kind"] = std::string(kind_name(cmap.kind));
        w.write(j);
    }
}

inline CollapseMap read_collapse_map(const std::filesystem::path& path) {
    CollapseMap cmap;
    bool first = true;
    for_each_jsonl(path, [&](const Json& j) {
        if (first) {
            cmap.level = j.at("level").get<int>();
            cmap.kind = require_kind(j.at("kind").get<std::string>());
            first = false;
        }
        cmap.mapping[j.at("tag").get<std::string>()] = j.at("collapsed_tag").get<std::string>();
    });
    return cmap;
}

}  // namespace kpiforge
