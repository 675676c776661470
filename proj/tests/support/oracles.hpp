#pragma once

// Independent brute-force oracles used by the test suites. These stay naive
// on purpose: they re-derive expected results by direct simulation or
// exhaustive enumeration, never by calling the code under test.

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kpiforge/evalkit.hpp"
#include "kpiforge/records.hpp"
#include "kpiforge/taxonomy.hpp"

namespace oracle {

// Literal bottom-up collapse: each round lists the current leaves by scanning
// every node pair, then replaces each leaf with its parent.
inline std::map<std::string, std::string> simulate_collapse(const kpiforge::MasterTaxonomy& tax, int n) {
    std::set<std::string> nodes = tax.all_tags();
    std::map<std::string, std::string> parent;
    for (const auto& [child, entry] : tax.parent_of) parent[child] = entry.parent;

    std::map<std::string, std::string> label;
    for (const auto& t : nodes) label[t] = t;

    std::set<std::string> alive = nodes;
    for (int round = 0; round < n; ++round) {
        std::vector<std::string> leaves;
        for (const auto& cand : alive) {
            bool has_child = false;
            for (const auto& other : alive) {
                auto it = parent.find(other);
                if (other != cand && it != parent.end() && it->second == cand && alive.count(other)) {
                    has_child = true;
                    break;
                }
            }
            if (!has_child && parent.count(cand)) leaves.push_back(cand);
        }
        for (const auto& leaf : leaves) {
            const std::string& p = parent.at(leaf);
            for (auto& [orig, cur] : label)
                if (cur == leaf) cur = p;
            alive.erase(leaf);
        }
    }
    return label;
}

// Random forest over `n` nodes; every non-root's parent has a smaller index,
// so the structure is acyclic by construction.
inline kpiforge::MasterTaxonomy random_forest(std::mt19937_64& rng, int n, double root_prob = 0.2) {
    kpiforge::MasterTaxonomy tax;
    tax.kind = kpiforge::LinkKind::presentation;
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("t" + std::to_string(100 + i));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        if (i == 0 || coin(rng) < root_prob) {
            tax.roots.insert(names[i]);
            continue;
        }
        std::uniform_int_distribution<int> pick(0, i - 1);
        tax.parent_of[names[i]] = {names[pick(rng)], 1};
    }
    return tax;
}

// Best achievable total agreement score over all one-to-one matchings,
// by exhaustive recursion. Tractable for the <= 6x6 instances we test.
inline int optimal_alignment_score(const std::vector<kpiforge::Entity>& gold,
                                   const std::vector<kpiforge::PredictedEntity>& pred) {
    std::vector<bool> used(pred.size(), false);
    std::function<int(size_t)> best = [&](size_t gi) -> int {
        if (gi == gold.size()) return 0;
        int result = best(gi + 1);  // leave this gold unmatched
        for (size_t pi = 0; pi < pred.size(); ++pi) {
            if (used[pi]) continue;
            int s = kpiforge::detail::pair_score(gold[gi], pred[pi]);
            if (s <= 0) continue;
            used[pi] = true;
            result = std::max(result, s + best(gi + 1));
            used[pi] = false;
        }
        return result;
    };
    return best(0);
}

inline int greedy_alignment_score(const std::vector<kpiforge::Entity>& gold,
                                  const std::vector<kpiforge::PredictedEntity>& pred) {
    kpiforge::AlignmentResult r = kpiforge::align(gold, pred);
    int total = 0;
    for (const auto& [gi, pi] : r.pairs) total += kpiforge::detail::pair_score(gold[gi], pred[pi]);
    return total;
}

}  // namespace oracle
