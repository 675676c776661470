#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kpiforge/dates.hpp"
#include "kpiforge/errors.hpp"
#include "kpiforge/jsonl.hpp"
#include "kpiforge/records.hpp"
#include "kpiforge/text.hpp"

namespace kpiforge {

// ---------------------------------------------------------------------------
// Temporal split with per-company cutoffs
// ---------------------------------------------------------------------------

enum class Split { train, dev, test };

inline std::string_view split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        default: return "test";
    }
}

enum class SplitReason { global_cutoff, company_cutoff, new_company };

inline std::string_view split_reason_name(SplitReason r) {
    switch (r) {
        case SplitReason::global_cutoff: return "global_cutoff";
        case SplitReason::company_cutoff: return "company_cutoff";
        default: return "new_company";
    }
}

struct SplitCutoffs {
    Date train_end{2023, 10, 31};
    Date dev_end{2024, 5, 31};
    Date test_end{2024, 6, 1};

    bool operator==(const SplitCutoffs&) const = default;

    void validate() const {
        if (!(train_end < dev_end && dev_end < test_end))
            throw ConfigError("split cutoffs must be strictly increasing");
    }
};

struct SplitAssignment {
    std::string accession_number;
    Split split = Split::train;
    SplitReason reason = SplitReason::global_cutoff;
};

struct FilingKey {
    std::string accession;
    std::string company;
    Date filing_date;
};

struct SplitResult {
    std::map<std::string, SplitAssignment> by_accession;
    std::vector<std::string> excluded;  // filings past the collection end
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace detail

// Assign filings to train/dev/test. Filings on or before train_end are
// train. Companies whose first filing is after train_end go entirely to
// test. Every other company's post-train filings are divided at a
// per-company temporal cutoff as close to 50/50 as an order-preserving
// boundary allows (odd counts favor dev); a company with a single post-train
// filing is placed by a seeded per-company coin flip.
inline SplitResult assign_splits(const std::vector<FilingKey>& filings, const SplitCutoffs& cutoffs,
                                 std::uint64_t seed) {
    cutoffs.validate();
    SplitResult result;

    std::map<std::string, std::vector<FilingKey>> by_company;
    for (const auto& f : filings) {
        if (cutoffs.test_end < f.filing_date) {
            result.excluded.push_back(f.accession);
            continue;
        }
        by_company[f.company].push_back(f);
    }
    std::sort(result.excluded.begin(), result.excluded.end());

    for (auto& [company, list] : by_company) {
        std::sort(list.begin(), list.end(), [](const FilingKey& a, const FilingKey& b) {
            return a.filing_date != b.filing_date ? a.filing_date < b.filing_date
                                                  : a.accession < b.accession;
        });

        if (list.front().filing_date > cutoffs.train_end) {
            for (const auto& f : list)
                result.by_accession[f.accession] = {f.accession, Split::test, SplitReason::new_company};
            continue;
        }

        std::vector<FilingKey> post;
        for (const auto& f : list) {
            if (f.filing_date <= cutoffs.train_end) {
                result.by_accession[f.accession] = {f.accession, Split::train, SplitReason::global_cutoff};
            } else {
                post.push_back(f);
            }
        }
        if (post.empty()) continue;

        if (post.size() == 1) {
            std::mt19937_64 rng(seed ^ detail::fnv1a64(company));
            Split s = (rng() & 1) ? Split::dev : Split::test;
            result.by_accession[post[0].accession] = {post[0].accession, s, SplitReason::company_cutoff};
            continue;
        }

        // Boundary index k puts post[0..k) in dev. Only indices that fall on
        // a strict date increase preserve the temporal order; among those we
        // take the one closest to the midpoint, preferring the larger (dev
        // absorbs the odd filing).
        size_t m = post.size();
        double mid = static_cast<double>(m) / 2.0;
        std::optional<size_t> best;
        for (size_t k = 0; k <= m; ++k) {
            if (k != 0 && k != m && !(post[k - 1].filing_date < post[k].filing_date)) continue;
            if (!best) {
                best = k;
                continue;
            }
            double d = std::abs(static_cast<double>(k) - mid);
            double bd = std::abs(static_cast<double>(*best) - mid);
            if (d < bd || (d == bd && k > *best)) best = k;
        }
        for (size_t i = 0; i < m; ++i) {
            Split s = i < *best ? Split::dev : Split::test;
            result.by_accession[post[i].accession] = {post[i].accession, s, SplitReason::company_cutoff};
        }
    }
    return result;
}

inline std::vector<FilingKey> filing_keys(const std::vector<Paragraph>& paragraphs) {
    std::map<std::string, FilingKey> keys;
    for (const auto& p : paragraphs) {
        auto [it, fresh] = keys.try_emplace(p.accession_number);
        if (fresh) {
            it->second.accession = p.accession_number;
            it->second.company = p.company_name;
            it->second.filing_date = Date::from_epoch_ms(p.filing_date_ms);
        }
    }
    std::vector<FilingKey> out;
    out.reserve(keys.size());
    for (auto& [_, k] : keys) out.push_back(std::move(k));
    return out;
}

// ---------------------------------------------------------------------------
// Lite subset: four expert categories
// ---------------------------------------------------------------------------

enum class LiteCategory { revenues, earnings, eps, ebit };

inline std::string_view lite_category_name(LiteCategory c) {
    switch (c) {
        case LiteCategory::revenues: return "Revenues";
        case LiteCategory::earnings: return "Earnings";
        case LiteCategory::eps: return "EPS";
        default: return "EBIT";
    }
}

// Lower-case form used when rewriting entity labels.
inline std::string_view lite_category_label(LiteCategory c) {
    switch (c) {
        case LiteCategory::revenues: return "revenues";
        case LiteCategory::earnings: return "earnings";
        case LiteCategory::eps: return "eps";
        default: return "ebit";
    }
}

inline std::optional<LiteCategory> parse_lite_category(std::string_view s) {
    std::string l = to_lower(s);
    if (l == "revenues") return LiteCategory::revenues;
    if (l == "earnings") return LiteCategory::earnings;
    if (l == "eps") return LiteCategory::eps;
    if (l == "ebit") return LiteCategory::ebit;
    return std::nullopt;
}

inline constexpr const char* kXbrlOosLabel = "XBRL-OOS";

struct LiteMapping {
    std::map<std::string, LiteCategory> entries;

    // Expert-curated default table mapping selected XBRL tags to the four
    // general finance concepts.
    static LiteMapping default_mapping() {
        static const std::pair<const char*, LiteCategory> rows[] = {
            {"us-gaap:IncomeLossAttributableToParent", LiteCategory::earnings},
            {"us-gaap:IncomeLossFromContinuingOperations", LiteCategory::earnings},
            {"us-gaap:IncomeLossFromContinuingOperationsBeforeIncomeTaxesExtraordinaryItemsNoncontrollingInterest",
             LiteCategory::earnings},
            {"us-gaap:IncomeLossFromContinuingOperationsBeforeIncomeTaxesMinorityInterestAndIncomeLossFromEquityMethodInvestments",
             LiteCategory::earnings},
            {"us-gaap:NetIncomeLoss", LiteCategory::earnings},
            {"us-gaap:NetIncomeLossAvailableToCommonStockholdersBasic", LiteCategory::earnings},
            {"us-gaap:OperatingIncomeLoss", LiteCategory::ebit},
            {"bw:IncrementalCommonSharesAttributableToDilutiveEffectOfNetIncome", LiteCategory::eps},
            {"cmtl:WeightedAveragePerformanceSharesOutstandingDuringThePeriodThatAreExcludedfromEPSCalculation",
             LiteCategory::eps},
            {"enb:WeightedAverageInterestInOwnCommonShares", LiteCategory::eps},
            {"fcx:DilutiveSecuritiesExcludedfromComputationofEPSAmount", LiteCategory::eps},
            {"gpmt:AntidilutiveSecuritiesExcludedfromComputationofEarningsPerShareInterestExpense",
             LiteCategory::eps},
            {"gs:ImpactOfUnvestedShareBasedPaymentAwardsAsSeparateClassOfSecuritiesOnEarningsPerShareBasic",
             LiteCategory::eps},
            {"land:WeightedAverageNumberOfOperatingPartnershipUnitsHeldByNoncontrollingInterest",
             LiteCategory::eps},
            {"pcg:PlanOfReorganizationBackstopCommitmentPremiumCommonStockShares", LiteCategory::eps},
            {"us-gaap:DistributedEarnings", LiteCategory::eps},
            {"us-gaap:DividendsAndInterestPaid", LiteCategory::eps},
            {"us-gaap:EarningsPerShareBasic", LiteCategory::eps},
            {"us-gaap:EarningsPerShareBasicAndDiluted", LiteCategory::eps},
            {"us-gaap:IncrementalCommonSharesAttributableToConversionOfDebtSecurities", LiteCategory::eps},
            {"us-gaap:IncrementalCommonSharesAttributableToParticipatingNonvestedSharesWithNonForfeitableDividendRights",
             LiteCategory::eps},
            {"us-gaap:IncrementalCommonSharesAttributableToShareBasedPaymentArrangements", LiteCategory::eps},
            {"us-gaap:ParticipatingSecuritiesDistributedAndUndistributedEarningsLossBasic", LiteCategory::eps},
            {"us-gaap:UndistributedEarnings", LiteCategory::eps},
            {"us-gaap:WeightedAverageNumberOfSharesContingentlyIssuable", LiteCategory::eps},
            {"us-gaap:WeightedAverageNumberOfSharesRestrictedStock", LiteCategory::eps},
            {"us-gaap:DirectFinancingLeaseRevenue", LiteCategory::revenues},
            {"us-gaap:FeeIncome", LiteCategory::revenues},
            {"us-gaap:InsuranceCommissionsAndFees", LiteCategory::revenues},
            {"us-gaap:OperatingLeaseLeaseIncome", LiteCategory::revenues},
            {"us-gaap:PremiumsEarnedNet", LiteCategory::revenues},
            {"us-gaap:Revenues", LiteCategory::revenues},
            {"us-gaap:UnregulatedOperatingRevenue", LiteCategory::revenues},
            {"us-gaap-supplement:FeeIncome", LiteCategory::revenues},
            {"us-gaap-supplement:InterestIncomeOperatingPaidInKind", LiteCategory::revenues},
        };
        LiteMapping m;
        for (const auto& [tag, cat] : rows) m.entries.emplace(tag, cat);
        return m;
    }

    static LiteMapping load(const std::filesystem::path& path) {
        LiteMapping m;
        for_each_jsonl(path, [&](const Json& j) {
            auto cat = parse_lite_category(j.at("category").get<std::string>());
            if (!cat) throw ParseError("unknown lite category in " + path.string());
            m.entries[j.at("tag").get<std::string>()] = *cat;
        });
        return m;
    }

    void save(const std::filesystem::path& path) const {
        JsonlWriter w(path);
        for (const auto& [tag, cat] : entries) {
            Json j = Json::object();
            j["tag"] = tag;
            j["category"] = std::string(lite_category_name(cat));
            w.write(j);
        }
    }
};

// Keep a paragraph only when strictly more than `threshold` of its entities
// map to an expert category. Mapped labels are rewritten to the lower-case
// category; the rest become the out-of-scope sentinel.
inline std::optional<Paragraph> build_lite_paragraph(const Paragraph& p, const LiteMapping& mapping,
                                                     double threshold = 0.5) {
    if (p.entities.empty()) return std::nullopt;
    std::int64_t mapped = 0;
    for (const auto& e : p.entities)
        if (mapping.entries.count(e.label)) ++mapped;
    double fraction = static_cast<double>(mapped) / static_cast<double>(p.entities.size());
    if (!(fraction > threshold)) return std::nullopt;

    Paragraph out = p;
    for (auto& e : out.entities) {
        auto it = mapping.entries.find(e.label);
        e.label = it != mapping.entries.end() ? std::string(lite_category_label(it->second))
                                              : std::string(kXbrlOosLabel);
    }
    return out;
}

inline std::vector<Paragraph> build_lite(const std::vector<Paragraph>& paragraphs,
                                         const LiteMapping& mapping, double threshold = 0.5) {
    std::vector<Paragraph> out;
    for (const auto& p : paragraphs)
        if (auto lp = build_lite_paragraph(p, mapping, threshold)) out.push_back(std::move(*lp));
    return out;
}

// ---------------------------------------------------------------------------
// Task label preparation
// ---------------------------------------------------------------------------

inline std::map<std::string, std::int64_t> label_frequencies(const std::vector<Paragraph>& paragraphs) {
    std::map<std::string, std::int64_t> freq;
    for (const auto& p : paragraphs)
        for (const auto& e : p.entities) freq[e.label]++;
    return freq;
}

// The top_k most frequent labels; ties at the boundary resolve by count
// descending then tag ascending.
inline std::set<std::string> top_k_labels(const std::map<std::string, std::int64_t>& freq,
                                          std::int64_t top_k) {
    std::vector<std::pair<std::string, std::int64_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::set<std::string> out;
    for (const auto& [tag, _] : ranked) {
        if (static_cast<std::int64_t>(out.size()) >= top_k) break;
        out.insert(tag);
    }
    return out;
}

// Classification: predict the first entity's label from the paragraph text.
inline Json classification_record(const Paragraph& p) {
    const Entity* first = nullptr;
    for (const auto& e : p.entities)
        if (!first || e.start_char < first->start_char) first = &e;
    Json j = Json::object();
    j["text"] = p.text;
    j["label"] = first ? first->label : std::string(kOosLabel);
    return j;
}

// Sequence labeling: every span keeps its label when it is in the train-set
// top-k table, otherwise the out-of-scope sentinel.
inline Json sequence_record(const Paragraph& p, const std::set<std::string>& label_set) {
    Json j = Json::object();
    j["text"] = p.text;
    Json spans = Json::array();
    for (const auto& e : p.entities) {
        Json s = Json::object();
        s["start"] = e.start_char;
        s["end"] = e.end_char;
        s["label"] = label_set.count(e.label) ? e.label : std::string(kOosLabel);
        spans.push_back(std::move(s));
    }
    j["spans"] = std::move(spans);
    return j;
}

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

struct CorpusStats {
    std::int64_t n_paragraphs = 0;
    std::int64_t n_entities = 0;
    std::int64_t n_words = 0;
    double avg_words = 0.0;
    double avg_tags = 0.0;
    double words_per_tag = 0.0;
};

inline CorpusStats compute_stats(const std::vector<Paragraph>& paragraphs) {
    CorpusStats s;
    for (const auto& p : paragraphs) {
        ++s.n_paragraphs;
        s.n_entities += static_cast<std::int64_t>(p.entities.size());
        s.n_words += count_words(p.text);
    }
    if (s.n_paragraphs > 0) {
        s.avg_words = static_cast<double>(s.n_words) / static_cast<double>(s.n_paragraphs);
        s.avg_tags = static_cast<double>(s.n_entities) / static_cast<double>(s.n_paragraphs);
    }
    if (s.n_entities > 0)
        s.words_per_tag = static_cast<double>(s.n_words) / static_cast<double>(s.n_entities);
    return s;
}

inline Json stats_to_json(const CorpusStats& s) {
    Json j = Json::object();
    j["n_paragraphs"] = s.n_paragraphs;
    j["n_entities"] = s.n_entities;
    j["n_words"] = s.n_words;
    j["avg_words"] = s.avg_words;
    j["avg_tags"] = s.avg_tags;
    j["words_per_tag"] = s.words_per_tag;
    return j;
}

}  // namespace kpiforge
