#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kpiforge/dates.hpp"
#include "kpiforge/jsonl.hpp"
#include "kpiforge/records.hpp"

namespace kpiforge {

// One predicted entity from a structured-extraction system. All fields are
// optional; generative output is unrestricted.
struct PredictedEntity {
    std::optional<std::string> label;
    std::optional<Date> period_start;
    std::optional<Date> period_end;
    std::optional<std::string> unit;
    std::optional<double> value;
};

// Prediction files mirror the extraction response schema: one JSON object
// per line with an "entities" array.
inline PredictedEntity predicted_entity_from_json(const Json& j) {
    PredictedEntity e;
    if (j.contains("label") && j["label"].is_string()) e.label = j["label"].get<std::string>();
    auto date_field = [&](const char* key) -> std::optional<Date> {
        if (!j.contains(key)) return std::nullopt;
        if (!j[key].is_string()) return std::nullopt;
        return parse_date(j[key].get<std::string>());
    };
    e.period_start = date_field("start_date_for_period");
    e.period_end = date_field("end_date_for_period");
    if (j.contains("currency_/_unit") && j["currency_/_unit"].is_string())
        e.unit = j["currency_/_unit"].get<std::string>();
    if (j.contains("value")) {
        if (j["value"].is_number()) e.value = j["value"].get<double>();
        else if (j["value"].is_string()) {
            try {
                e.value = std::stod(j["value"].get<std::string>());
            } catch (...) {
            }
        }
    }
    return e;
}

inline std::vector<PredictedEntity> predicted_entities_from_json(const Json& record) {
    std::vector<PredictedEntity> out;
    if (record.contains("entities") && record["entities"].is_array())
        for (const auto& ej : record["entities"]) out.push_back(predicted_entity_from_json(ej));
    return out;
}

namespace detail {

inline bool eq_value(double gold, const std::optional<double>& pred) { return pred && *pred == gold; }
inline bool eq_date(const Date& gold, const std::optional<Date>& pred) { return pred && *pred == gold; }
inline bool eq_str(const std::string& gold, const std::optional<std::string>& pred) {
    return pred && *pred == gold;
}

// Field-agreement score; value outweighs the dates, which outweigh unit,
// which outweighs label, so each tier dominates everything beneath it.
inline int pair_score(const Entity& g, const PredictedEntity& p) {
    int s = 0;
    if (eq_value(g.value, p.value)) s += 16;
    if (eq_date(g.period_start, p.period_start)) s += 8;
    if (eq_date(g.period_end, p.period_end)) s += 4;
    if (eq_str(g.unit, p.unit)) s += 2;
    if (eq_str(g.label, p.label)) s += 1;
    return s;
}

inline std::string canonical_double(double v) { return Json(v).dump(); }

inline std::string gold_sort_key(const Entity& e) {
    return e.label + "\x01" + e.period_start.iso() + "\x01" + e.period_end.iso() + "\x01" + e.unit +
           "\x01" + canonical_double(e.value) + "\x01" + std::to_string(e.start_char);
}

inline std::string pred_sort_key(const PredictedEntity& e) {
    auto opt = [](const std::optional<std::string>& s) { return s ? *s : std::string("\x02"); };
    std::string key = opt(e.label) + "\x01";
    key += (e.period_start ? e.period_start->iso() : std::string("\x02")) + "\x01";
    key += (e.period_end ? e.period_end->iso() : std::string("\x02")) + "\x01";
    key += opt(e.unit) + "\x01";
    key += e.value ? canonical_double(*e.value) : std::string("\x02");
    return key;
}

}  // namespace detail

struct AlignmentResult {
    std::vector<std::pair<size_t, size_t>> pairs;  // (gold index, pred index)
    std::vector<size_t> unmatched_gold;
    std::vector<size_t> unmatched_pred;
};

// Greedy one-to-one matching maximizing per-pair field agreement. Candidates
// are ranked over canonically sorted lists, so shuffling either input cannot
// change the outcome; zero-agreement items stay unmatched.
inline AlignmentResult align(const std::vector<Entity>& gold, const std::vector<PredictedEntity>& pred) {
    std::vector<size_t> gorder(gold.size()), porder(pred.size());
    for (size_t i = 0; i < gold.size(); ++i) gorder[i] = i;
    for (size_t i = 0; i < pred.size(); ++i) porder[i] = i;
    std::stable_sort(gorder.begin(), gorder.end(), [&](size_t a, size_t b) {
        return detail::gold_sort_key(gold[a]) < detail::gold_sort_key(gold[b]);
    });
    std::stable_sort(porder.begin(), porder.end(), [&](size_t a, size_t b) {
        return detail::pred_sort_key(pred[a]) < detail::pred_sort_key(pred[b]);
    });

    struct Cand {
        int score;
        size_t gi, pi;  // positions in canonical order
    };
    std::vector<Cand> cands;
    for (size_t gi = 0; gi < gorder.size(); ++gi)
        for (size_t pi = 0; pi < porder.size(); ++pi) {
            int s = detail::pair_score(gold[gorder[gi]], pred[porder[pi]]);
            if (s > 0) cands.push_back({s, gi, pi});
        }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.gi != b.gi) return a.gi < b.gi;
        return a.pi < b.pi;
    });

    AlignmentResult out;
    std::vector<bool> gused(gold.size(), false), pused(pred.size(), false);
    for (const auto& c : cands) {
        if (gused[c.gi] || pused[c.pi]) continue;
        gused[c.gi] = pused[c.pi] = true;
        out.pairs.emplace_back(gorder[c.gi], porder[c.pi]);
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    std::vector<bool> gm(gold.size(), false), pm(pred.size(), false);
    for (const auto& [g, p] : out.pairs) {
        gm[g] = true;
        pm[p] = true;
    }
    for (size_t i = 0; i < gold.size(); ++i)
        if (!gm[i]) out.unmatched_gold.push_back(i);
    for (size_t i = 0; i < pred.size(); ++i)
        if (!pm[i]) out.unmatched_pred.push_back(i);
    return out;
}

enum class EvalField { start_date, end_date, currency, value, label };

inline constexpr EvalField kEvalFields[] = {EvalField::start_date, EvalField::end_date,
                                            EvalField::currency, EvalField::value, EvalField::label};

inline std::string_view eval_field_name(EvalField f) {
    switch (f) {
        case EvalField::start_date: return "start_date";
        case EvalField::end_date: return "end_date";
        case EvalField::currency: return "currency";
        case EvalField::value: return "value";
        default: return "label";
    }
}

struct Tally {
    std::int64_t tp = 0, fp = 0, fn = 0;

    double precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
    double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
    double micro_f1() const {
        double p = precision(), r = recall();
        return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }

    void merge(const Tally& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
    }
};

// Corpus-level score accumulator. Documents can be scored independently and
// merged; a misclassified prediction is a false negative for the true value
// and a false positive for the predicted value.
class Scorer {
public:
    void add_document(const std::vector<Entity>& gold, const std::vector<PredictedEntity>& pred) {
        AlignmentResult alignment = align(gold, pred);
        add_aligned(gold, pred, alignment);
    }

    void add_aligned(const std::vector<Entity>& gold, const std::vector<PredictedEntity>& pred,
                     const AlignmentResult& alignment) {
        for (const auto& g : gold) gold_label_freq_[g.label]++;
        gold_total_ += static_cast<std::int64_t>(gold.size());

        for (const auto& [gi, pi] : alignment.pairs) {
            const Entity& g = gold[gi];
            const PredictedEntity& p = pred[pi];
            int agree = 0;
            agree += field_pair(EvalField::start_date, detail::eq_date(g.period_start, p.period_start),
                                p.period_start.has_value());
            agree += field_pair(EvalField::end_date, detail::eq_date(g.period_end, p.period_end),
                                p.period_end.has_value());
            agree += field_pair(EvalField::currency, detail::eq_str(g.unit, p.unit), p.unit.has_value());
            agree += field_pair(EvalField::value, detail::eq_value(g.value, p.value), p.value.has_value());

            bool label_ok = detail::eq_str(g.label, p.label);
            agree += field_pair(EvalField::label, label_ok, p.label.has_value());
            if (label_ok) {
                label_tally_[g.label].tp++;
            } else {
                label_tally_[g.label].fn++;
                if (p.label) label_tally_[*p.label].fp++;
            }
            if (agree == 5) ++exact_matches_;
        }

        for (size_t gi : alignment.unmatched_gold) {
            for (EvalField f : kEvalFields) tally_[static_cast<int>(f)].fn++;
            label_tally_[gold[gi].label].fn++;
        }
        for (size_t pi : alignment.unmatched_pred) {
            const PredictedEntity& p = pred[pi];
            if (p.period_start) tally_[static_cast<int>(EvalField::start_date)].fp++;
            if (p.period_end) tally_[static_cast<int>(EvalField::end_date)].fp++;
            if (p.unit) tally_[static_cast<int>(EvalField::currency)].fp++;
            if (p.value) tally_[static_cast<int>(EvalField::value)].fp++;
            if (p.label) {
                tally_[static_cast<int>(EvalField::label)].fp++;
                label_tally_[*p.label].fp++;
            }
        }
    }

    void merge(const Scorer& o) {
        for (int i = 0; i < 5; ++i) tally_[i].merge(o.tally_[i]);
        for (const auto& [label, t] : o.label_tally_) label_tally_[label].merge(t);
        for (const auto& [label, n] : o.gold_label_freq_) gold_label_freq_[label] += n;
        gold_total_ += o.gold_total_;
        exact_matches_ += o.exact_matches_;
    }

    const Tally& field_tally(EvalField f) const { return tally_[static_cast<int>(f)]; }

    // Per-label F1 from the label tallies, restricted to labels with gold
    // support ("gold-only").
    std::map<std::string, double> gold_label_f1() const {
        std::map<std::string, double> out;
        for (const auto& [label, n] : gold_label_freq_) {
            auto it = label_tally_.find(label);
            out[label] = it == label_tally_.end() ? 0.0 : it->second.micro_f1();
        }
        return out;
    }

    double label_macro_f1() const {
        auto f1s = gold_label_f1();
        if (f1s.empty()) return 0.0;
        double sum = 0.0;
        for (const auto& [_, f1] : f1s) sum += f1;
        return sum / static_cast<double>(f1s.size());
    }

    double entity_exact_match() const {
        return gold_total_ == 0 ? 0.0
                                : static_cast<double>(exact_matches_) / static_cast<double>(gold_total_);
    }

    const std::map<std::string, std::int64_t>& gold_label_freq() const { return gold_label_freq_; }
    const std::map<std::string, Tally>& label_tallies() const { return label_tally_; }
    std::int64_t gold_total() const { return gold_total_; }
    std::int64_t exact_matches() const { return exact_matches_; }

private:
    // Matched pair, one field: returns 1 on agreement. Disagreement is a
    // false negative for the gold value, plus a false positive when the
    // prediction actually supplied a value.
    int field_pair(EvalField f, bool equal, bool pred_present) {
        Tally& t = tally_[static_cast<int>(f)];
        if (equal) {
            t.tp++;
            return 1;
        }
        t.fn++;
        if (pred_present) t.fp++;
        return 0;
    }

    Tally tally_[5];
    std::map<std::string, Tally> label_tally_;
    std::map<std::string, std::int64_t> gold_label_freq_;
    std::int64_t gold_total_ = 0;
    std::int64_t exact_matches_ = 0;
};

struct CurvePoint {
    std::string label;
    std::int64_t support = 0;
    std::int64_t cumulative_support = 0;
    double macro_f1 = 0.0;
};

// Macro-F1 over cumulative support: labels enter most-frequent-first (ties
// lexicographic); point k averages the F1 of the first k labels and records
// their total gold support.
inline std::vector<CurvePoint> cumulative_macro_f1(const std::map<std::string, double>& per_label_f1,
                                                   const std::map<std::string, std::int64_t>& label_freq) {
    std::vector<std::pair<std::string, std::int64_t>> ranked;
    for (const auto& [label, _] : per_label_f1) {
        auto it = label_freq.find(label);
        ranked.emplace_back(label, it == label_freq.end() ? 0 : it->second);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    std::vector<CurvePoint> curve;
    std::int64_t cum = 0;
    double f1_sum = 0.0;
    for (size_t i = 0; i < ranked.size(); ++i) {
        cum += ranked[i].second;
        f1_sum += per_label_f1.at(ranked[i].first);
        curve.push_back({ranked[i].first, ranked[i].second, cum,
                         f1_sum / static_cast<double>(i + 1)});
    }
    return curve;
}

inline Json eval_report_json(const Scorer& scorer, bool per_label_breakdown) {
    Json report = Json::object();
    Json per_field = Json::object();
    for (EvalField f : kEvalFields) {
        const Tally& t = scorer.field_tally(f);
        Json fj = Json::object();
        fj["precision"] = t.precision();
        fj["recall"] = t.recall();
        fj["micro_f1"] = t.micro_f1();
        fj["tp"] = t.tp;
        fj["fp"] = t.fp;
        fj["fn"] = t.fn;
        per_field[std::string(eval_field_name(f))] = std::move(fj);
    }
    report["per_field"] = std::move(per_field);
    report["label_macro_f1"] = scorer.label_macro_f1();
    report["entity_exact_match"] = scorer.entity_exact_match();
    report["gold_entities"] = scorer.gold_total();
    report["exact_matches"] = scorer.exact_matches();

    Json curve = Json::array();
    for (const auto& pt : cumulative_macro_f1(scorer.gold_label_f1(), scorer.gold_label_freq())) {
        Json cj = Json::object();
        cj["label"] = pt.label;
        cj["support"] = pt.support;
        cj["cumulative_support"] = pt.cumulative_support;
        cj["macro_f1"] = pt.macro_f1;
        curve.push_back(std::move(cj));
    }
    report["cumulative_macro_f1"] = std::move(curve);

    if (per_label_breakdown) {
        Json per_label = Json::object();
        auto f1s = scorer.gold_label_f1();
        for (const auto& [label, t] : scorer.label_tallies()) {
            Json lj = Json::object();
            lj["tp"] = t.tp;
            lj["fp"] = t.fp;
            lj["fn"] = t.fn;
            lj["f1"] = t.micro_f1();
            lj["gold_support"] = scorer.gold_label_freq().count(label)
                                     ? scorer.gold_label_freq().at(label)
                                     : 0;
            per_label[label] = std::move(lj);
        }
        report["per_label"] = std::move(per_label);
    }
    return report;
}

}  // namespace kpiforge
