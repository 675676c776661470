#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "kpiforge/evalkit.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace kpiforge;

namespace {

PredictedEntity pred_of(const Entity& e) {
    PredictedEntity p;
    p.label = e.label;
    p.period_start = e.period_start;
    p.period_end = e.period_end;
    p.unit = e.unit;
    p.value = e.value;
    return p;
}

Entity gold(const std::string& label, double value, Date start = {2023, 1, 1}, Date end = {2023, 12, 31},
            const std::string& unit = "USD") {
    return fixtures::make_entity(label, value, start, end, unit);
}

std::mt19937_64 g_rng(404);

Entity random_gold() {
    const char* labels[] = {"revenues", "earnings", "eps", "ebit", "XBRL-OOS"};
    const char* units[] = {"USD", "shares", "EUR"};
    double values[] = {1.0, 2.5, -866000.0, 42.0};
    Date starts[] = {{2023, 1, 1}, {2023, 4, 1}, {2024, 1, 1}};
    return gold(labels[g_rng() % 5], values[g_rng() % 4], starts[g_rng() % 3],
                {2024, 1 + static_cast<int>(g_rng() % 6), 15}, units[g_rng() % 3]);
}

PredictedEntity random_pred() {
    PredictedEntity p = pred_of(random_gold());
    if (g_rng() % 4 == 0) p.value.reset();
    if (g_rng() % 5 == 0) p.label.reset();
    if (g_rng() % 6 == 0) p.period_start.reset();
    return p;
}

}  // namespace

TEST_CASE("identical lists align one to one") {
    std::vector<Entity> g = {gold("revenues", 1.0), gold("earnings", 2.0)};
    std::vector<PredictedEntity> p = {pred_of(g[0]), pred_of(g[1])};
    auto r = align(g, p);
    CHECK(r.pairs.size() == 2);
    CHECK(r.unmatched_gold.empty());
    CHECK(r.unmatched_pred.empty());
}

TEST_CASE("value agreement drives the pairing") {
    std::vector<Entity> g = {gold("revenues", 1.0), gold("earnings", 2.0)};
    std::vector<PredictedEntity> p = {pred_of(g[1])};  // matches the second gold's value
    auto r = align(g, p);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].first == 1);
    CHECK(r.pairs[0].second == 0);
    REQUIRE(r.unmatched_gold.size() == 1);
    CHECK(r.unmatched_gold[0] == 0);
}

TEST_CASE("empty predictions leave all gold unmatched") {
    std::vector<Entity> g = {gold("revenues", 1.0), gold("earnings", 2.0)};
    auto r = align(g, {});
    CHECK(r.pairs.empty());
    CHECK(r.unmatched_gold.size() == 2);
}

TEST_CASE("perfect predictions score one everywhere") {
    std::vector<Entity> g = {gold("revenues", 1.0), gold("earnings", 2.0), gold("eps", 0.5)};
    std::vector<PredictedEntity> p;
    for (const auto& e : g) p.push_back(pred_of(e));
    Scorer s;
    s.add_document(g, p);
    for (EvalField f : kEvalFields) {
        CHECK(s.field_tally(f).precision() == 1.0);
        CHECK(s.field_tally(f).recall() == 1.0);
        CHECK(s.field_tally(f).micro_f1() == 1.0);
    }
    CHECK(s.label_macro_f1() == 1.0);
    CHECK(s.entity_exact_match() == 1.0);
}

TEST_CASE("pure label misclassification zeroes label precision and recall") {
    std::vector<Entity> g = {gold("revenues", 1.0)};
    std::vector<PredictedEntity> p = {pred_of(g[0])};
    p[0].label = "earnings";
    Scorer s;
    s.add_document(g, p);
    CHECK(s.field_tally(EvalField::label).precision() == 0.0);
    CHECK(s.field_tally(EvalField::label).recall() == 0.0);
    CHECK(s.field_tally(EvalField::value).micro_f1() == 1.0);
    CHECK(s.entity_exact_match() == 0.0);
}

TEST_CASE("one label error in three pairs gives micro-F1 of two thirds") {
    std::vector<Entity> g = {gold("revenues", 1.0), gold("earnings", 2.0), gold("eps", 3.0)};
    std::vector<PredictedEntity> p;
    for (const auto& e : g) p.push_back(pred_of(e));
    p[2].label = "ebit";
    Scorer s;
    s.add_document(g, p);
    const Tally& t = s.field_tally(EvalField::label);
    CHECK(t.tp == 2);
    CHECK(t.fp == 1);
    CHECK(t.fn == 1);
    CHECK_THAT(t.micro_f1(), Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
}

TEST_CASE("macro-F1 averages gold labels only") {
    SECTION("one gold label, perfect") {
        std::vector<Entity> g = {gold("revenues", 1.0)};
        Scorer s;
        s.add_document(g, {pred_of(g[0])});
        CHECK(s.label_macro_f1() == 1.0);
    }
    SECTION("two gold labels, one fully missed") {
        std::vector<Entity> g = {gold("revenues", 1.0), gold("earnings", 2.0)};
        std::vector<PredictedEntity> p = {pred_of(g[0])};
        Scorer s;
        s.add_document(g, p);
        CHECK_THAT(s.label_macro_f1(), Catch::Matchers::WithinAbs(0.5, 1e-12));
    }
    SECTION("prediction-only labels contribute nothing") {
        std::vector<Entity> g = {gold("revenues", 1.0)};
        std::vector<PredictedEntity> p = {pred_of(g[0])};
        PredictedEntity stray;
        stray.label = "ebit";
        stray.value = 999.0;
        p.push_back(stray);
        Scorer s;
        s.add_document(g, p);
        auto f1s = s.gold_label_f1();
        CHECK(f1s.size() == 1);
        CHECK(f1s.count("revenues") == 1);
        CHECK(f1s.count("ebit") == 0);
        CHECK(s.label_macro_f1() == 1.0);
    }
}

TEST_CASE("missing predicted field is a false negative without a false positive") {
    std::vector<Entity> g = {gold("revenues", 1.0)};
    std::vector<PredictedEntity> p = {pred_of(g[0])};
    p[0].period_start.reset();
    Scorer s;
    s.add_document(g, p);
    const Tally& t = s.field_tally(EvalField::start_date);
    CHECK(t.tp == 0);
    CHECK(t.fn == 1);
    CHECK(t.fp == 0);
    CHECK(s.entity_exact_match() == 0.0);
}

TEST_CASE("entity exact match requires all five fields") {
    std::vector<Entity> g = {gold("revenues", 1.0), gold("earnings", 2.0)};
    std::vector<PredictedEntity> p = {pred_of(g[0]), pred_of(g[1])};
    p[0].unit = "EUR";  // one field wrong on one pair
    Scorer s;
    s.add_document(g, p);
    CHECK_THAT(s.entity_exact_match(), Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("cumulative macro-F1 curve") {
    SECTION("single label is a single point") {
        auto curve = cumulative_macro_f1({{"revenues", 0.8}}, {{"revenues", 7}});
        REQUIRE(curve.size() == 1);
        CHECK(curve[0].cumulative_support == 7);
        CHECK(curve[0].macro_f1 == 0.8);
    }
    SECTION("two labels accumulate support and average F1") {
        auto curve = cumulative_macro_f1({{"a", 1.0}, {"b", 0.0}}, {{"a", 10}, {"b", 5}});
        REQUIRE(curve.size() == 2);
        CHECK(curve[0].cumulative_support == 10);
        CHECK(curve[0].macro_f1 == 1.0);
        CHECK(curve[1].cumulative_support == 15);
        CHECK_THAT(curve[1].macro_f1, Catch::Matchers::WithinAbs(0.5, 1e-12));
    }
    SECTION("frequency ties order lexicographically") {
        auto curve = cumulative_macro_f1({{"b", 0.2}, {"a", 0.4}}, {{"a", 5}, {"b", 5}});
        REQUIRE(curve.size() == 2);
        CHECK(curve[0].label == "a");
        CHECK(curve[1].label == "b");
    }
}

TEST_CASE("scores are invariant under shuffling of either list") {
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<Entity> g;
        std::vector<PredictedEntity> p;
        size_t ng = 1 + g_rng() % 5, np = g_rng() % 5;
        for (size_t i = 0; i < ng; ++i) g.push_back(random_gold());
        for (size_t i = 0; i < np; ++i) p.push_back(random_pred());

        Scorer base;
        base.add_document(g, p);
        Json base_report = eval_report_json(base, true);

        auto gs = g;
        auto ps = p;
        std::shuffle(gs.begin(), gs.end(), g_rng);
        std::shuffle(ps.begin(), ps.end(), g_rng);
        Scorer shuffled;
        shuffled.add_document(gs, ps);
        CHECK(eval_report_json(shuffled, true).dump() == base_report.dump());
    }
}

TEST_CASE("all reported rates stay in the unit interval") {
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Entity> g;
        std::vector<PredictedEntity> p;
        size_t ng = g_rng() % 6, np = g_rng() % 6;
        for (size_t i = 0; i < ng; ++i) g.push_back(random_gold());
        for (size_t i = 0; i < np; ++i) p.push_back(random_pred());
        Scorer s;
        s.add_document(g, p);
        for (EvalField f : kEvalFields) {
            const Tally& t = s.field_tally(f);
            CHECK(t.precision() >= 0.0);
            CHECK(t.precision() <= 1.0);
            CHECK(t.recall() >= 0.0);
            CHECK(t.recall() <= 1.0);
            CHECK(t.micro_f1() >= 0.0);
            CHECK(t.micro_f1() <= 1.0);
            // every gold entity is accounted once per field
            CHECK(t.tp + t.fn == static_cast<std::int64_t>(ng));
        }
        CHECK(s.entity_exact_match() >= 0.0);
        CHECK(s.entity_exact_match() <= 1.0);
        CHECK(s.label_macro_f1() >= 0.0);
        CHECK(s.label_macro_f1() <= 1.0);
    }
}

TEST_CASE("greedy alignment versus exhaustive optimum") {
    // Greedy is the documented deterministic choice; its score can only ever
    // fall short of the optimum. Divergence is reported, not failed.
    int divergent = 0, total = 400;
    for (int trial = 0; trial < total; ++trial) {
        std::vector<Entity> g;
        std::vector<PredictedEntity> p;
        size_t ng = 1 + g_rng() % 6, np = 1 + g_rng() % 6;
        for (size_t i = 0; i < ng; ++i) g.push_back(random_gold());
        for (size_t i = 0; i < np; ++i) p.push_back(random_pred());
        int greedy = oracle::greedy_alignment_score(g, p);
        int optimal = oracle::optimal_alignment_score(g, p);
        CHECK(greedy <= optimal);
        if (greedy != optimal) ++divergent;
    }
    WARN("greedy/optimal alignment divergence: " << divergent << " of " << total << " instances");
}

TEST_CASE("scorers merge as a monoid") {
    std::vector<Entity> g1 = {gold("revenues", 1.0)}, g2 = {gold("earnings", 2.0), gold("eps", 3.0)};
    std::vector<PredictedEntity> p1 = {pred_of(g1[0])}, p2 = {pred_of(g2[0])};

    Scorer whole;
    whole.add_document(g1, p1);
    whole.add_document(g2, p2);

    Scorer left, right;
    left.add_document(g1, p1);
    right.add_document(g2, p2);
    left.merge(right);

    CHECK(eval_report_json(left, true).dump() == eval_report_json(whole, true).dump());
}

TEST_CASE("prediction records parse from the response schema") {
    Json j = Json::parse(R"({"entities":[{"label":"earnings","start_date_for_period":"2017-01-01",
        "end_date_for_period":"2017-09-30","currency_/_unit":"USD","value":-866000.0}]})");
    auto preds = predicted_entities_from_json(j);
    REQUIRE(preds.size() == 1);
    CHECK(preds[0].label == "earnings");
    CHECK(preds[0].period_start == Date{2017, 1, 1});
    CHECK(preds[0].value == -866000.0);

    // wrong date formats stay unset and therefore never match
    Json bad = Json::parse(R"({"entities":[{"label":"x","start_date_for_period":"01/01/2017"}]})");
    auto p2 = predicted_entities_from_json(bad);
    REQUIRE(p2.size() == 1);
    CHECK_FALSE(p2[0].period_start.has_value());
}
