#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "kpiforge/dataset.hpp"
#include "support/fixtures.hpp"

using namespace kpiforge;

namespace {

FilingKey filing(const std::string& acc, const std::string& company, Date d) {
    return FilingKey{acc, company, d};
}

Paragraph lite_paragraph(const std::vector<std::string>& labels) {
    std::vector<Entity> entities;
    std::int64_t pos = 0;
    for (const auto& l : labels) {
        entities.push_back(fixtures::make_entity(l, 1.0, {2023, 1, 1}, {2023, 12, 31}, "USD", pos, pos + 1));
        pos += 2;
    }
    return fixtures::make_paragraph("0000000000-24-000001", "X CORP", Date{2024, 1, 5},
                                    "Text for the lite filter.", entities);
}

}  // namespace

TEST_CASE("global cutoff sends old filings to train") {
    SplitCutoffs cutoffs;
    auto r = assign_splits({filing("a-1", "ACME", {2022, 3, 1})}, cutoffs, 1);
    CHECK(r.by_accession.at("a-1").split == Split::train);
    CHECK(r.by_accession.at("a-1").reason == SplitReason::global_cutoff);
}

TEST_CASE("new companies after the cutoff go entirely to test") {
    SplitCutoffs cutoffs;
    auto r = assign_splits({filing("n-1", "NEWCO", {2024, 1, 15}), filing("n-2", "NEWCO", {2024, 4, 2})},
                           cutoffs, 1);
    CHECK(r.by_accession.at("n-1").split == Split::test);
    CHECK(r.by_accession.at("n-1").reason == SplitReason::new_company);
    CHECK(r.by_accession.at("n-2").split == Split::test);
}

TEST_CASE("post-train filings divide 50/50 at a temporal boundary") {
    SplitCutoffs cutoffs;
    std::vector<FilingKey> filings = {
        filing("e-0", "ESTAB", {2022, 1, 10}),  // train
        filing("e-1", "ESTAB", {2023, 12, 1}),
        filing("e-2", "ESTAB", {2024, 2, 1}),
        filing("e-3", "ESTAB", {2024, 4, 1}),
        filing("e-4", "ESTAB", {2024, 5, 20}),
    };
    auto r = assign_splits(filings, cutoffs, 1);
    CHECK(r.by_accession.at("e-0").split == Split::train);
    CHECK(r.by_accession.at("e-1").split == Split::dev);
    CHECK(r.by_accession.at("e-2").split == Split::dev);
    CHECK(r.by_accession.at("e-3").split == Split::test);
    CHECK(r.by_accession.at("e-4").split == Split::test);
    for (const char* acc : {"e-1", "e-2", "e-3", "e-4"})
        CHECK(r.by_accession.at(acc).reason == SplitReason::company_cutoff);
}

TEST_CASE("odd post-train counts put the extra filing in dev") {
    SplitCutoffs cutoffs;
    auto r = assign_splits({filing("o-0", "ODD", {2022, 1, 10}), filing("o-1", "ODD", {2023, 12, 1}),
                            filing("o-2", "ODD", {2024, 2, 1}), filing("o-3", "ODD", {2024, 4, 1})},
                           cutoffs, 1);
    int dev = 0, test = 0;
    for (const char* acc : {"o-1", "o-2", "o-3"}) {
        if (r.by_accession.at(acc).split == Split::dev) ++dev;
        if (r.by_accession.at(acc).split == Split::test) ++test;
    }
    CHECK(dev == 2);
    CHECK(test == 1);
}

TEST_CASE("equal dates never straddle the dev/test boundary") {
    SplitCutoffs cutoffs;
    auto r = assign_splits({filing("s-0", "SAME", {2022, 1, 10}), filing("s-1", "SAME", {2024, 2, 1}),
                            filing("s-2", "SAME", {2024, 2, 1}), filing("s-3", "SAME", {2024, 2, 1})},
                           cutoffs, 1);
    auto s1 = r.by_accession.at("s-1").split;
    CHECK(r.by_accession.at("s-2").split == s1);
    CHECK(r.by_accession.at("s-3").split == s1);
}

TEST_CASE("per-company dev dates strictly precede test dates") {
    SplitCutoffs cutoffs;
    std::vector<FilingKey> filings;
    std::mt19937_64 rng(5);
    for (int c = 0; c < 20; ++c) {
        std::string company = "CO" + std::to_string(c);
        filings.push_back(filing(company + "-t", company, {2021 + c % 2, 3, 1}));
        int extra = 1 + static_cast<int>(rng() % 5);
        for (int i = 0; i < extra; ++i) {
            Date d{2023 + (i > 0 ? 1 : 0), i > 0 ? 1 + static_cast<int>(rng() % 5) : 11 + static_cast<int>(rng() % 2),
                   1 + static_cast<int>(rng() % 28)};
            filings.push_back(filing(company + "-p" + std::to_string(i), company, d));
        }
    }
    auto r = assign_splits(filings, cutoffs, 42);
    std::map<std::string, Date> max_dev;
    std::map<std::string, Date> min_test;
    for (const auto& f : filings) {
        auto it = r.by_accession.find(f.accession);
        if (it == r.by_accession.end()) continue;
        if (it->second.split == Split::dev) {
            if (!max_dev.count(f.company) || max_dev[f.company] < f.filing_date)
                max_dev[f.company] = f.filing_date;
        } else if (it->second.split == Split::test &&
                   it->second.reason == SplitReason::company_cutoff) {
            if (!min_test.count(f.company) || f.filing_date < min_test[f.company])
                min_test[f.company] = f.filing_date;
        }
    }
    for (const auto& [company, dmax] : max_dev) {
        if (min_test.count(company)) CHECK(dmax < min_test.at(company));
    }
}

TEST_CASE("identical input and seed reproduce identical assignments") {
    SplitCutoffs cutoffs;
    std::vector<FilingKey> filings = {
        filing("x-0", "XC", {2022, 5, 1}), filing("x-1", "XC", {2024, 1, 9}),  // single post-train
        filing("y-0", "YC", {2022, 5, 1}), filing("y-1", "YC", {2024, 2, 2}),
    };
    auto first = assign_splits(filings, cutoffs, 777);
    for (int i = 0; i < 5; ++i) {
        auto again = assign_splits(filings, cutoffs, 777);
        REQUIRE(again.by_accession.size() == first.by_accession.size());
        for (const auto& [acc, a] : first.by_accession) {
            CHECK(again.by_accession.at(acc).split == a.split);
            CHECK(again.by_accession.at(acc).reason == a.reason);
        }
    }
    // a different seed may move single-filing companies
    bool seed_dependent = false;
    for (std::uint64_t seed = 0; seed < 64 && !seed_dependent; ++seed) {
        auto other = assign_splits(filings, cutoffs, seed);
        if (other.by_accession.at("x-1").split != first.by_accession.at("x-1").split)
            seed_dependent = true;
    }
    CHECK(seed_dependent);
}

TEST_CASE("filings after the collection end are excluded with a diagnostic") {
    SplitCutoffs cutoffs;
    auto r = assign_splits({filing("z-0", "ZC", {2022, 1, 1}), filing("z-late", "ZC", {2024, 7, 1})},
                           cutoffs, 1);
    CHECK(r.by_accession.count("z-late") == 0);
    REQUIRE(r.excluded.size() == 1);
    CHECK(r.excluded[0] == "z-late");
}

TEST_CASE("cutoffs must be strictly increasing") {
    SplitCutoffs bad;
    bad.dev_end = bad.train_end;
    CHECK_THROWS_AS(assign_splits({}, bad, 1), ConfigError);
}

TEST_CASE("reconstruction: every filing is assigned exactly once or excluded") {
    SplitCutoffs cutoffs;
    std::vector<FilingKey> filings;
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        Date d{2020 + static_cast<int>(rng() % 5), 1 + static_cast<int>(rng() % 12),
               1 + static_cast<int>(rng() % 28)};
        filings.push_back(filing("f-" + std::to_string(i), "C" + std::to_string(rng() % 12), d));
    }
    auto r = assign_splits(filings, cutoffs, 3);
    CHECK(r.by_accession.size() + r.excluded.size() == filings.size());
}

TEST_CASE("lite filter keeps only strictly-majority-mapped paragraphs") {
    LiteMapping mapping = LiteMapping::default_mapping();

    SECTION("all entities mapped") {
        auto out = build_lite_paragraph(
            lite_paragraph({"us-gaap:Revenues", "us-gaap:Revenues", "us-gaap:Revenues"}), mapping);
        REQUIRE(out.has_value());
        for (const auto& e : out->entities) CHECK(e.label == "revenues");
    }
    SECTION("exactly 50% mapped is dropped") {
        auto out = build_lite_paragraph(
            lite_paragraph({"us-gaap:Revenues", "zz:A", "us-gaap:NetIncomeLoss", "zz:B"}), mapping);
        CHECK_FALSE(out.has_value());
    }
    SECTION("two of three mapped is kept, third gets the sentinel") {
        auto out = build_lite_paragraph(
            lite_paragraph({"us-gaap:Revenues", "us-gaap:OperatingIncomeLoss", "zz:A"}), mapping);
        REQUIRE(out.has_value());
        CHECK(out->entities[0].label == "revenues");
        CHECK(out->entities[1].label == "ebit");
        CHECK(out->entities[2].label == "XBRL-OOS");
    }
    SECTION("raising the threshold never adds paragraphs") {
        std::vector<Paragraph> corpus;
        corpus.push_back(lite_paragraph({"us-gaap:Revenues"}));
        corpus.push_back(lite_paragraph({"us-gaap:Revenues", "zz:A"}));
        corpus.push_back(lite_paragraph({"us-gaap:Revenues", "us-gaap:NetIncomeLoss", "zz:A"}));
        size_t prev = corpus.size() + 1;
        for (double t : {0.0, 0.25, 0.5, 0.75, 0.9}) {
            size_t n = build_lite(corpus, mapping, t).size();
            CHECK(n <= prev);
            prev = n;
        }
    }
}

TEST_CASE("default lite mapping matches the published table") {
    LiteMapping m = LiteMapping::default_mapping();
    CHECK(m.entries.size() == 35);
    CHECK(m.entries.at("us-gaap:Revenues") == LiteCategory::revenues);
    CHECK(m.entries.at("us-gaap:OperatingIncomeLoss") == LiteCategory::ebit);
    CHECK(m.entries.at("us-gaap:NetIncomeLoss") == LiteCategory::earnings);
    CHECK(m.entries.at("us-gaap:EarningsPerShareBasic") == LiteCategory::eps);
    int per_cat[4] = {0, 0, 0, 0};
    for (const auto& [tag, cat] : m.entries) per_cat[static_cast<int>(cat)]++;
    CHECK(per_cat[static_cast<int>(LiteCategory::revenues)] == 9);
    CHECK(per_cat[static_cast<int>(LiteCategory::earnings)] == 6);
    CHECK(per_cat[static_cast<int>(LiteCategory::eps)] == 19);
    CHECK(per_cat[static_cast<int>(LiteCategory::ebit)] == 1);
}

TEST_CASE("lite mapping round trips through its table file") {
    namespace fs = std::filesystem;
    fs::path tmp = fs::temp_directory_path() / "kpiforge_lite_mapping_test.jsonl";
    LiteMapping::default_mapping().save(tmp);
    LiteMapping loaded = LiteMapping::load(tmp);
    CHECK(loaded.entries == LiteMapping::default_mapping().entries);
    fs::remove(tmp);
}

TEST_CASE("shipped lite mapping table matches the built-in default") {
    LiteMapping shipped = LiteMapping::load(std::filesystem::path(KPIFORGE_DATA_DIR) / "lite_mapping.jsonl");
    CHECK(shipped.entries == LiteMapping::default_mapping().entries);
}

TEST_CASE("classification label is the first entity's label") {
    Paragraph p = fixtures::make_paragraph(
        "0000000000-24-000001", "X CORP", Date{2024, 1, 5}, "Some text.",
        {fixtures::make_entity("us-gaap:NetIncomeLoss", 2.0, {2023, 1, 1}, {2023, 12, 31}, "USD", 10, 12),
         fixtures::make_entity("us-gaap:Revenues", 1.0, {2023, 1, 1}, {2023, 12, 31}, "USD", 2, 5)});
    Json rec = classification_record(p);
    CHECK(rec["label"] == "us-gaap:Revenues");  // minimal start_char wins
    CHECK(rec["text"] == "Some text.");
}

TEST_CASE("sequence labels outside the top-k table become OOS") {
    std::vector<Paragraph> train;
    for (int i = 0; i < 5; ++i)
        train.push_back(lite_paragraph({"us-gaap:Revenues", "us-gaap:Revenues", "us-gaap:NetIncomeLoss"}));
    train.push_back(lite_paragraph({"rare:Tag"}));

    auto freq = label_frequencies(train);
    CHECK(freq.at("us-gaap:Revenues") == 10);
    CHECK(freq.at("rare:Tag") == 1);

    SECTION("rare tag beyond the cut is out of scope") {
        auto keep = top_k_labels(freq, 2);
        CHECK(keep.count("us-gaap:Revenues") == 1);
        CHECK(keep.count("rare:Tag") == 0);
        Json rec = sequence_record(lite_paragraph({"rare:Tag", "us-gaap:Revenues"}), keep);
        CHECK(rec["spans"][0]["label"] == "OOS");
        CHECK(rec["spans"][1]["label"] == "us-gaap:Revenues");
        CHECK(rec["spans"][0]["start"] == 0);
        CHECK(rec["spans"][0]["end"] == 1);
    }
    SECTION("unbounded top-k leaves every label in scope") {
        auto keep = top_k_labels(freq, static_cast<std::int64_t>(freq.size()));
        Json rec = sequence_record(lite_paragraph({"rare:Tag"}), keep);
        CHECK(rec["spans"][0]["label"] == "rare:Tag");
    }
}

TEST_CASE("corpus statistics identities") {
    SECTION("single paragraph example") {
        Paragraph p = fixtures::make_paragraph("a", "X", Date{2024, 1, 5},
                                               "one two three four five six seven eight nine ten",
                                               {fixtures::make_entity("t:a", 1.0), fixtures::make_entity("t:b", 2.0)});
        CorpusStats s = compute_stats({p});
        CHECK(s.avg_words == 10.0);
        CHECK(s.avg_tags == 2.0);
        CHECK(s.words_per_tag == 5.0);
    }
    SECTION("identities hold on arbitrary corpora") {
        std::mt19937_64 rng(31);
        std::vector<Paragraph> corpus;
        for (int i = 0; i < 50; ++i) {
            std::string text;
            int words = 1 + static_cast<int>(rng() % 30);
            for (int w = 0; w < words; ++w) text += (w ? " w" : "w") + std::to_string(w);
            std::vector<Entity> ents;
            int n = 1 + static_cast<int>(rng() % 4);
            for (int e = 0; e < n; ++e) ents.push_back(fixtures::make_entity("t:x", e));
            corpus.push_back(fixtures::make_paragraph("a" + std::to_string(i), "X", Date{2024, 1, 5},
                                                      text, ents));
        }
        CorpusStats s = compute_stats(corpus);
        CHECK(std::abs(s.avg_tags * static_cast<double>(s.n_paragraphs) -
                       static_cast<double>(s.n_entities)) < 1e-9);
        CHECK(std::abs(s.words_per_tag - s.avg_words / s.avg_tags) < 1e-9);
    }
    SECTION("empty corpus is all zeros") {
        CorpusStats s = compute_stats({});
        CHECK(s.n_paragraphs == 0);
        CHECK(s.avg_words == 0.0);
        CHECK(s.words_per_tag == 0.0);
    }
}
