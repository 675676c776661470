#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kpiforge/dates.hpp"
#include "kpiforge/jsonl.hpp"

namespace kpiforge {

// Sentinel for labels outside a chosen label set.
inline constexpr const char* kOosLabel = "OOS";

// One tagged numeric fact inside a paragraph. Character offsets are Unicode
// codepoint positions into the owning paragraph's normalized text.
struct Entity {
    std::int64_t start_char = 0;
    std::int64_t end_char = 0;
    std::string label;  // prefix:LocalName
    Date period_start;
    Date period_end;
    std::string unit;
    double value = 0.0;

    bool operator==(const Entity&) const = default;
};

// One dataset record: a narrative snippet plus its tagged entities.
struct Paragraph {
    std::string form_type;
    std::string accession_number;
    std::int64_t filing_date_ms = 0;
    std::string quarter_ending;  // YYYYMMDD
    std::string company_name;
    std::string text;
    std::vector<Entity> entities;

    bool operator==(const Paragraph&) const = default;
};

// Per-filing fields the extractor copies into every paragraph.
struct FilingMeta {
    std::string form_type;
    std::string accession_number;
    std::string company_name;
    std::string quarter_ending;  // empty = derive from the document
    std::int64_t filing_epoch_ms = 0;
};

inline bool valid_label(std::string_view label) {
    auto colon = label.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == label.size()) return false;
    return label.find(':', colon + 1) == std::string_view::npos;
}

inline Json entity_to_json(const Entity& e) {
    Json j = Json::object();
    j["Start character"] = e.start_char;
    j["End character"] = e.end_char;
    j["Label"] = e.label;
    j["Start date for period"] = e.period_start.iso();
    j["End date for period"] = e.period_end.iso();
    j["Currency / Unit"] = e.unit;
    j["Value"] = e.value;
    return j;
}

inline Json paragraph_to_json(const Paragraph& p) {
    Json j = Json::object();
    j["form_type"] = p.form_type;
    j["accession_number"] = p.accession_number;
    j["filing_date"] = p.filing_date_ms;
    j["quarter_ending"] = p.quarter_ending;
    j["company_name"] = p.company_name;
    j["text"] = p.text;
    Json ents = Json::array();
    for (const auto& e : p.entities) ents.push_back(entity_to_json(e));
    j["entities"] = std::move(ents);
    return j;
}

inline Entity entity_from_json(const Json& j) {
    Entity e;
    e.start_char = j.at("Start character").get<std::int64_t>();
    e.end_char = j.at("End character").get<std::int64_t>();
    e.label = j.at("Label").get<std::string>();
    e.period_start = require_date(j.at("Start date for period").get<std::string>(), "Start date for period");
    e.period_end = require_date(j.at("End date for period").get<std::string>(), "End date for period");
    e.unit = j.at("Currency / Unit").get<std::string>();
    e.value = j.at("Value").get<double>();
    return e;
}

inline Paragraph paragraph_from_json(const Json& j) {
    Paragraph p;
    p.form_type = j.at("form_type").get<std::string>();
    p.accession_number = j.at("accession_number").get<std::string>();
    p.filing_date_ms = j.at("filing_date").get<std::int64_t>();
    p.quarter_ending = j.at("quarter_ending").get<std::string>();
    p.company_name = j.at("company_name").get<std::string>();
    p.text = j.at("text").get<std::string>();
    for (const auto& ej : j.at("entities")) p.entities.push_back(entity_from_json(ej));
    return p;
}

inline std::vector<Paragraph> read_paragraphs(const std::filesystem::path& path) {
    std::vector<Paragraph> out;
    for_each_jsonl(path, [&](const Json& j) { out.push_back(paragraph_from_json(j)); });
    return out;
}

inline void write_paragraphs(const std::filesystem::path& path, const std::vector<Paragraph>& paragraphs) {
    JsonlWriter w(path);
    for (const auto& p : paragraphs) w.write(paragraph_to_json(p));
}

}  // namespace kpiforge
