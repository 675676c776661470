#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kpiforge/dates.hpp"
#include "kpiforge/records.hpp"

namespace fixtures {

inline std::filesystem::path dir() { return std::filesystem::path(KPIFORGE_FIXTURE_DIR); }

inline kpiforge::Paragraph make_paragraph(const std::string& accession, const std::string& company,
                                          kpiforge::Date filed, const std::string& text,
                                          const std::vector<kpiforge::Entity>& entities) {
    kpiforge::Paragraph p;
    p.form_type = "10-Q";
    p.accession_number = accession;
    p.filing_date_ms = filed.epoch_ms();
    p.quarter_ending = filed.compact();
    p.company_name = company;
    p.text = text;
    p.entities = entities;
    return p;
}

inline kpiforge::Entity make_entity(const std::string& label, double value,
                                    kpiforge::Date start = {2023, 1, 1}, kpiforge::Date end = {2023, 12, 31},
                                    const std::string& unit = "USD", std::int64_t begin = 0,
                                    std::int64_t finish = 1) {
    kpiforge::Entity e;
    e.start_char = begin;
    e.end_char = finish;
    e.label = label;
    e.period_start = start;
    e.period_end = end;
    e.unit = unit;
    e.value = value;
    return e;
}

}  // namespace fixtures
