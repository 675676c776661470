#pragma once

#include <cstdint>
#include <cstdlib>
#include <set>
#include <string>

#include "kpiforge/dataset.hpp"
#include "kpiforge/dates.hpp"
#include "kpiforge/errors.hpp"
#include "kpiforge/jsonl.hpp"
#include "kpiforge/linkbase.hpp"

namespace kpiforge {

// Pipeline-wide settings. Defaults match the published dataset window and
// cutoffs; the config file round-trips losslessly.
struct PipelineConfig {
    std::string store = "store";
    Date window_from{2017, 1, 1};
    Date window_to{2024, 6, 1};
    std::set<std::string> forms = {"10-K", "10-Q"};
    SplitCutoffs cutoffs;
    int collapse_level = 1;
    std::string taxonomy_kind = "presentation";
    double lite_threshold = 0.5;
    std::uint64_t seed = 20170101;
    std::string edgar_ident;
    double rate_limit_per_sec = 8.0;

    bool operator==(const PipelineConfig&) const = default;

    Json to_json() const {
        Json j = Json::object();
        j["store"] = store;
        j["window_from"] = window_from.iso();
        j["window_to"] = window_to.iso();
        Json f = Json::array();
        for (const auto& form : forms) f.push_back(form);
        j["forms"] = std::move(f);
        j["train_end"] = cutoffs.train_end.iso();
        j["dev_end"] = cutoffs.dev_end.iso();
        j["test_end"] = cutoffs.test_end.iso();
        j["collapse_level"] = collapse_level;
        j["taxonomy_kind"] = taxonomy_kind;
        j["lite_threshold"] = lite_threshold;
        j["seed"] = seed;
        j["edgar_ident"] = edgar_ident;
        j["rate_limit_per_sec"] = rate_limit_per_sec;
        return j;
    }

    static PipelineConfig from_json(const Json& j) {
        PipelineConfig c;
        try {
            if (j.contains("store")) c.store = j["store"].get<std::string>();
            if (j.contains("window_from")) c.window_from = require_date(j["window_from"].get<std::string>(), "window_from");
            if (j.contains("window_to")) c.window_to = require_date(j["window_to"].get<std::string>(), "window_to");
            if (j.contains("forms")) {
                c.forms.clear();
                for (const auto& f : j["forms"]) c.forms.insert(f.get<std::string>());
            }
            if (j.contains("train_end")) c.cutoffs.train_end = require_date(j["train_end"].get<std::string>(), "train_end");
            if (j.contains("dev_end")) c.cutoffs.dev_end = require_date(j["dev_end"].get<std::string>(), "dev_end");
            if (j.contains("test_end")) c.cutoffs.test_end = require_date(j["test_end"].get<std::string>(), "test_end");
            if (j.contains("collapse_level")) c.collapse_level = j["collapse_level"].get<int>();
            if (j.contains("taxonomy_kind")) c.taxonomy_kind = j["taxonomy_kind"].get<std::string>();
            if (j.contains("lite_threshold")) c.lite_threshold = j["lite_threshold"].get<double>();
            if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
            if (j.contains("edgar_ident")) c.edgar_ident = j["edgar_ident"].get<std::string>();
            if (j.contains("rate_limit_per_sec")) c.rate_limit_per_sec = j["rate_limit_per_sec"].get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("bad config value: ") + e.what());
        }
        c.validate();
        return c;
    }

    void validate() const {
        cutoffs.validate();
        if (window_to < window_from) throw ConfigError("window_to precedes window_from");
        if (collapse_level < 0) throw ConfigError("collapse_level must be >= 0");
        if (!(lite_threshold >= 0.0 && lite_threshold < 1.0))
            throw ConfigError("lite_threshold must be in [0, 1)");
        if (rate_limit_per_sec <= 0) throw ConfigError("rate_limit_per_sec must be positive");
        if (!parse_kind(taxonomy_kind)) throw ConfigError("taxonomy_kind must be pre or cal");
    }

    static PipelineConfig load(const std::filesystem::path& path) {
        Json j;
        try {
            j = Json::parse(slurp_file(path));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("unparseable config " + path.string() + ": " + e.what());
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        return from_json(j);
    }

    void save(const std::filesystem::path& path) const { write_file(path, to_json().dump(2) + "\n"); }

    // Environment overrides fill gaps only; explicit values win.
    void apply_env() {
        if (edgar_ident.empty()) {
            if (const char* v = std::getenv("EDGAR_IDENT")) edgar_ident = v;
        }
        if (const char* v = std::getenv("KPI_SEED")) {
            char* end = nullptr;
            std::uint64_t s = std::strtoull(v, &end, 10);
            if (end && *end == '\0') seed = s;
        }
    }
};

}  // namespace kpiforge
