// kpi-forge: pipeline driver for extracting tagged financial facts from SEC
// iXBRL filings, building and collapsing label taxonomies, assembling
// datasets, and scoring structured-extraction predictions.
//
// Every stage reads and writes files, so any step can be re-run in
// isolation; identical inputs always reproduce identical artifacts.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kpiforge/config.hpp"
#include "kpiforge/dataset.hpp"
#include "kpiforge/edgar.hpp"
#include "kpiforge/errors.hpp"
#include "kpiforge/evalkit.hpp"
#include "kpiforge/granularity.hpp"
#include "kpiforge/ixbrl.hpp"
#include "kpiforge/linkbase.hpp"
#include "kpiforge/records.hpp"
#include "kpiforge/taxonomy.hpp"

namespace fs = std::filesystem;
using namespace kpiforge;

namespace {

void require_input(const std::string& stage, const fs::path& path) {
    if (!fs::exists(path)) throw MissingArtifactError(stage, path.string());
}

void emit_error_record(const std::string& kind, const std::string& message, const std::string& stage = {},
                       const std::string& path = {}) {
    Json err = Json::object();
    err["error"] = kind;
    err["message"] = message;
    if (!stage.empty()) err["stage"] = stage;
    if (!path.empty()) err["path"] = path;
    std::cerr << err.dump() << '\n';
}

// --- fetch -----------------------------------------------------------------

int cmd_fetch(const PipelineConfig& cfg, const std::string& base_url) {
    EdgarConfig ec;
    ec.base_url = base_url.empty() ? "https://www.sec.gov" : base_url;
    ec.ident = cfg.edgar_ident;
    ec.requests_per_sec = cfg.rate_limit_per_sec;
    EdgarClient client(ec);

    std::vector<IndexWarning> warnings;
    std::vector<FilingRef> refs = client.list_filings(cfg.window_from, cfg.window_to, cfg.forms, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w.source << ": " << w.message << '\n';

    int fetched = 0, skipped = 0, failures = 0;
    for (const auto& ref : refs) {
        try {
            FilingBundle bundle = client.fetch_filing(ref, cfg.store);
            if (bundle.downloads_performed == 0) ++skipped;
            else ++fetched;
        } catch (const FetchError& e) {
            std::cerr << "warning: " << ref.accession_number << ": " << e.what() << '\n';
            ++failures;
        }
    }
    std::printf("fetch: %zu filings listed, %d fetched, %d already present, %d failed\n", refs.size(),
                fetched, skipped, failures);
    return failures == 0 ? 0 : 1;
}

// --- extract ----------------------------------------------------------------

int cmd_extract(const fs::path& store, const fs::path& out, const fs::path& diagnostics_path) {
    require_input("extract", store);
    std::vector<StoredFiling> filings = scan_store(store);
    if (filings.empty()) throw MissingArtifactError("extract", store.string() + " (no fetched filings)");

    JsonlWriter writer(out);
    DocDiagnostics totals;
    Json per_doc = Json::array();
    for (const auto& filing : filings) {
        fs::path primary = filing.dir / "primary.htm";
        if (!fs::exists(primary)) continue;
        DocDiagnostics diag;
        std::string bytes = slurp_file(primary);
        std::vector<Paragraph> paragraphs = parse_document(bytes, filing.meta, &diag);
        for (const auto& p : paragraphs) writer.write(paragraph_to_json(p));
        totals.merge(diag);

        Json dj = Json::object();
        dj["accession_number"] = filing.meta.accession_number;
        dj["facts_total"] = diag.facts_total;
        dj["facts_emitted"] = diag.facts_emitted;
        Json dropped = Json::object();
        for (const auto& [reason, n] : diag.dropped) dropped[reason] = n;
        dj["dropped"] = std::move(dropped);
        dj["paragraphs"] = diag.paragraphs_emitted;
        per_doc.push_back(std::move(dj));
    }

    if (!diagnostics_path.empty()) {
        Json report = Json::object();
        report["documents"] = std::move(per_doc);
        Json t = Json::object();
        t["facts_total"] = totals.facts_total;
        t["facts_emitted"] = totals.facts_emitted;
        Json dropped = Json::object();
        for (const auto& [reason, n] : totals.dropped) dropped[reason] = n;
        t["dropped"] = std::move(dropped);
        t["paragraphs"] = totals.paragraphs_emitted;
        report["totals"] = std::move(t);
        write_file(diagnostics_path, report.dump(2) + "\n");
    }
    std::printf("extract: %lld paragraphs, %lld entities (of %lld facts)\n",
                static_cast<long long>(totals.paragraphs_emitted),
                static_cast<long long>(totals.facts_emitted),
                static_cast<long long>(totals.facts_total));
    return 0;
}

// --- linkbase ---------------------------------------------------------------

int cmd_linkbase(const fs::path& store, const std::string& kind_str, const fs::path& out) {
    require_input("linkbase", store);
    LinkKind kind = require_kind(kind_str);
    std::vector<StoredFiling> filings = scan_store(store);
    if (filings.empty()) throw MissingArtifactError("linkbase", store.string() + " (no fetched filings)");

    JsonlWriter writer(out);
    LinkbaseDiagnostics diag;
    std::int64_t edges_total = 0;
    for (const auto& filing : filings) {
        fs::path file = filing.dir / (kind == LinkKind::calculation ? "cal.xml" : "pre.xml");
        if (!fs::exists(file)) continue;
        std::string bytes = slurp_file(file);
        for (const auto& edge : parse_linkbase(bytes, kind, &diag)) {
            EdgeRecord rec{edge.parent, edge.child, kind, filing.meta.accession_number};
            writer.write(edge_record_to_json(rec));
            ++edges_total;
        }
    }
    std::printf("linkbase: %lld edges (%lld self-loops dropped, %lld unresolved locators)\n",
                static_cast<long long>(edges_total), static_cast<long long>(diag.self_loops),
                static_cast<long long>(diag.unresolved_locators));
    return 0;
}

// --- taxonomy ---------------------------------------------------------------

int cmd_taxonomy(const fs::path& edges_path, const std::string& kind_str, const fs::path& out,
                 const std::string& per_company_cik, const fs::path& cik_map_path) {
    require_input("taxonomy", edges_path);
    LinkKind kind = require_kind(kind_str);
    std::vector<EdgeRecord> records = read_edge_records(edges_path);

    if (!per_company_cik.empty()) {
        std::map<std::string, std::string> acc2cik;
        if (!cik_map_path.empty()) {
            require_input("taxonomy", cik_map_path);
            for_each_jsonl(cik_map_path, [&](const Json& j) {
                acc2cik[j.at("accession").get<std::string>()] = pad_cik(j.at("cik").get<std::string>());
            });
        } else {
            // Default: the accession prefix is the filer id.
            for (const auto& r : records)
                if (valid_accession(r.accession)) acc2cik[r.accession] = r.accession.substr(0, 10);
        }
        records = edges_for_company(records, acc2cik, pad_cik(per_company_cik));
    }

    MasterTaxonomy tax = build_master(records, kind);
    write_master(out, tax);
    std::printf("taxonomy: %zu tags, %zu roots\n", tax.size(), tax.roots.size());
    return 0;
}

// --- collapse / remap -------------------------------------------------------

int cmd_collapse(const fs::path& taxonomy_path, int level, const fs::path& out) {
    require_input("collapse", taxonomy_path);
    MasterTaxonomy tax = read_master(taxonomy_path);
    CollapseMap cmap = collapse(tax, level);
    write_collapse_map(out, cmap);
    std::printf("collapse: level %d, %lld distinct labels\n", level,
                static_cast<long long>(cmap.image_size()));
    return 0;
}

int cmd_remap(const fs::path& data_path, const fs::path& cmap_path, const fs::path& out,
              const std::string& oos) {
    require_input("remap", data_path);
    require_input("remap", cmap_path);
    OosPolicy policy = oos == "oos" ? OosPolicy::map_to_oos : OosPolicy::keep;
    CollapseMap cmap = read_collapse_map(cmap_path);

    JsonlWriter writer(out);
    std::int64_t n = 0;
    for_each_jsonl(data_path, [&](const Json& j) {
        Paragraph p = remap_paragraph(paragraph_from_json(j), cmap, policy);
        writer.write(paragraph_to_json(p));
        ++n;
    });
    std::printf("remap: %lld paragraphs\n", static_cast<long long>(n));
    return 0;
}

// --- split -------------------------------------------------------------------

int cmd_split(const fs::path& data_path, const fs::path& out_dir, const PipelineConfig& cfg) {
    require_input("split", data_path);
    std::vector<Paragraph> paragraphs = read_paragraphs(data_path);
    SplitResult result = assign_splits(filing_keys(paragraphs), cfg.cutoffs, cfg.seed);

    fs::create_directories(out_dir);
    JsonlWriter train(out_dir / "train.jsonl"), dev(out_dir / "dev.jsonl"), test(out_dir / "test.jsonl");
    std::int64_t counts[3] = {0, 0, 0};
    std::set<std::string> excluded(result.excluded.begin(), result.excluded.end());
    for (const auto& p : paragraphs) {
        if (excluded.count(p.accession_number)) continue;
        const SplitAssignment& a = result.by_accession.at(p.accession_number);
        Json j = paragraph_to_json(p);
        switch (a.split) {
            case Split::train: train.write(j); break;
            case Split::dev: dev.write(j); break;
            case Split::test: test.write(j); break;
        }
        counts[static_cast<int>(a.split)]++;
    }

    JsonlWriter assignments(out_dir / "assignments.jsonl");
    for (const auto& [acc, a] : result.by_accession) {
        Json j = Json::object();
        j["accession_number"] = acc;
        j["split"] = std::string(split_name(a.split));
        j["reason"] = std::string(split_reason_name(a.reason));
        assignments.write(j);
    }
    JsonlWriter excluded_out(out_dir / "excluded.jsonl");
    for (const auto& acc : result.excluded) {
        Json j = Json::object();
        j["accession_number"] = acc;
        j["reason"] = "after_test_end";
        excluded_out.write(j);
    }

    // company overlap between dev and test, a sanity signal for the
    // per-company cutoff scheme
    std::map<std::string, std::string> company_of;
    for (const auto& p : paragraphs) company_of[p.accession_number] = p.company_name;
    std::set<std::string> dev_companies, test_companies;
    for (const auto& [acc, a] : result.by_accession) {
        if (a.split == Split::dev) dev_companies.insert(company_of[acc]);
        if (a.split == Split::test) test_companies.insert(company_of[acc]);
    }
    std::int64_t shared = 0;
    for (const auto& c : dev_companies)
        if (test_companies.count(c)) ++shared;
    double overlap = dev_companies.empty()
                         ? 0.0
                         : 100.0 * static_cast<double>(shared) / static_cast<double>(dev_companies.size());

    std::printf("split: train %lld / dev %lld / test %lld paragraphs, %zu filings excluded\n",
                static_cast<long long>(counts[0]), static_cast<long long>(counts[1]),
                static_cast<long long>(counts[2]), result.excluded.size());
    std::printf("split: %.2f%% of dev-set companies also appear in the test set\n", overlap);
    return 0;
}

// --- lite ---------------------------------------------------------------------

int cmd_lite(const fs::path& data_path, const fs::path& out, const fs::path& mapping_path,
             double threshold, const fs::path& dump_mapping) {
    if (!dump_mapping.empty()) {
        LiteMapping::default_mapping().save(dump_mapping);
        std::printf("lite: wrote default mapping to %s\n", dump_mapping.string().c_str());
        if (data_path.empty()) return 0;
    }
    require_input("lite", data_path);
    LiteMapping mapping =
        mapping_path.empty() ? LiteMapping::default_mapping() : LiteMapping::load(mapping_path);
    if (mapping.entries.empty()) throw ConfigError("lite mapping is empty");

    JsonlWriter writer(out);
    std::int64_t kept = 0, seen = 0;
    for_each_jsonl(data_path, [&](const Json& j) {
        ++seen;
        if (auto lp = build_lite_paragraph(paragraph_from_json(j), mapping, threshold)) {
            writer.write(paragraph_to_json(*lp));
            ++kept;
        }
    });
    std::printf("lite: kept %lld of %lld paragraphs\n", static_cast<long long>(kept),
                static_cast<long long>(seen));
    return 0;
}

// --- tasks ---------------------------------------------------------------------

int cmd_tasks(const std::string& task, const fs::path& data_path, const fs::path& train_path,
              std::int64_t top_k, const fs::path& out) {
    require_input("tasks", data_path);
    JsonlWriter writer(out);
    std::int64_t n = 0;

    if (task == "classification") {
        for_each_jsonl(data_path, [&](const Json& j) {
            writer.write(classification_record(paragraph_from_json(j)));
            ++n;
        });
    } else if (task == "sequence") {
        fs::path freq_source = train_path.empty() ? data_path : train_path;
        require_input("tasks", freq_source);
        std::vector<Paragraph> train = read_paragraphs(freq_source);
        std::set<std::string> keep = top_k_labels(label_frequencies(train), top_k);
        for_each_jsonl(data_path, [&](const Json& j) {
            writer.write(sequence_record(paragraph_from_json(j), keep));
            ++n;
        });
    } else {
        throw ConfigError("unknown task '" + task + "' (classification or sequence)");
    }
    std::printf("tasks: %lld %s records\n", static_cast<long long>(n), task.c_str());
    return 0;
}

// --- stats ----------------------------------------------------------------------

int cmd_stats(const std::vector<std::string>& data_paths, const fs::path& out) {
    Json report = Json::object();
    for (const auto& path_str : data_paths) {
        fs::path path(path_str);
        require_input("stats", path);
        CorpusStats s = compute_stats(read_paragraphs(path));
        report[path.stem().string()] = stats_to_json(s);
    }
    std::string dumped = report.dump(2) + "\n";
    if (out.empty()) std::fputs(dumped.c_str(), stdout);
    else write_file(out, dumped);
    return 0;
}

// --- eval -----------------------------------------------------------------------

int cmd_eval(const fs::path& gold_path, const fs::path& pred_path, const fs::path& report_path,
             bool per_label) {
    require_input("eval", gold_path);
    require_input("eval", pred_path);

    std::vector<std::vector<Entity>> gold;
    for_each_jsonl(gold_path, [&](const Json& j) { gold.push_back(paragraph_from_json(j).entities); });
    std::vector<std::vector<PredictedEntity>> pred;
    for_each_jsonl(pred_path, [&](const Json& j) { pred.push_back(predicted_entities_from_json(j)); });
    if (gold.size() != pred.size())
        throw ConfigError("gold has " + std::to_string(gold.size()) + " records but predictions have " +
                          std::to_string(pred.size()));

    Scorer scorer;
    for (size_t i = 0; i < gold.size(); ++i) scorer.add_document(gold[i], pred[i]);

    Json report = eval_report_json(scorer, per_label);
    std::string dumped = report.dump(2) + "\n";
    if (report_path.empty()) std::fputs(dumped.c_str(), stdout);
    else write_file(report_path, dumped);

    std::printf("eval: %lld gold entities, EM %.4f, label macro-F1 %.4f\n",
                static_cast<long long>(scorer.gold_total()), scorer.entity_exact_match(),
                scorer.label_macro_f1());
    return 0;
}

// --- treemap ----------------------------------------------------------------------

int cmd_treemap(const fs::path& taxonomy_path, const fs::path& data_path, std::int64_t top_k,
                const fs::path& out) {
    require_input("treemap", taxonomy_path);
    require_input("treemap", data_path);
    MasterTaxonomy tax = read_master(taxonomy_path);
    std::map<std::string, std::int64_t> freq = label_frequencies(read_paragraphs(data_path));
    Json forest = treemap_export(tax, freq, top_k);
    write_file(out, forest.dump(2) + "\n");
    std::printf("treemap: %zu top-level nodes\n", forest.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kpi-forge: iXBRL fact extraction, taxonomy collapse, dataset assembly, and "
                 "structured-extraction scoring"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags override it)");

    // fetch
    auto* fetch = app.add_subcommand("fetch", "Download filing indices and documents from EDGAR");
    std::string fetch_from, fetch_to, fetch_forms = "10-K,10-Q", fetch_store, fetch_ident, fetch_base;
    double fetch_rate = 0;
    fetch->add_option("--from", fetch_from, "Start date YYYY-MM-DD");
    fetch->add_option("--to", fetch_to, "End date YYYY-MM-DD");
    fetch->add_option("--forms", fetch_forms, "Comma-separated form types");
    fetch->add_option("--store", fetch_store, "Local store directory");
    fetch->add_option("--ident", fetch_ident, "Identification header (or env EDGAR_IDENT)");
    fetch->add_option("--base-url", fetch_base, "Override the EDGAR base url");
    fetch->add_option("--rate", fetch_rate, "Requests per second");

    // extract
    auto* extract = app.add_subcommand("extract", "Parse stored iXBRL filings into dataset records");
    std::string ex_store, ex_out, ex_diag;
    extract->add_option("--store", ex_store, "Local store directory")->required();
    extract->add_option("--out", ex_out, "Output JSONL")->required();
    extract->add_option("--diagnostics", ex_diag, "Diagnostics JSON report");

    // linkbase
    auto* linkbase = app.add_subcommand("linkbase", "Parse linkbase attachments into edge lists");
    std::string lb_store, lb_kind, lb_out;
    linkbase->add_option("--store", lb_store, "Local store directory")->required();
    linkbase->add_option("--kind", lb_kind, "pre or cal")->required();
    linkbase->add_option("--out", lb_out, "Output edges JSONL")->required();

    // taxonomy
    auto* taxonomy = app.add_subcommand("taxonomy", "Aggregate edges into a master taxonomy");
    std::string tx_edges, tx_kind, tx_out, tx_cik, tx_cik_map;
    taxonomy->add_option("--edges", tx_edges, "Edges JSONL")->required();
    taxonomy->add_option("--kind", tx_kind, "pre or cal")->required();
    taxonomy->add_option("--out", tx_out, "Output taxonomy JSONL")->required();
    taxonomy->add_option("--per-company", tx_cik, "Restrict to one company's filings (CIK)");
    taxonomy->add_option("--cik-map", tx_cik_map, "JSONL {accession, cik} mapping");

    // collapse
    auto* collapse_cmd = app.add_subcommand("collapse", "Build a label map at granularity level N");
    std::string cl_tax, cl_out;
    int cl_level = 0;
    collapse_cmd->add_option("--taxonomy", cl_tax, "Master taxonomy JSONL")->required();
    collapse_cmd->add_option("--level", cl_level, "Collapse iterations")->required();
    collapse_cmd->add_option("--out", cl_out, "Output collapse map JSONL")->required();

    // remap
    auto* remap = app.add_subcommand("remap", "Rewrite dataset labels through a collapse map");
    std::string rm_data, rm_cmap, rm_out, rm_oos = "keep";
    remap->add_option("--data", rm_data, "Input dataset JSONL")->required();
    remap->add_option("--cmap", rm_cmap, "Collapse map JSONL")->required();
    remap->add_option("--out", rm_out, "Output JSONL")->required();
    remap->add_option("--oos", rm_oos, "Labels outside the taxonomy: keep|oos");

    // split
    auto* split_cmd = app.add_subcommand("split", "Assign filings to train/dev/test");
    std::string sp_data, sp_out_dir, sp_train_end, sp_dev_end, sp_test_end;
    std::uint64_t sp_seed = 0;
    bool sp_seed_set = false;
    split_cmd->add_option("--data", sp_data, "Input dataset JSONL")->required();
    split_cmd->add_option("--out-dir", sp_out_dir, "Output directory")->required();
    split_cmd->add_option("--train-end", sp_train_end, "Train cutoff date");
    split_cmd->add_option("--dev-end", sp_dev_end, "Dev cutoff date");
    split_cmd->add_option("--test-end", sp_test_end, "Collection end date");
    split_cmd->add_option("--seed", sp_seed, "Random seed for single-filing companies")
        ->each([&](const std::string&) { sp_seed_set = true; });

    // lite
    auto* lite = app.add_subcommand("lite", "Filter to the expert-mapped subset");
    std::string lt_data, lt_out, lt_mapping, lt_dump;
    double lt_threshold = 0.5;
    lite->add_option("--data", lt_data, "Input dataset JSONL");
    lite->add_option("--out", lt_out, "Output JSONL");
    lite->add_option("--mapping", lt_mapping, "Mapping table JSONL (default: built-in)");
    lite->add_option("--threshold", lt_threshold, "Minimum mapped-entity fraction (strict)");
    lite->add_option("--dump-mapping", lt_dump, "Write the built-in mapping table and exit");

    // tasks
    auto* tasks = app.add_subcommand("tasks", "Prepare task-specific label files");
    std::string tk_task, tk_data, tk_train, tk_out;
    std::int64_t tk_top_k = 1000;
    tasks->add_option("--task", tk_task, "classification or sequence")->required();
    tasks->add_option("--data", tk_data, "Input dataset JSONL")->required();
    tasks->add_option("--train", tk_train, "Train split for the top-k table (sequence)");
    tasks->add_option("--top-k", tk_top_k, "Label vocabulary size for sequence labeling");
    tasks->add_option("--out", tk_out, "Output JSONL")->required();

    // stats
    auto* stats = app.add_subcommand("stats", "Corpus statistics per dataset file");
    std::vector<std::string> st_data;
    std::string st_out;
    stats->add_option("--data", st_data, "Dataset JSONL (repeatable)")->required();
    stats->add_option("--out", st_out, "Output JSON (default: stdout)");

    // eval
    auto* eval = app.add_subcommand("eval", "Score predictions against gold entities");
    std::string ev_gold, ev_pred, ev_report;
    bool ev_per_label = false;
    eval->add_option("--gold", ev_gold, "Gold dataset JSONL")->required();
    eval->add_option("--pred", ev_pred, "Predictions JSONL")->required();
    eval->add_option("--report", ev_report, "Output report JSON (default: stdout)");
    eval->add_flag("--per-label", ev_per_label, "Include the per-label breakdown");

    // treemap
    auto* treemap = app.add_subcommand("treemap", "Export the taxonomy as a nested treemap");
    std::string tm_tax, tm_data, tm_out;
    std::int64_t tm_top_k = 10000;
    treemap->add_option("--taxonomy", tm_tax, "Master taxonomy JSONL")->required();
    treemap->add_option("--data", tm_data, "Dataset JSONL for tag frequencies")->required();
    treemap->add_option("--top-k", tm_top_k, "Most frequent tags to include");
    treemap->add_option("--out", tm_out, "Output JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig cfg;
        if (!config_path.empty()) cfg = PipelineConfig::load(config_path);
        cfg.apply_env();

        if (fetch->parsed()) {
            if (!fetch_from.empty()) cfg.window_from = require_date(fetch_from, "--from");
            if (!fetch_to.empty()) cfg.window_to = require_date(fetch_to, "--to");
            if (!fetch_store.empty()) cfg.store = fetch_store;
            if (!fetch_ident.empty()) cfg.edgar_ident = fetch_ident;
            if (fetch_rate > 0) cfg.rate_limit_per_sec = fetch_rate;
            if (!fetch_forms.empty()) {
                cfg.forms.clear();
                size_t pos = 0;
                while (pos <= fetch_forms.size()) {
                    size_t comma = fetch_forms.find(',', pos);
                    std::string form = fetch_forms.substr(
                        pos, (comma == std::string::npos ? fetch_forms.size() : comma) - pos);
                    if (!form.empty()) cfg.forms.insert(form);
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
            }
            cfg.validate();
            return cmd_fetch(cfg, fetch_base);
        }
        if (extract->parsed()) return cmd_extract(ex_store, ex_out, ex_diag);
        if (linkbase->parsed()) return cmd_linkbase(lb_store, lb_kind, lb_out);
        if (taxonomy->parsed()) return cmd_taxonomy(tx_edges, tx_kind, tx_out, tx_cik, tx_cik_map);
        if (collapse_cmd->parsed()) return cmd_collapse(cl_tax, cl_level, cl_out);
        if (remap->parsed()) return cmd_remap(rm_data, rm_cmap, rm_out, rm_oos);
        if (split_cmd->parsed()) {
            if (!sp_train_end.empty()) cfg.cutoffs.train_end = require_date(sp_train_end, "--train-end");
            if (!sp_dev_end.empty()) cfg.cutoffs.dev_end = require_date(sp_dev_end, "--dev-end");
            if (!sp_test_end.empty()) cfg.cutoffs.test_end = require_date(sp_test_end, "--test-end");
            if (sp_seed_set) cfg.seed = sp_seed;
            return cmd_split(sp_data, sp_out_dir, cfg);
        }
        if (lite->parsed()) return cmd_lite(lt_data, lt_out, lt_mapping, lt_threshold, lt_dump);
        if (tasks->parsed()) return cmd_tasks(tk_task, tk_data, tk_train, tk_top_k, tk_out);
        if (stats->parsed()) return cmd_stats(st_data, st_out);
        if (eval->parsed()) return cmd_eval(ev_gold, ev_pred, ev_report, ev_per_label);
        if (treemap->parsed()) return cmd_treemap(tm_tax, tm_data, tm_top_k, tm_out);
    } catch (const MissingArtifactError& e) {
        emit_error_record("missing_artifact", e.what(), e.stage, e.path);
        return 3;
    } catch (const ConfigError& e) {
        emit_error_record("invalid_config", e.what());
        return 2;
    } catch (const Error& e) {
        emit_error_record("failure", e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error_record("failure", e.what());
        return 1;
    }
    return 0;
}
