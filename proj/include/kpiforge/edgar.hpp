#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>

#include "kpiforge/dates.hpp"
#include "kpiforge/errors.hpp"
#include "kpiforge/jsonl.hpp"
#include "kpiforge/records.hpp"
#include "kpiforge/text.hpp"

namespace kpiforge {

// Global request throttle shared by all concurrent fetches; EDGAR enforces a
// hard requests-per-second ceiling per client.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_sec)
        : interval_(requests_per_sec > 0
                        ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(1.0 / requests_per_sec))
                        : std::chrono::steady_clock::duration::zero()) {}

    void acquire() {
        if (interval_.count() == 0) return;
        std::chrono::steady_clock::time_point slot;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto now = std::chrono::steady_clock::now();
            slot = next_ < now ? now : next_;
            next_ = slot + interval_;
        }
        std::this_thread::sleep_until(slot);
    }

private:
    std::chrono::steady_clock::duration interval_;
    std::chrono::steady_clock::time_point next_{};
    std::mutex mutex_;
};

enum class DocRole { primary_ixbrl, calculation_linkbase, presentation_linkbase, other };

inline std::string_view doc_role_name(DocRole r) {
    switch (r) {
        case DocRole::primary_ixbrl: return "primary_ixbrl";
        case DocRole::calculation_linkbase: return "calculation_linkbase";
        case DocRole::presentation_linkbase: return "presentation_linkbase";
        default: return "other";
    }
}

struct FilingRef {
    std::string accession_number;  // NNNNNNNNNN-NN-NNNNNN
    std::string cik;               // zero-padded to 10 digits
    std::string form_type;         // 10-K or 10-Q
    Date filing_date;
    std::string company_name;
    std::vector<std::pair<DocRole, std::string>> document_urls;

    std::optional<std::string> url_for(DocRole role) const {
        for (const auto& [r, u] : document_urls)
            if (r == role) return u;
        return std::nullopt;
    }
};

struct FilingBundle {
    std::filesystem::path dir;
    std::filesystem::path primary;
    std::filesystem::path cal;  // empty when absent
    std::filesystem::path pre;
    bool linkbases_absent = false;
    int downloads_performed = 0;
};

struct IndexWarning {
    std::string source;
    std::string message;
};

struct EdgarConfig {
    std::string base_url = "https://www.sec.gov";
    std::string ident;  // operator identification header, mandatory
    double requests_per_sec = 8.0;
    int max_retries = 4;
    int backoff_base_ms = 500;
};

inline bool valid_accession(std::string_view s) {
    if (s.size() != 20) return false;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i == 10 || i == 13) {
            if (s[i] != '-') return false;
        } else if (s[i] < '0' || s[i] > '9') {
            return false;
        }
    }
    return true;
}

inline std::string pad_cik(std::string_view digits) {
    std::string out(digits);
    while (out.size() < 10) out.insert(out.begin(), '0');
    return out;
}

inline std::string strip_dashes(std::string_view accession) {
    std::string out;
    for (char c : accession)
        if (c != '-') out.push_back(c);
    return out;
}

// Parse one quarterly master.idx: pipe-delimited
// CIK|Company Name|Form Type|Date Filed|Filename rows after a dashed rule.
// Malformed rows are reported, never fatal.
inline void parse_master_index(std::string_view text, const std::string& source, Date from, Date to,
                               const std::set<std::string>& forms, const std::string& base_url,
                               const std::function<void(FilingRef)>& sink,
                               std::vector<IndexWarning>* warnings) {
    bool in_body = false;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, (eol == std::string_view::npos ? text.size() : eol) - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!in_body) {
            if (line.find("---") == 0) in_body = true;
            continue;
        }

        std::vector<std::string_view> cols;
        size_t cpos = 0;
        while (cpos <= line.size()) {
            size_t bar = line.find('|', cpos);
            cols.push_back(line.substr(cpos, (bar == std::string_view::npos ? line.size() : bar) - cpos));
            if (bar == std::string_view::npos) break;
            cpos = bar + 1;
        }
        if (cols.size() != 5) {
            if (warnings) warnings->push_back({source, "malformed row: " + std::string(line)});
            continue;
        }

        std::string form(trim(cols[2]));
        if (!forms.count(form)) continue;  // amended forms (10-K/A) never match exactly

        auto date = parse_date(trim(cols[3]));
        if (!date) {
            if (warnings) warnings->push_back({source, "bad date in row: " + std::string(line)});
            continue;
        }
        if (*date < from || to < *date) continue;

        std::string filename(trim(cols[4]));
        std::string accession;
        if (auto slash = filename.rfind('/'); slash != std::string::npos) {
            std::string base = filename.substr(slash + 1);
            if (auto dot = base.rfind(".txt"); dot != std::string::npos) base = base.substr(0, dot);
            accession = base;
        }
        if (!valid_accession(accession)) {
            if (warnings) warnings->push_back({source, "bad accession in row: " + std::string(line)});
            continue;
        }

        std::string cik_digits(trim(cols[0]));
        FilingRef ref;
        ref.accession_number = accession;
        ref.cik = pad_cik(cik_digits);
        ref.form_type = form;
        ref.filing_date = *date;
        ref.company_name = std::string(trim(cols[1]));
        ref.document_urls.emplace_back(DocRole::other, base_url + "/Archives/edgar/data/" + cik_digits +
                                                           "/" + strip_dashes(accession) + "/index.json");
        sink(std::move(ref));
    }
}

class EdgarClient {
public:
    explicit EdgarClient(EdgarConfig config)
        : config_(std::move(config)), limiter_(config_.requests_per_sec) {
        if (config_.ident.empty())
            throw ConfigError("EDGAR identification header is required (set EDGAR_IDENT)");
    }

    // Walk the quarterly full-index files covering [from, to] and emit every
    // matching filing in index order. Deterministic for a fixed remote
    // snapshot; an empty form set short-circuits to an empty stream.
    void list_filings(Date from, Date to, const std::set<std::string>& forms,
                      const std::function<void(FilingRef)>& sink,
                      std::vector<IndexWarning>* warnings = nullptr) {
        if (to < from) throw ConfigError("list_filings: start date after end date");
        if (forms.empty()) return;
        for (int year = from.year; year <= to.year; ++year) {
            for (int q = 1; q <= 4; ++q) {
                Date q_begin{year, (q - 1) * 3 + 1, 1};
                Date q_end = q == 4 ? Date{year, 12, 31} : Date{year, q * 3 + 1, 1};
                if (q != 4) {
                    // last day of previous month
                    q_end = Date::from_days(q_end.days_from_epoch() - 1);
                }
                if (q_end < from || to < q_begin) continue;
                std::string path = "/Archives/edgar/full-index/" + std::to_string(year) + "/QTR" +
                                   std::to_string(q) + "/master.idx";
                std::string body;
                try {
                    body = get_or_throw(path);
                } catch (const FetchError& e) {
                    throw FetchError(e.what(), q_begin.iso(), q_end.iso());
                }
                parse_master_index(body, path, from, to, forms, config_.base_url, sink, warnings);
            }
        }
    }

    std::vector<FilingRef> list_filings(Date from, Date to, const std::set<std::string>& forms,
                                        std::vector<IndexWarning>* warnings = nullptr) {
        std::vector<FilingRef> out;
        list_filings(from, to, forms, [&](FilingRef ref) { out.push_back(std::move(ref)); }, warnings);
        return out;
    }

    // Fetch a filing's primary document and linkbases into
    // <store>/<cik>/<accession>/. Idempotent: complete files are never
    // re-downloaded. A missing linkbase flags the bundle but is not fatal.
    FilingBundle fetch_filing(const FilingRef& ref, const std::filesystem::path& store) {
        namespace fs = std::filesystem;
        FilingBundle bundle;
        bundle.dir = store / ref.cik / ref.accession_number;
        fs::create_directories(bundle.dir);

        fs::path primary_path = bundle.dir / "primary.htm";
        fs::path cal_path = bundle.dir / "cal.xml";
        fs::path pre_path = bundle.dir / "pre.xml";
        fs::path meta_path = bundle.dir / "meta.jsonl";

        if (fs::exists(meta_path)) {
            // A written meta record marks the bundle complete.
            Json meta;
            JsonlReader reader(meta_path);
            if (reader.next(meta)) {
                bundle.primary = primary_path;
                bundle.linkbases_absent = meta.value("linkbases_absent", false);
                if (fs::exists(cal_path)) bundle.cal = cal_path;
                if (fs::exists(pre_path)) bundle.pre = pre_path;
                return bundle;
            }
        }

        std::optional<std::string> primary_url = ref.url_for(DocRole::primary_ixbrl);
        std::optional<std::string> cal_url = ref.url_for(DocRole::calculation_linkbase);
        std::optional<std::string> pre_url = ref.url_for(DocRole::presentation_linkbase);

        if (!primary_url) {
            auto index_url = ref.url_for(DocRole::other);
            if (!index_url) throw FetchError("filing " + ref.accession_number + " has no usable urls");
            discover_documents(*index_url, primary_url, cal_url, pre_url);
        }
        if (!primary_url)
            throw FetchError("filing " + ref.accession_number + ": no primary iXBRL document found");

        if (!download_if_missing(*primary_url, primary_path, &bundle))
            throw FetchError("filing " + ref.accession_number + ": primary document fetch failed");
        bundle.primary = primary_path;

        bool cal_ok = cal_url && download_if_missing(*cal_url, cal_path, &bundle);
        bool pre_ok = pre_url && download_if_missing(*pre_url, pre_path, &bundle);
        if (cal_ok) bundle.cal = cal_path;
        if (pre_ok) bundle.pre = pre_path;
        bundle.linkbases_absent = !cal_ok || !pre_ok;

        Json meta = Json::object();
        meta["accession_number"] = ref.accession_number;
        meta["cik"] = ref.cik;
        meta["form_type"] = ref.form_type;
        meta["filing_date"] = ref.filing_date.iso();
        meta["filing_epoch_ms"] = ref.filing_date.epoch_ms();
        meta["company_name"] = ref.company_name;
        meta["linkbases_absent"] = bundle.linkbases_absent;
        JsonlWriter writer(meta_path);
        writer.write(meta);
        return bundle;
    }

private:
    // Resolve scheme+host for httplib; path stays relative to base.
    struct SplitUrl {
        std::string origin;
        std::string path;
    };

    static SplitUrl split_url(const std::string& url) {
        auto scheme = url.find("://");
        if (scheme == std::string::npos) return {"", url};
        auto path_start = url.find('/', scheme + 3);
        if (path_start == std::string::npos) return {url, "/"};
        return {url.substr(0, path_start), url.substr(path_start)};
    }

    httplib::Result request(const std::string& url) {
        SplitUrl u = split_url(url.rfind("http", 0) == 0 ? url : config_.base_url + url);
        httplib::Client client(u.origin);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        httplib::Headers headers = {{"User-Agent", config_.ident}};
        limiter_.acquire();
        return client.Get(u.path, headers);
    }

    // GET with retry/backoff on 429/5xx and transport errors.
    std::string get_or_throw(const std::string& url) {
        int attempt = 0;
        for (;;) {
            auto res = request(url);
            if (res && res->status == 200) return res->body;
            if (res && res->status == 404) throw FetchError("404 for " + url);
            bool retryable = !res || res->status == 429 || res->status >= 500;
            if (!retryable || attempt >= config_.max_retries) {
                std::string what = res ? "status " + std::to_string(res->status)
                                       : "transport error " + httplib::to_string(res.error());
                throw FetchError("fetch failed for " + url + ": " + what);
            }
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.backoff_base_ms * (1 << attempt)));
            ++attempt;
        }
    }

    // Identify the primary document and the _cal/_pre linkbases from the
    // filing directory's index.json.
    void discover_documents(const std::string& index_url, std::optional<std::string>& primary_url,
                            std::optional<std::string>& cal_url, std::optional<std::string>& pre_url) {
        std::string body = get_or_throw(index_url);
        Json index;
        try {
            index = Json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw FetchError("unparseable index at " + index_url + ": " + e.what());
        }
        std::string dir_url = index_url.substr(0, index_url.rfind('/') + 1);

        std::string best_primary;
        std::int64_t best_size = -1;
        if (index.contains("directory") && index["directory"].contains("item")) {
            for (const auto& item : index["directory"]["item"]) {
                std::string name = item.value("name", std::string{});
                std::string lower = to_lower(name);
                std::int64_t size = 0;
                if (item.contains("size")) {
                    if (item["size"].is_number()) size = item["size"].get<std::int64_t>();
                    else if (item["size"].is_string() && !item["size"].get<std::string>().empty())
                        size = std::atoll(item["size"].get<std::string>().c_str());
                }
                if (lower.size() > 8 && (lower.ends_with("_cal.xml") || lower.ends_with("-cal.xml"))) {
                    if (!cal_url) cal_url = dir_url + name;
                    continue;
                }
                if (lower.size() > 8 && (lower.ends_with("_pre.xml") || lower.ends_with("-pre.xml"))) {
                    if (!pre_url) pre_url = dir_url + name;
                    continue;
                }
                bool htm = lower.ends_with(".htm") || lower.ends_with(".html");
                if (!htm || lower.find("-index") != std::string::npos) continue;
                if (lower.size() > 1 && lower[0] == 'r' && std::isdigit(static_cast<unsigned char>(lower[1])))
                    continue;  // R1.htm.. rendered report pages
                if (size > best_size || (size == best_size && name < best_primary)) {
                    best_size = size;
                    best_primary = name;
                }
            }
        }
        if (!primary_url && !best_primary.empty()) primary_url = dir_url + best_primary;
    }

    // Returns true when the file is present (already or after download);
    // false on 404. Content length is verified when the server supplies it.
    bool download_if_missing(const std::string& url, const std::filesystem::path& target,
                             FilingBundle* bundle) {
        namespace fs = std::filesystem;
        if (fs::exists(target) && fs::file_size(target) > 0) return true;
        std::string body;
        try {
            auto res = request(url);
            int attempt = 0;
            while (!(res && (res->status == 200 || res->status == 404))) {
                bool retryable = !res || res->status == 429 || res->status >= 500;
                if (!retryable || attempt >= config_.max_retries) {
                    std::string what = res ? "status " + std::to_string(res->status)
                                           : "transport error " + httplib::to_string(res.error());
                    throw FetchError("fetch failed for " + url + ": " + what);
                }
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(config_.backoff_base_ms * (1 << attempt)));
                ++attempt;
                res = request(url);
            }
            if (res->status == 404) return false;
            if (auto it = res->headers.find("Content-Length"); it != res->headers.end()) {
                auto expected = std::atoll(it->second.c_str());
                if (expected >= 0 && static_cast<std::int64_t>(res->body.size()) != expected)
                    throw FetchError("short read for " + url);
            }
            body = res->body;
        } catch (const FetchError&) {
            throw;
        }
        fs::path tmp = target;
        tmp += ".part";
        write_file(tmp, body);
        fs::rename(tmp, target);
        if (bundle) bundle->downloads_performed++;
        return true;
    }

    EdgarConfig config_;
    RateLimiter limiter_;
};

// Store-side view of a fetched filing, as the extractor consumes it.
struct StoredFiling {
    std::filesystem::path dir;
    FilingMeta meta;
    std::string cik;
    Date filing_date;
};

inline FilingMeta meta_from_json(const Json& j) {
    FilingMeta m;
    m.form_type = j.value("form_type", std::string{});
    m.accession_number = j.value("accession_number", std::string{});
    m.company_name = j.value("company_name", std::string{});
    m.quarter_ending = j.value("quarter_ending", std::string{});
    if (j.contains("filing_epoch_ms")) m.filing_epoch_ms = j["filing_epoch_ms"].get<std::int64_t>();
    else if (j.contains("filing_date"))
        m.filing_epoch_ms = require_date(j["filing_date"].get<std::string>(), "filing_date").epoch_ms();
    return m;
}

// Enumerate <store>/<cik>/<accession>/ directories that carry a meta record,
// in sorted order so downstream artifacts are deterministic.
inline std::vector<StoredFiling> scan_store(const std::filesystem::path& store) {
    namespace fs = std::filesystem;
    std::vector<StoredFiling> out;
    if (!fs::exists(store)) return out;
    std::vector<fs::path> meta_files;
    for (const auto& entry : fs::recursive_directory_iterator(store)) {
        if (entry.is_regular_file() && entry.path().filename() == "meta.jsonl")
            meta_files.push_back(entry.path());
    }
    std::sort(meta_files.begin(), meta_files.end());
    for (const auto& meta_path : meta_files) {
        Json j;
        JsonlReader reader(meta_path);
        if (!reader.next(j)) continue;
        StoredFiling f;
        f.dir = meta_path.parent_path();
        f.meta = meta_from_json(j);
        f.cik = j.value("cik", std::string{});
        if (j.contains("filing_date")) {
            if (auto d = parse_date(j["filing_date"].get<std::string>())) f.filing_date = *d;
        }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace kpiforge
