#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "kpiforge/errors.hpp"

namespace kpiforge {

// Artifact records keep their field order, so golden files stay byte-stable.
using Json = nlohmann::ordered_json;

class JsonlReader {
public:
    explicit JsonlReader(const std::filesystem::path& path) : path_(path.string()), in_(path) {
        if (!in_) throw Error("cannot open " + path_);
    }

    // Returns false at end of input. Blank lines are skipped.
    bool next(Json& out) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (trim_view(line).empty()) continue;
            try {
                out = Json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path_ + ":" + std::to_string(line_no_) + ": " + e.what());
            }
            return true;
        }
        return false;
    }

    size_t line_no() const { return line_no_; }

private:
    static std::string_view trim_view(std::string_view s) {
        size_t b = 0, e = s.size();
        while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
        while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
        return s.substr(b, e - b);
    }

    std::string path_;
    std::ifstream in_;
    size_t line_no_ = 0;
};

class JsonlWriter {
public:
    explicit JsonlWriter(const std::filesystem::path& path) : path_(path.string()), out_(path) {
        if (!out_) throw Error("cannot open " + path_ + " for writing");
    }

    void write(const Json& record) {
        out_ << record.dump() << '\n';
        if (!out_) throw Error("write failed: " + path_);
    }

private:
    std::string path_;
    std::ofstream out_;
};

inline void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const Json&)>& fn) {
    JsonlReader reader(path);
    Json rec;
    while (reader.next(rec)) fn(rec);
}

inline std::string slurp_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("write failed: " + path.string());
}

}  // namespace kpiforge
