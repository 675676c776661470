#pragma once

#include <stdexcept>
#include <string>

namespace kpiforge {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad or missing configuration (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

// A pipeline stage was asked to read an artifact that an earlier stage
// should have produced (CLI exit code 3).
struct MissingArtifactError : Error {
    MissingArtifactError(std::string stage_name, std::string artifact_path)
        : Error("missing upstream artifact for stage '" + stage_name + "': " + artifact_path),
          stage(std::move(stage_name)),
          path(std::move(artifact_path)) {}

    std::string stage;
    std::string path;
};

struct ParseError : Error {
    using Error::Error;
};

struct CycleError : Error {
    using Error::Error;
};

struct KindMismatchError : Error {
    using Error::Error;
};

struct UnknownCikError : Error {
    using Error::Error;
};

// Network-level failure after retries were exhausted. For index listings the
// failed date range is preserved so callers can resume.
struct FetchError : Error {
    explicit FetchError(const std::string& msg) : Error(msg) {}
    FetchError(const std::string& msg, std::string range_from, std::string range_to)
        : Error(msg), from(std::move(range_from)), to(std::move(range_to)), has_range(true) {}

    std::string from;
    std::string to;
    bool has_range = false;
};

}  // namespace kpiforge
