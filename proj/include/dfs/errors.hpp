#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dfs {

// Base for all library errors so callers (and the CLI exit-code map) can
// distinguish them from foreign exceptions.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed document bytes (not valid JSON / not valid UTF-8).
struct SyntaxError : Error {
    using Error::Error;
};

// Structural violation at a specific key path, e.g. "meta.links[0].fields[0]".
struct SchemaError : Error {
    SchemaError(std::string path_, const std::string& message)
        : Error(path_.empty() ? message : path_ + ": " + message), path(std::move(path_)) {}

    std::string path;
};

struct IoError : Error {
    using Error::Error;
};

struct EmptyDatasetError : Error {
    using Error::Error;
};

struct UnknownFileError : Error {
    using Error::Error;
};

// Supplied "now" is earlier than the document's modified timestamp.
struct ClockError : Error {
    using Error::Error;
};

// Bad arguments (flag ranges, malformed refs, self-aggregation, ...).
struct UsageError : Error {
    using Error::Error;
};

// Aggregation gate failed: graph similarity <= epsilon.
struct IncompatibleDatasetsError : Error {
    IncompatibleDatasetsError(double similarity_, double epsilon_, const std::string& message)
        : Error(message), similarity(similarity_), epsilon(epsilon_) {}

    double similarity;
    double epsilon;
};

// Gate passed but no field pair reached sigma.
struct NoMatchError : Error {
    NoMatchError(double similarity_, const std::string& message)
        : Error(message), similarity(similarity_) {}

    double similarity;
};

// Path remapping could not produce a unique slot for an incoming file.
struct CollisionError : Error {
    using Error::Error;
};

// A document that must be valid has validation errors.
struct ValidationError : Error {
    using Error::Error;
};

// Attempt to overwrite an existing (id, version) slot with different bytes.
struct ImmutabilityError : Error {
    using Error::Error;
};

struct NotFoundError : Error {
    using Error::Error;
};

// Stored bytes fail their checksum or identity check (on-disk corruption).
struct IntegrityError : Error {
    using Error::Error;
};

}  // namespace dfs
