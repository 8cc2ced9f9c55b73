#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dfs/canonical.hpp"
#include "dfs/errors.hpp"

namespace dfs {

// ---------------------------------------------------------------------------
// Domain model
//
// On-disk document shape (all keys hyphenated or $-prefixed exactly as
// written here):
//
//   { "$schema", "id", "meta-version", "created", "modified", "checksum",
//     "meta": { "name", "description", "copyright", "keywords", "author",
//               "files": [{ "$id", "path", "encoding", "version", "checksum",
//                           "description", "measurement", "fields" }],
//               "links":  [{ "type", "description",
//                            "fields": [{ "file", "field" }] }],
//               "derived-from": ["<uuid>@v<N>", ...] } }
//
// Unknown keys at any object level are preserved in `extra` so documents
// round-trip through canonical serialization.
// ---------------------------------------------------------------------------

enum class FieldType { string_, integer, number, boolean, datetime, categorical, binary };

const char* to_string(FieldType t);
std::optional<FieldType> field_type_from_string(const std::string& s);

struct Measurement {
    std::string kind;
    std::string device;
    std::string unit;
    json extra = json::object();
};

struct FieldDef {
    std::string name;
    FieldType type = FieldType::string_;
    std::string description;
    json extra = json::object();
};

struct FieldRef {
    std::string file_local_id;
    std::string field_name;
    json extra = json::object();

    // "file_local_id/field_name", the node id used by the field graph.
    std::string node_id() const { return file_local_id + "/" + field_name; }
};

// Identity of a ref is its (file, field) pair; extras do not participate.
bool same_ref(const FieldRef& a, const FieldRef& b);
bool ref_less(const FieldRef& a, const FieldRef& b);

struct Link {
    std::string type;  // e.g. "id", "aggregation"
    std::string description;
    std::vector<FieldRef> fields;  // >= 2 refs
    json extra = json::object();
};

bool same_link(const Link& a, const Link& b);

struct Author {
    std::string local_id;
    std::string name;
    std::string affiliation;
    std::string email;
    json extra = json::object();
};

// One exact version of a dataset; textual form "<uuid>@v<N>".
struct DatasetRef {
    std::string id;
    std::int64_t meta_version = 1;

    std::string str() const;
    static std::optional<DatasetRef> parse(const std::string& text);

    friend bool operator==(const DatasetRef&, const DatasetRef&) = default;
    friend auto operator<=>(const DatasetRef&, const DatasetRef&) = default;
};

struct DataFileEntry {
    std::string local_id;  // "$id"
    std::string path;      // relative, "/"-separated, normalized
    std::string encoding;  // format tag, e.g. "csv"
    std::int64_t version = 1;
    std::string checksum;  // "sha256:<64 hex>"
    std::string description;
    std::optional<Measurement> measurement;
    std::vector<FieldDef> fields;  // may be empty for opaque media
    json extra = json::object();

    const FieldDef* find_field(const std::string& name) const;
};

struct MetaBlock {
    std::string name;
    std::string description;
    std::string copyright;
    std::vector<std::string> keywords;  // lowercase, unique, non-empty
    std::vector<Author> authors;
    std::vector<DataFileEntry> files;  // >= 1
    std::vector<Link> links;
    std::optional<std::vector<DatasetRef>> derived_from;
    json extra = json::object();

    const DataFileEntry* find_file(const std::string& local_id) const;
    bool resolves(const FieldRef& ref) const;
};

struct Metafile {
    std::string schema_uri;  // "$schema"
    std::string id;          // lowercase RFC 4122 text form
    std::int64_t meta_version = 1;
    std::string created;   // ISO-8601 UTC, second precision, "Z"
    std::string modified;  // same form, >= created
    std::string checksum;  // over canonical bytes of `meta`
    MetaBlock meta;
    json extra = json::object();

    DatasetRef ref() const { return DatasetRef{id, meta_version}; }
};

// Default schema URI written by generate_skeleton.
inline constexpr const char* kDefaultSchemaUri = "https://dfs.dev/schema/metafile/v1";
inline constexpr const char* kMetafileName = "metafile.json";

// ---------------------------------------------------------------------------
// Format validators / small codecs
// ---------------------------------------------------------------------------

bool is_uuid(const std::string& s);
bool is_checksum_string(const std::string& s);
bool is_timestamp(const std::string& s);
bool is_relative_normalized_path(const std::string& s);
bool is_minimal_email(const std::string& s);

// Seconds since epoch <-> "YYYY-MM-DDTHH:MM:SSZ". parse returns nullopt on
// any format or calendar violation.
std::optional<std::int64_t> parse_timestamp(const std::string& s);
std::string format_timestamp(std::int64_t epoch_seconds);

// Injectable sources so construction is reproducible under test.
using Clock = std::function<std::int64_t()>;
using UuidSource = std::function<std::string()>;

std::int64_t system_now();
std::string random_uuid();
UuidSource seeded_uuid_source(std::uint64_t seed);

// ---------------------------------------------------------------------------
// Validation report
// ---------------------------------------------------------------------------

enum class Severity { error, warning };

struct Finding {
    Severity severity = Severity::error;
    std::string path;
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool valid() const;  // no error-severity findings
    std::size_t error_count() const;
    std::size_t warning_count() const;
    json to_json() const;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Parses a UTF-8 document and checks every structural invariant (does not
// verify checksums against content; that is validate / the integrity layer).
// Throws SyntaxError or SchemaError.
Metafile parse_metafile(const std::string& bytes);

// json conversions (nlohmann ADL); object members end up key-sorted.
void to_json(json& j, const Measurement& v);
void to_json(json& j, const FieldDef& v);
void to_json(json& j, const FieldRef& v);
void to_json(json& j, const Link& v);
void to_json(json& j, const Author& v);
void to_json(json& j, const DataFileEntry& v);
void to_json(json& j, const MetaBlock& v);
void to_json(json& j, const Metafile& v);

std::string canonical_bytes(const Metafile& m);
std::string canonical_bytes(const MetaBlock& m);

// Structural invariant findings on an in-memory value (no I/O, no checksum
// verification). Used by parse_metafile and validate.
std::vector<Finding> structural_findings(const Metafile& m);

// Full validation: structural invariants, meta checksum recomputation, and
// (when data_root is given) per-file existence + checksum verification.
// Throws IoError only when data_root is given but unreadable.
ValidationReport validate(const Metafile& m,
                          const std::optional<std::filesystem::path>& data_root = std::nullopt);

// Builds a fresh self-consistent metafile for the regular files under
// data_root (recursive; dotfiles and a root-level metafile.json are
// skipped). Throws IoError / EmptyDatasetError / UsageError.
Metafile generate_skeleton(const std::filesystem::path& data_root, const std::string& name,
                           const Clock& clock = system_now, const UuidSource& uuid = random_uuid);

// Encoding tag for a file name ("csv" for "x.csv", "binary" when unknown).
std::string encoding_from_extension(const std::filesystem::path& p);

// Deep structural equality over the typed model, extras included.
bool structurally_equal(const Metafile& a, const Metafile& b);

}  // namespace dfs
