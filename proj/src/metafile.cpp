#include "dfs/metafile.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <unordered_set>

#include "dfs/checksum.hpp"
#include "dfs/versioning.hpp"

namespace dfs {

namespace {

namespace fs = std::filesystem;

bool all_hex_lower(const std::string& s, std::size_t from, std::size_t len) {
    if (from + len > s.size()) return false;
    for (std::size_t i = from; i < from + len; ++i) {
        char c = s[i];
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
}

std::string join_key(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

std::string join_index(const std::string& prefix, std::size_t i) {
    return prefix + "[" + std::to_string(i) + "]";
}

const json& require_key(const json& obj, const char* key, const std::string& obj_path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(join_key(obj_path, key), "missing required key");
    return *it;
}

std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw SchemaError(path, "expected a string");
    return v.get<std::string>();
}

std::int64_t get_int(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) {
        auto u = v.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
            throw SchemaError(path, "integer out of range");
        }
        return static_cast<std::int64_t>(u);
    }
    if (v.is_number_integer()) return v.get<std::int64_t>();
    throw SchemaError(path, "expected an integer");
}

const json& as_object(const json& v, const std::string& path) {
    if (!v.is_object()) throw SchemaError(path, "expected an object");
    return v;
}

const json& as_array(const json& v, const std::string& path) {
    if (!v.is_array()) throw SchemaError(path, "expected an array");
    return v;
}

json collect_extra(const json& obj, std::initializer_list<const char*> known) {
    json extra = json::object();
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool recognized = false;
        for (const char* k : known) {
            if (it.key() == k) {
                recognized = true;
                break;
            }
        }
        if (!recognized) extra[it.key()] = it.value();
    }
    return extra;
}

void merge_extra(json& j, const json& extra) {
    j = extra.is_object() ? extra : json::object();
}

std::string uuid_from_words(std::uint64_t hi, std::uint64_t lo) {
    unsigned char b[16];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(hi >> (56 - 8 * i));
    for (int i = 0; i < 8; ++i) b[8 + i] = static_cast<unsigned char>(lo >> (56 - 8 * i));
    b[6] = static_cast<unsigned char>((b[6] & 0x0f) | 0x40);  // version 4
    b[8] = static_cast<unsigned char>((b[8] & 0x3f) | 0x80);  // RFC 4122 variant
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(36);
    for (int i = 0; i < 16; ++i) {
        if (i == 4 || i == 6 || i == 8 || i == 10) out.push_back('-');
        out.push_back(hex[b[i] >> 4]);
        out.push_back(hex[b[i] & 0x0f]);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// FieldType
// ---------------------------------------------------------------------------

const char* to_string(FieldType t) {
    switch (t) {
        case FieldType::string_: return "string";
        case FieldType::integer: return "integer";
        case FieldType::number: return "number";
        case FieldType::boolean: return "boolean";
        case FieldType::datetime: return "datetime";
        case FieldType::categorical: return "categorical";
        case FieldType::binary: return "binary";
    }
    return "string";
}

std::optional<FieldType> field_type_from_string(const std::string& s) {
    if (s == "string") return FieldType::string_;
    if (s == "integer") return FieldType::integer;
    if (s == "number") return FieldType::number;
    if (s == "boolean") return FieldType::boolean;
    if (s == "datetime") return FieldType::datetime;
    if (s == "categorical") return FieldType::categorical;
    if (s == "binary") return FieldType::binary;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Small identities
// ---------------------------------------------------------------------------

bool same_ref(const FieldRef& a, const FieldRef& b) {
    return a.file_local_id == b.file_local_id && a.field_name == b.field_name;
}

bool ref_less(const FieldRef& a, const FieldRef& b) {
    if (a.file_local_id != b.file_local_id) return a.file_local_id < b.file_local_id;
    return a.field_name < b.field_name;
}

bool same_link(const Link& a, const Link& b) {
    if (a.type != b.type || a.description != b.description) return false;
    if (a.fields.size() != b.fields.size()) return false;
    for (std::size_t i = 0; i < a.fields.size(); ++i) {
        if (!same_ref(a.fields[i], b.fields[i])) return false;
    }
    return true;
}

std::string DatasetRef::str() const {
    return id + "@v" + std::to_string(meta_version);
}

std::optional<DatasetRef> DatasetRef::parse(const std::string& text) {
    // <uuid>@v<decimal>, uuid is always 36 chars
    if (text.size() < 39 || text[36] != '@' || text[37] != 'v') return std::nullopt;
    std::string id = text.substr(0, 36);
    if (!is_uuid(id)) return std::nullopt;
    std::string digits = text.substr(38);
    if (digits.empty() || digits[0] == '0') return std::nullopt;
    std::int64_t v = 0;
    for (char c : digits) {
        if (c < '0' || c > '9') return std::nullopt;
        if (v > (std::numeric_limits<std::int64_t>::max() - (c - '0')) / 10) return std::nullopt;
        v = v * 10 + (c - '0');
    }
    if (v < 1) return std::nullopt;
    return DatasetRef{std::move(id), v};
}

const FieldDef* DataFileEntry::find_field(const std::string& name) const {
    for (const auto& f : fields) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

const DataFileEntry* MetaBlock::find_file(const std::string& local_id) const {
    for (const auto& f : files) {
        if (f.local_id == local_id) return &f;
    }
    return nullptr;
}

bool MetaBlock::resolves(const FieldRef& ref) const {
    const DataFileEntry* f = find_file(ref.file_local_id);
    return f != nullptr && f->find_field(ref.field_name) != nullptr;
}

// ---------------------------------------------------------------------------
// Format validators
// ---------------------------------------------------------------------------

bool is_uuid(const std::string& s) {
    if (s.size() != 36) return false;
    if (s[8] != '-' || s[13] != '-' || s[18] != '-' || s[23] != '-') return false;
    return all_hex_lower(s, 0, 8) && all_hex_lower(s, 9, 4) && all_hex_lower(s, 14, 4) &&
           all_hex_lower(s, 19, 4) && all_hex_lower(s, 24, 12);
}

bool is_checksum_string(const std::string& s) {
    static const std::string prefix = "sha256:";
    if (s.size() != prefix.size() + 64) return false;
    if (s.compare(0, prefix.size(), prefix) != 0) return false;
    return all_hex_lower(s, prefix.size(), 64);
}

bool is_timestamp(const std::string& s) {
    return parse_timestamp(s).has_value();
}

bool is_relative_normalized_path(const std::string& s) {
    if (s.empty() || s.front() == '/') return false;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find('/', start);
        if (end == std::string::npos) end = s.size();
        std::string_view seg(s.data() + start, end - start);
        if (seg.empty() || seg == "." || seg == "..") return false;
        if (end == s.size()) break;
        start = end + 1;
        if (start == s.size()) return false;  // trailing '/'
    }
    return true;
}

bool is_minimal_email(const std::string& s) {
    std::size_t at = s.find('@');
    if (at == std::string::npos || at == 0 || at + 1 >= s.size()) return false;
    return s.find('@', at + 1) == std::string::npos;
}

std::optional<std::int64_t> parse_timestamp(const std::string& s) {
    if (s.size() != 20) return std::nullopt;
    if (s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' ||
        s[19] != 'Z') {
        return std::nullopt;
    }
    auto num = [&](std::size_t pos, std::size_t len) -> int {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (s[i] < '0' || s[i] > '9') return -1;
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    int year = num(0, 4), month = num(5, 2), day = num(8, 2);
    int hour = num(11, 2), minute = num(14, 2), second = num(17, 2);
    if (year < 0 || month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;
    if (hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 59) {
        return std::nullopt;
    }
    std::tm tm{};
    tm.tm_year = year - 1900;
    tm.tm_mon = month - 1;
    tm.tm_mday = day;
    tm.tm_hour = hour;
    tm.tm_min = minute;
    tm.tm_sec = second;
    time_t t = timegm(&tm);
    std::tm back{};
    if (gmtime_r(&t, &back) == nullptr) return std::nullopt;
    if (back.tm_year != year - 1900 || back.tm_mon != month - 1 || back.tm_mday != day ||
        back.tm_hour != hour || back.tm_min != minute || back.tm_sec != second) {
        return std::nullopt;  // calendar-invalid date, e.g. Feb 30
    }
    return static_cast<std::int64_t>(t);
}

std::string format_timestamp(std::int64_t epoch_seconds) {
    time_t t = static_cast<time_t>(epoch_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

// ---------------------------------------------------------------------------
// Clock / UUID sources
// ---------------------------------------------------------------------------

std::int64_t system_now() {
    return static_cast<std::int64_t>(time(nullptr));
}

std::string random_uuid() {
    static std::mutex mu;
    static std::mt19937_64 rng = [] {
        std::random_device rd;
        std::seed_seq seq{rd(), rd(), rd(), rd()};
        return std::mt19937_64(seq);
    }();
    std::lock_guard<std::mutex> lock(mu);
    return uuid_from_words(rng(), rng());
}

UuidSource seeded_uuid_source(std::uint64_t seed) {
    auto rng = std::make_shared<std::mt19937_64>(seed);
    return [rng]() { return uuid_from_words((*rng)(), (*rng)()); };
}

// ---------------------------------------------------------------------------
// json conversions
// ---------------------------------------------------------------------------

void to_json(json& j, const Measurement& v) {
    merge_extra(j, v.extra);
    j["kind"] = v.kind;
    j["device"] = v.device;
    j["unit"] = v.unit;
}

void to_json(json& j, const FieldDef& v) {
    merge_extra(j, v.extra);
    j["name"] = v.name;
    j["type"] = to_string(v.type);
    j["description"] = v.description;
}

void to_json(json& j, const FieldRef& v) {
    merge_extra(j, v.extra);
    j["file"] = v.file_local_id;
    j["field"] = v.field_name;
}

void to_json(json& j, const Link& v) {
    merge_extra(j, v.extra);
    j["type"] = v.type;
    j["description"] = v.description;
    j["fields"] = v.fields;
}

void to_json(json& j, const Author& v) {
    merge_extra(j, v.extra);
    j["$id"] = v.local_id;
    j["name"] = v.name;
    j["affiliation"] = v.affiliation;
    j["email"] = v.email;
}

void to_json(json& j, const DataFileEntry& v) {
    merge_extra(j, v.extra);
    j["$id"] = v.local_id;
    j["path"] = v.path;
    j["encoding"] = v.encoding;
    j["version"] = v.version;
    j["checksum"] = v.checksum;
    j["description"] = v.description;
    if (v.measurement) j["measurement"] = *v.measurement;
    j["fields"] = v.fields;
}

void to_json(json& j, const MetaBlock& v) {
    merge_extra(j, v.extra);
    j["name"] = v.name;
    j["description"] = v.description;
    j["copyright"] = v.copyright;
    j["keywords"] = v.keywords;
    j["author"] = v.authors;
    j["files"] = v.files;
    j["links"] = v.links;
    if (v.derived_from) {
        json refs = json::array();
        for (const auto& r : *v.derived_from) refs.push_back(r.str());
        j["derived-from"] = std::move(refs);
    }
}

void to_json(json& j, const Metafile& v) {
    merge_extra(j, v.extra);
    j["$schema"] = v.schema_uri;
    j["id"] = v.id;
    j["meta-version"] = v.meta_version;
    j["created"] = v.created;
    j["modified"] = v.modified;
    j["checksum"] = v.checksum;
    j["meta"] = v.meta;
}

std::string canonical_bytes(const Metafile& m) {
    return canonical_bytes(json(m));
}

std::string canonical_bytes(const MetaBlock& m) {
    return canonical_bytes(json(m));
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

Measurement parse_measurement(const json& j, const std::string& path) {
    as_object(j, path);
    Measurement m;
    m.kind = get_string(require_key(j, "kind", path), join_key(path, "kind"));
    m.device = get_string(require_key(j, "device", path), join_key(path, "device"));
    m.unit = get_string(require_key(j, "unit", path), join_key(path, "unit"));
    m.extra = collect_extra(j, {"kind", "device", "unit"});
    return m;
}

FieldDef parse_field(const json& j, const std::string& path) {
    as_object(j, path);
    FieldDef f;
    f.name = get_string(require_key(j, "name", path), join_key(path, "name"));
    std::string type_text = get_string(require_key(j, "type", path), join_key(path, "type"));
    auto type = field_type_from_string(type_text);
    if (!type) throw SchemaError(join_key(path, "type"), "unknown field type \"" + type_text + "\"");
    f.type = *type;
    f.description =
        get_string(require_key(j, "description", path), join_key(path, "description"));
    f.extra = collect_extra(j, {"name", "type", "description"});
    return f;
}

FieldRef parse_field_ref(const json& j, const std::string& path) {
    as_object(j, path);
    FieldRef r;
    r.file_local_id = get_string(require_key(j, "file", path), join_key(path, "file"));
    r.field_name = get_string(require_key(j, "field", path), join_key(path, "field"));
    r.extra = collect_extra(j, {"file", "field"});
    return r;
}

Link parse_link(const json& j, const std::string& path) {
    as_object(j, path);
    Link l;
    l.type = get_string(require_key(j, "type", path), join_key(path, "type"));
    l.description =
        get_string(require_key(j, "description", path), join_key(path, "description"));
    const json& fields = as_array(require_key(j, "fields", path), join_key(path, "fields"));
    for (std::size_t i = 0; i < fields.size(); ++i) {
        l.fields.push_back(parse_field_ref(fields[i], join_index(join_key(path, "fields"), i)));
    }
    l.extra = collect_extra(j, {"type", "description", "fields"});
    return l;
}

Author parse_author(const json& j, const std::string& path) {
    as_object(j, path);
    Author a;
    a.local_id = get_string(require_key(j, "$id", path), join_key(path, "$id"));
    a.name = get_string(require_key(j, "name", path), join_key(path, "name"));
    a.affiliation =
        get_string(require_key(j, "affiliation", path), join_key(path, "affiliation"));
    a.email = get_string(require_key(j, "email", path), join_key(path, "email"));
    a.extra = collect_extra(j, {"$id", "name", "affiliation", "email"});
    return a;
}

DataFileEntry parse_file_entry(const json& j, const std::string& path) {
    as_object(j, path);
    DataFileEntry f;
    f.local_id = get_string(require_key(j, "$id", path), join_key(path, "$id"));
    f.path = get_string(require_key(j, "path", path), join_key(path, "path"));
    f.encoding = get_string(require_key(j, "encoding", path), join_key(path, "encoding"));
    f.version = get_int(require_key(j, "version", path), join_key(path, "version"));
    f.checksum = get_string(require_key(j, "checksum", path), join_key(path, "checksum"));
    f.description =
        get_string(require_key(j, "description", path), join_key(path, "description"));
    if (auto it = j.find("measurement"); it != j.end()) {
        f.measurement = parse_measurement(*it, join_key(path, "measurement"));
    }
    const json& fields = as_array(require_key(j, "fields", path), join_key(path, "fields"));
    for (std::size_t i = 0; i < fields.size(); ++i) {
        f.fields.push_back(parse_field(fields[i], join_index(join_key(path, "fields"), i)));
    }
    f.extra = collect_extra(j, {"$id", "path", "encoding", "version", "checksum", "description",
                                "measurement", "fields"});
    return f;
}

MetaBlock parse_meta(const json& j, const std::string& path) {
    as_object(j, path);
    MetaBlock m;
    m.name = get_string(require_key(j, "name", path), join_key(path, "name"));
    m.description =
        get_string(require_key(j, "description", path), join_key(path, "description"));
    m.copyright = get_string(require_key(j, "copyright", path), join_key(path, "copyright"));

    const std::string kw_path = join_key(path, "keywords");
    const json& keywords = as_array(require_key(j, "keywords", path), kw_path);
    for (std::size_t i = 0; i < keywords.size(); ++i) {
        m.keywords.push_back(get_string(keywords[i], join_index(kw_path, i)));
    }

    const std::string authors_path = join_key(path, "author");
    const json& authors = as_array(require_key(j, "author", path), authors_path);
    for (std::size_t i = 0; i < authors.size(); ++i) {
        m.authors.push_back(parse_author(authors[i], join_index(authors_path, i)));
    }

    const std::string files_path = join_key(path, "files");
    const json& files = as_array(require_key(j, "files", path), files_path);
    for (std::size_t i = 0; i < files.size(); ++i) {
        m.files.push_back(parse_file_entry(files[i], join_index(files_path, i)));
    }

    const std::string links_path = join_key(path, "links");
    const json& links = as_array(require_key(j, "links", path), links_path);
    for (std::size_t i = 0; i < links.size(); ++i) {
        m.links.push_back(parse_link(links[i], join_index(links_path, i)));
    }

    if (auto it = j.find("derived-from"); it != j.end()) {
        const std::string df_path = join_key(path, "derived-from");
        const json& refs = as_array(*it, df_path);
        std::vector<DatasetRef> out;
        for (std::size_t i = 0; i < refs.size(); ++i) {
            const std::string item_path = join_index(df_path, i);
            std::string text = get_string(refs[i], item_path);
            auto ref = DatasetRef::parse(text);
            if (!ref) throw SchemaError(item_path, "malformed dataset ref (expected \"<uuid>@v<N>\")");
            out.push_back(std::move(*ref));
        }
        m.derived_from = std::move(out);
    }

    m.extra = collect_extra(j, {"name", "description", "copyright", "keywords", "author", "files",
                                "links", "derived-from"});
    return m;
}

}  // namespace

Metafile parse_metafile(const std::string& bytes) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw SyntaxError(std::string("malformed document: ") + e.what());
    }
    as_object(doc, "");

    Metafile m;
    m.schema_uri = get_string(require_key(doc, "$schema", ""), "$schema");
    m.id = get_string(require_key(doc, "id", ""), "id");
    m.meta_version = get_int(require_key(doc, "meta-version", ""), "meta-version");
    m.created = get_string(require_key(doc, "created", ""), "created");
    m.modified = get_string(require_key(doc, "modified", ""), "modified");
    m.checksum = get_string(require_key(doc, "checksum", ""), "checksum");
    m.meta = parse_meta(require_key(doc, "meta", ""), "meta");
    m.extra = collect_extra(
        doc, {"$schema", "id", "meta-version", "created", "modified", "checksum", "meta"});

    for (const auto& finding : structural_findings(m)) {
        if (finding.severity == Severity::error) {
            throw SchemaError(finding.path, finding.message);
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Structural invariants
// ---------------------------------------------------------------------------

std::vector<Finding> structural_findings(const Metafile& m) {
    std::vector<Finding> out;
    auto err = [&out](std::string path, std::string message) {
        out.push_back({Severity::error, std::move(path), std::move(message)});
    };

    if (m.schema_uri.empty()) err("$schema", "must be non-empty");
    if (!is_uuid(m.id)) err("id", "not a lowercase RFC 4122 UUID");
    if (m.meta_version < 1) err("meta-version", "must be >= 1");

    auto created = parse_timestamp(m.created);
    auto modified = parse_timestamp(m.modified);
    if (!created) err("created", "not a UTC timestamp of the form YYYY-MM-DDTHH:MM:SSZ");
    if (!modified) err("modified", "not a UTC timestamp of the form YYYY-MM-DDTHH:MM:SSZ");
    if (created && modified && *modified < *created) err("modified", "earlier than created");

    if (!is_checksum_string(m.checksum)) {
        err("checksum", "not of the form \"sha256:\" + 64 lowercase hex characters");
    }

    const MetaBlock& meta = m.meta;
    if (meta.name.empty()) err("meta.name", "must be non-empty");

    {
        std::set<std::string> seen;
        for (std::size_t i = 0; i < meta.keywords.size(); ++i) {
            const std::string& kw = meta.keywords[i];
            const std::string path = join_index("meta.keywords", i);
            if (kw.empty()) {
                err(path, "empty keyword");
                continue;
            }
            std::string lowered = kw;
            std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            if (lowered != kw) err(path, "keyword must be lowercase");
            if (!seen.insert(kw).second) err(path, "duplicate keyword \"" + kw + "\"");
        }
    }

    {
        std::set<std::string> seen;
        for (std::size_t i = 0; i < meta.authors.size(); ++i) {
            const Author& a = meta.authors[i];
            const std::string path = join_index("meta.author", i);
            if (a.local_id.empty()) err(join_key(path, "$id"), "must be non-empty");
            else if (!seen.insert(a.local_id).second) {
                err(join_key(path, "$id"), "duplicate author local id \"" + a.local_id + "\"");
            }
            if (a.name.empty()) err(join_key(path, "name"), "must be non-empty");
            if (!is_minimal_email(a.email)) {
                err(join_key(path, "email"),
                    "must contain exactly one \"@\" with non-empty sides");
            }
        }
    }

    if (meta.files.empty()) err("meta.files", "at least one data file is required");
    {
        std::set<std::string> seen_ids;
        for (std::size_t i = 0; i < meta.files.size(); ++i) {
            const DataFileEntry& f = meta.files[i];
            const std::string path = join_index("meta.files", i);
            if (f.local_id.empty()) err(join_key(path, "$id"), "must be non-empty");
            else if (!seen_ids.insert(f.local_id).second) {
                err(join_key(path, "$id"), "duplicate file local id \"" + f.local_id + "\"");
            }
            if (!is_relative_normalized_path(f.path)) {
                err(join_key(path, "path"),
                    "must be a normalized relative path with \"/\" separators");
            }
            if (f.version < 1) err(join_key(path, "version"), "must be >= 1");
            if (!is_checksum_string(f.checksum)) {
                err(join_key(path, "checksum"),
                    "not of the form \"sha256:\" + 64 lowercase hex characters");
            }
            if (f.measurement && f.measurement->kind.empty()) {
                err(join_key(path, "measurement.kind"), "must be non-empty when present");
            }
            std::set<std::string> field_names;
            for (std::size_t k = 0; k < f.fields.size(); ++k) {
                const FieldDef& fd = f.fields[k];
                const std::string fpath = join_index(join_key(path, "fields"), k);
                if (fd.name.empty()) err(join_key(fpath, "name"), "must be non-empty");
                else if (!field_names.insert(fd.name).second) {
                    err(join_key(fpath, "name"), "duplicate field name \"" + fd.name + "\"");
                }
            }
        }
    }

    for (std::size_t i = 0; i < meta.links.size(); ++i) {
        const Link& l = meta.links[i];
        const std::string path = join_index("meta.links", i);
        if (l.fields.size() < 2) {
            err(join_key(path, "fields"), "a link needs at least two field refs");
        }
        std::vector<const FieldRef*> seen;
        for (std::size_t k = 0; k < l.fields.size(); ++k) {
            const FieldRef& r = l.fields[k];
            const std::string rpath = join_index(join_key(path, "fields"), k);
            if (!meta.resolves(r)) {
                err(rpath, "unresolved field ref \"" + r.node_id() + "\"");
            }
            bool dup = std::any_of(seen.begin(), seen.end(),
                                   [&r](const FieldRef* p) { return same_ref(*p, r); });
            if (dup) err(rpath, "duplicate field ref \"" + r.node_id() + "\"");
            seen.push_back(&r);
        }
    }

    if (meta.derived_from) {
        for (std::size_t i = 0; i < meta.derived_from->size(); ++i) {
            const DatasetRef& r = (*meta.derived_from)[i];
            const std::string path = join_index("meta.derived-from", i);
            if (!is_uuid(r.id)) err(path, "ref id is not a lowercase UUID");
            if (r.meta_version < 1) err(path, "ref meta-version must be >= 1");
        }
    }

    return out;
}

// ---------------------------------------------------------------------------
// ValidationReport / validate
// ---------------------------------------------------------------------------

bool ValidationReport::valid() const {
    return error_count() == 0;
}

std::size_t ValidationReport::error_count() const {
    return static_cast<std::size_t>(
        std::count_if(findings.begin(), findings.end(),
                      [](const Finding& f) { return f.severity == Severity::error; }));
}

std::size_t ValidationReport::warning_count() const {
    return findings.size() - error_count();
}

json ValidationReport::to_json() const {
    json errors = json::array();
    json warnings = json::array();
    for (const auto& f : findings) {
        json item = {{"path", f.path}, {"message", f.message}};
        (f.severity == Severity::error ? errors : warnings).push_back(std::move(item));
    }
    return json{{"valid", valid()}, {"errors", std::move(errors)},
                {"warnings", std::move(warnings)}};
}

ValidationReport validate(const Metafile& m, const std::optional<fs::path>& data_root) {
    ValidationReport report;
    report.findings = structural_findings(m);

    if (is_checksum_string(m.checksum) && compute_meta_checksum(m) != m.checksum) {
        report.findings.push_back({Severity::error, "checksum", "meta checksum mismatch"});
    }

    if (data_root) {
        std::error_code ec;
        if (!fs::is_directory(*data_root, ec) || ec) {
            throw IoError("data root is not a readable directory: " + data_root->string());
        }
        for (std::size_t i = 0; i < m.meta.files.size(); ++i) {
            const DataFileEntry& f = m.meta.files[i];
            if (!is_relative_normalized_path(f.path)) continue;  // already reported
            const fs::path p = *data_root / f.path;
            const std::string base = join_index("meta.files", i);
            if (!fs::is_regular_file(p, ec) || ec) {
                report.findings.push_back({Severity::error, join_key(base, "path"),
                                           "missing data file: " + f.path});
                continue;
            }
            std::string actual;
            try {
                actual = compute_file_checksum(p);
            } catch (const IoError& e) {
                report.findings.push_back(
                    {Severity::error, join_key(base, "path"), e.what()});
                continue;
            }
            if (is_checksum_string(f.checksum) && actual != f.checksum) {
                report.findings.push_back({Severity::error, join_key(base, "checksum"),
                                           "file checksum mismatch for " + f.path});
            }
        }
    }

    if (m.meta.keywords.empty()) {
        report.findings.push_back(
            {Severity::warning, "meta.keywords", "no keywords; dataset will be hard to discover"});
    }
    if (m.meta.description.empty()) {
        report.findings.push_back({Severity::warning, "meta.description", "empty description"});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Skeleton generation
// ---------------------------------------------------------------------------

std::string encoding_from_extension(const fs::path& p) {
    static const std::set<std::string> known = {
        "csv", "tsv",  "json", "jsonl", "txt", "md",  "xml", "yaml",    "yml", "html",
        "htm", "pdf",  "png",  "jpg",   "jpeg", "gif", "bmp", "svg",     "mp3", "wav",
        "mp4", "avi",  "mkv",  "parquet", "h5", "hdf5", "npy", "npz",    "zip", "gz"};
    std::string ext = p.extension().string();
    if (ext.size() < 2) return "binary";
    ext.erase(0, 1);  // drop the dot
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return known.count(ext) ? ext : "binary";
}

Metafile generate_skeleton(const fs::path& data_root, const std::string& name,
                           const Clock& clock, const UuidSource& uuid) {
    if (name.empty()) throw UsageError("dataset name must be non-empty");
    std::error_code ec;
    if (!fs::is_directory(data_root, ec) || ec) {
        throw IoError("data root is not a readable directory: " + data_root.string());
    }

    std::vector<std::string> paths;
    for (auto it = fs::recursive_directory_iterator(data_root, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) throw IoError("cannot walk data root: " + ec.message());
        if (!it->is_regular_file()) continue;
        const std::string rel = fs::relative(it->path(), data_root).generic_string();
        bool hidden = false;
        for (const auto& part : fs::path(rel)) {
            if (!part.empty() && part.string().front() == '.') {
                hidden = true;
                break;
            }
        }
        if (hidden) continue;
        if (rel == kMetafileName) continue;  // never index the metafile itself
        paths.push_back(rel);
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) {
        throw EmptyDatasetError("no data files under " + data_root.string());
    }

    Metafile m;
    m.schema_uri = kDefaultSchemaUri;
    m.id = uuid();
    m.meta_version = 1;
    m.created = format_timestamp(clock());
    m.modified = m.created;
    m.meta.name = name;

    int counter = 1;
    for (const auto& rel : paths) {
        DataFileEntry f;
        f.local_id = "f" + std::to_string(counter++);
        f.path = rel;
        f.encoding = encoding_from_extension(rel);
        f.version = 1;
        f.checksum = compute_file_checksum(data_root / rel);
        m.meta.files.push_back(std::move(f));
    }
    m.checksum = compute_meta_checksum(m);
    return m;
}

// ---------------------------------------------------------------------------
// Structural equality
// ---------------------------------------------------------------------------

namespace {

bool eq(const Measurement& a, const Measurement& b) {
    return a.kind == b.kind && a.device == b.device && a.unit == b.unit && a.extra == b.extra;
}

bool eq(const FieldDef& a, const FieldDef& b) {
    return a.name == b.name && a.type == b.type && a.description == b.description &&
           a.extra == b.extra;
}

bool eq(const FieldRef& a, const FieldRef& b) {
    return same_ref(a, b) && a.extra == b.extra;
}

bool eq(const Link& a, const Link& b) {
    if (a.type != b.type || a.description != b.description || a.extra != b.extra) return false;
    if (a.fields.size() != b.fields.size()) return false;
    for (std::size_t i = 0; i < a.fields.size(); ++i) {
        if (!eq(a.fields[i], b.fields[i])) return false;
    }
    return true;
}

bool eq(const Author& a, const Author& b) {
    return a.local_id == b.local_id && a.name == b.name && a.affiliation == b.affiliation &&
           a.email == b.email && a.extra == b.extra;
}

bool eq(const DataFileEntry& a, const DataFileEntry& b) {
    if (a.local_id != b.local_id || a.path != b.path || a.encoding != b.encoding ||
        a.version != b.version || a.checksum != b.checksum ||
        a.description != b.description || a.extra != b.extra) {
        return false;
    }
    if (a.measurement.has_value() != b.measurement.has_value()) return false;
    if (a.measurement && !eq(*a.measurement, *b.measurement)) return false;
    if (a.fields.size() != b.fields.size()) return false;
    for (std::size_t i = 0; i < a.fields.size(); ++i) {
        if (!eq(a.fields[i], b.fields[i])) return false;
    }
    return true;
}

bool eq(const MetaBlock& a, const MetaBlock& b) {
    if (a.name != b.name || a.description != b.description || a.copyright != b.copyright ||
        a.keywords != b.keywords || a.extra != b.extra) {
        return false;
    }
    if (a.authors.size() != b.authors.size() || a.files.size() != b.files.size() ||
        a.links.size() != b.links.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.authors.size(); ++i) {
        if (!eq(a.authors[i], b.authors[i])) return false;
    }
    for (std::size_t i = 0; i < a.files.size(); ++i) {
        if (!eq(a.files[i], b.files[i])) return false;
    }
    for (std::size_t i = 0; i < a.links.size(); ++i) {
        if (!eq(a.links[i], b.links[i])) return false;
    }
    if (a.derived_from.has_value() != b.derived_from.has_value()) return false;
    if (a.derived_from && *a.derived_from != *b.derived_from) return false;
    return true;
}

}  // namespace

bool structurally_equal(const Metafile& a, const Metafile& b) {
    return a.schema_uri == b.schema_uri && a.id == b.id && a.meta_version == b.meta_version &&
           a.created == b.created && a.modified == b.modified && a.checksum == b.checksum &&
           a.extra == b.extra && eq(a.meta, b.meta);
}

}  // namespace dfs
