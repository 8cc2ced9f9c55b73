#include "dfs/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "dfs/canonical.hpp"
#include "dfs/checksum.hpp"
#include "dfs/versioning.hpp"

namespace dfs {

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + p.string());
    return buf.str();
}

std::optional<std::string> read_file_if_exists(const fs::path& p) {
    std::error_code ec;
    if (!fs::is_regular_file(p, ec) || ec) return std::nullopt;
    return read_file(p);
}

// write-temp-then-rename so readers never observe a half-written document
void write_file_atomic(const fs::path& p, const std::string& bytes) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create " + p.parent_path().string() + ": " + ec.message());
    static std::mt19937_64 rng(std::random_device{}());
    const fs::path tmp = p.parent_path() / (".tmp-" + std::to_string(rng()) + "-" +
                                            p.filename().string());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw IoError("cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, p, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

json parse_stored_json(const std::string& bytes, const fs::path& origin) {
    try {
        return json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw IntegrityError("corrupt document " + origin.string() + ": " + e.what());
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Repository
// ---------------------------------------------------------------------------

Repository::Repository(fs::path root) : root_(std::move(root)) {}

fs::path Repository::slot_dir(const DatasetRef& ref) const {
    return root_ / "datasets" / ref.id / ("v" + std::to_string(ref.meta_version));
}

fs::path Repository::metafile_path(const DatasetRef& ref) const {
    return slot_dir(ref) / kMetafileName;
}

DatasetRef Repository::put(const Metafile& m, const std::optional<fs::path>& data_root) const {
    ValidationReport report = validate(m, data_root);
    if (!report.valid()) {
        const Finding* first = nullptr;
        for (const auto& f : report.findings) {
            if (f.severity == Severity::error) {
                first = &f;
                break;
            }
        }
        throw ValidationError("refusing to store an invalid metafile (" +
                              std::to_string(report.error_count()) + " error(s); first: " +
                              first->path + ": " + first->message + ")");
    }

    const DatasetRef ref = m.ref();
    const std::string bytes = canonical_bytes(m);
    const fs::path slot = slot_dir(ref);

    if (auto existing = read_file_if_exists(slot / kMetafileName)) {
        if (*existing == bytes) return ref;  // idempotent re-put
        throw ImmutabilityError("slot " + ref.str() +
                                " already exists with different content");
    }
    std::error_code ec;
    if (fs::exists(slot, ec)) {
        throw ImmutabilityError("slot " + ref.str() + " already exists without a metafile");
    }

    // Stage the whole slot next to its final location, then rename once.
    static std::mt19937_64 rng(std::random_device{}());
    const fs::path parent = slot.parent_path();
    fs::create_directories(parent, ec);
    if (ec) throw IoError("cannot create " + parent.string() + ": " + ec.message());
    const fs::path stage = parent / (".tmp-v" + std::to_string(ref.meta_version) + "-" +
                                     std::to_string(rng()));
    try {
        fs::create_directories(stage);
        if (data_root) {
            for (const auto& f : m.meta.files) {
                const fs::path dst = stage / f.path;
                fs::create_directories(dst.parent_path());
                fs::copy_file(*data_root / f.path, dst);
            }
        }
        {
            std::ofstream out(stage / kMetafileName, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot write " + (stage / kMetafileName).string());
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            out.flush();
            if (!out) throw IoError("cannot write " + (stage / kMetafileName).string());
        }
        fs::rename(stage, slot);
    } catch (const fs::filesystem_error& e) {
        fs::remove_all(stage, ec);
        throw IoError(std::string("cannot store dataset: ") + e.what());
    } catch (...) {
        fs::remove_all(stage, ec);
        throw;
    }
    return ref;
}

Metafile Repository::get(const DatasetRef& ref) const {
    const fs::path path = metafile_path(ref);
    auto bytes = read_file_if_exists(path);
    if (!bytes) throw NotFoundError("no dataset " + ref.str() + " in repository");

    Metafile m;
    try {
        m = parse_metafile(*bytes);
    } catch (const Error& e) {
        throw IntegrityError("stored metafile for " + ref.str() +
                             " is corrupt: " + e.what());
    }
    if (compute_meta_checksum(m) != m.checksum) {
        throw IntegrityError("stored metafile for " + ref.str() +
                             " fails its meta checksum");
    }
    if (m.id != ref.id || m.meta_version != ref.meta_version) {
        throw IntegrityError("stored metafile identity " + m.ref().str() +
                             " does not match its slot " + ref.str());
    }
    return m;
}

std::map<std::string, std::set<std::int64_t>> Repository::list() const {
    std::map<std::string, std::set<std::int64_t>> out;
    const fs::path base = root_ / "datasets";
    std::error_code ec;
    if (!fs::is_directory(base, ec) || ec) return out;

    for (const auto& id_entry : fs::directory_iterator(base, ec)) {
        if (!id_entry.is_directory()) continue;
        const std::string id = id_entry.path().filename().string();
        if (!is_uuid(id)) continue;
        for (const auto& v_entry : fs::directory_iterator(id_entry.path(), ec)) {
            if (!v_entry.is_directory()) continue;
            const std::string name = v_entry.path().filename().string();
            if (name.size() < 2 || name[0] != 'v') continue;
            std::int64_t version = 0;
            bool numeric = true;
            for (std::size_t i = 1; i < name.size(); ++i) {
                if (name[i] < '0' || name[i] > '9') {
                    numeric = false;
                    break;
                }
                version = version * 10 + (name[i] - '0');
            }
            if (!numeric || version < 1 || (name.size() > 2 && name[1] == '0')) continue;
            std::error_code file_ec;
            if (!fs::is_regular_file(v_entry.path() / kMetafileName, file_ec)) continue;
            out[id].insert(version);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Document vectors
// ---------------------------------------------------------------------------

std::map<std::string, std::int64_t> term_counts(const Metafile& m) {
    std::map<std::string, std::int64_t> counts;
    auto add = [&counts](const std::string& text, std::int64_t weight) {
        for (const auto& token : normalize_name(text)) counts[token] += weight;
    };
    add(m.meta.name, 1);
    add(m.meta.description, 1);
    for (const auto& kw : m.meta.keywords) add(kw, 2);
    for (const auto& file : m.meta.files) {
        for (const auto& field : file.fields) {
            add(field.name, 1);
            add(field.description, 1);
        }
        if (file.measurement) add(file.measurement->kind, 1);
    }
    return counts;
}

TermVector tf_vector(const std::map<std::string, std::int64_t>& counts) {
    TermVector out;
    for (const auto& [term, count] : counts) {
        if (count > 0) out[term] = 1.0 + std::log(static_cast<double>(count));
    }
    return out;
}

TermVector TfIdfIndex::weighted(const TermVector& tf) const {
    TermVector out;
    for (const auto& [term, w] : tf) {
        auto it = df.find(term);
        const std::int64_t seen = it == df.end() ? 0 : it->second;
        const double v = w * idf_weight(doc_count, seen);
        if (v != 0.0) out[term] = v;
    }
    return l2_normalized(out);
}

json TfIdfIndex::to_json() const {
    json vecs = json::object();
    for (const auto& [citation, vec] : vectors) {
        json terms = json::object();
        for (const auto& [term, w] : vec) terms[term] = w;
        vecs[citation] = std::move(terms);
    }
    return json{{"doc-count", doc_count}, {"df", df}, {"vectors", std::move(vecs)}};
}

TfIdfIndex TfIdfIndex::from_json(const json& j) {
    TfIdfIndex ix;
    try {
        ix.doc_count = j.at("doc-count").get<std::int64_t>();
        for (const auto& [term, count] : j.at("df").items()) {
            ix.df[term] = count.get<std::int64_t>();
        }
        for (const auto& [citation, terms] : j.at("vectors").items()) {
            if (!DatasetRef::parse(citation)) {
                throw IntegrityError("index holds a malformed citation \"" + citation + "\"");
            }
            TermVector vec;
            for (const auto& [term, w] : terms.items()) {
                vec[term] = w.get<double>();
                ix.inverted[term].insert(citation);
            }
            ix.vectors[citation] = std::move(vec);
        }
    } catch (const json::exception& e) {
        throw IntegrityError(std::string("index document has the wrong shape: ") + e.what());
    }
    return ix;
}

// ---------------------------------------------------------------------------
// Index build / persistence
// ---------------------------------------------------------------------------

IndexBuildResult index_build(const Repository& repo) {
    IndexBuildResult out;
    std::vector<std::string> citations;
    std::vector<TermVector> vectors;

    for (const auto& [id, versions] : repo.list()) {
        const DatasetRef ref{id, *versions.rbegin()};  // latest version only
        try {
            const Metafile m = repo.get(ref);
            const ValidationReport report = validate(m);
            if (!report.valid()) {
                std::string reason = "invalid";
                for (const auto& f : report.findings) {
                    if (f.severity == Severity::error) {
                        reason = f.path + ": " + f.message;
                        break;
                    }
                }
                out.warnings.push_back("skipped " + ref.str() + ": " + reason);
                continue;
            }
            citations.push_back(ref.str());
            vectors.push_back(tf_vector(term_counts(m)));
        } catch (const Error& e) {
            out.warnings.push_back("skipped " + ref.str() + ": " + e.what());
        }
    }

    TfIdfIndex& ix = out.index;
    ix.doc_count = static_cast<std::int64_t>(citations.size());
    for (const auto& vec : vectors) {
        for (const auto& [term, w] : vec) ix.df[term] += 1;
    }
    kernels::finalize_tfidf(vectors, ix.df, ix.doc_count);
    for (std::size_t i = 0; i < citations.size(); ++i) {
        for (const auto& [term, w] : vectors[i]) ix.inverted[term].insert(citations[i]);
        ix.vectors[citations[i]] = std::move(vectors[i]);
    }
    return out;
}

void save_index(const TfIdfIndex& ix, const fs::path& repo_root) {
    write_file_atomic(repo_root / "index.json", canonical_bytes(ix.to_json()));
}

TfIdfIndex load_index(const fs::path& repo_root) {
    const fs::path path = repo_root / "index.json";
    auto bytes = read_file_if_exists(path);
    if (!bytes) throw NotFoundError("no index at " + path.string() + " (run `index build`)");
    return TfIdfIndex::from_json(parse_stored_json(*bytes, path));
}

// ---------------------------------------------------------------------------
// Search / recommendation
// ---------------------------------------------------------------------------

namespace {

std::vector<SearchHit> ranked_hits(const TfIdfIndex& ix, const TermVector& query, std::size_t k,
                                   const std::set<std::string>* exclude) {
    std::vector<SearchHit> hits;
    if (query.empty() || ix.vectors.empty()) return hits;

    std::vector<const std::string*> citations;
    std::vector<const TermVector*> corpus;
    citations.reserve(ix.vectors.size());
    corpus.reserve(ix.vectors.size());
    for (const auto& [citation, vec] : ix.vectors) {  // map order = ascending citation
        if (exclude != nullptr && exclude->count(citation)) continue;
        citations.push_back(&citation);
        corpus.push_back(&vec);
    }

    const std::vector<double> scores = kernels::cosine_scan(query, corpus);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (scores[i] <= 0.0) continue;
        auto ref = DatasetRef::parse(*citations[i]);
        if (!ref) continue;
        hits.push_back(SearchHit{std::move(*ref), scores[i]});
    }
    // stable sort keeps the ascending-citation input order within equal scores
    std::stable_sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        return a.score > b.score;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

}  // namespace

std::vector<SearchHit> search(const TfIdfIndex& ix, const std::string& query, std::size_t k) {
    std::map<std::string, std::int64_t> counts;
    for (const auto& token : normalize_name(query)) counts[token] += 1;
    const TermVector q = ix.weighted(tf_vector(counts));
    return ranked_hits(ix, q, k, nullptr);
}

std::vector<SearchHit> recommend(const TfIdfIndex& ix, const InterestProfile& p, std::size_t k,
                                 bool include_seen) {
    return ranked_hits(ix, p.weights, k, include_seen ? nullptr : &p.seen);
}

// ---------------------------------------------------------------------------
// Interest profiles
// ---------------------------------------------------------------------------

InterestProfile profile_update(const InterestProfile& p, const Metafile& m, double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw UsageError("lambda must be in (0, 1]");

    const TermVector doc = l2_normalized(tf_vector(term_counts(m)));
    InterestProfile out = p;
    if (p.interaction_count == 0 || p.weights.empty()) {
        out.weights = doc;  // first interaction adopts the document vector exactly
    } else {
        TermVector mixed;
        for (const auto& [term, w] : p.weights) mixed[term] += (1.0 - lambda) * w;
        for (const auto& [term, w] : doc) mixed[term] += lambda * w;
        for (auto it = mixed.begin(); it != mixed.end();) {
            it = it->second <= 0.0 ? mixed.erase(it) : std::next(it);
        }
        out.weights = l2_normalized(mixed);
    }
    out.interaction_count = p.interaction_count + 1;
    out.seen.insert(m.ref().str());
    return out;
}

InterestProfile load_profile(const fs::path& repo_root, const std::string& user_id) {
    const fs::path path = repo_root / "profiles" / (user_id + ".json");
    auto bytes = read_file_if_exists(path);
    if (!bytes) return InterestProfile{user_id, {}, 0, {}};

    const json j = parse_stored_json(*bytes, path);
    InterestProfile p;
    try {
        p.user_id = j.at("user-id").get<std::string>();
        for (const auto& [term, w] : j.at("weights").items()) {
            p.weights[term] = w.get<double>();
        }
        p.interaction_count = j.at("interaction-count").get<std::int64_t>();
        for (const auto& citation : j.at("seen")) {
            p.seen.insert(citation.get<std::string>());
        }
    } catch (const json::exception& e) {
        throw IntegrityError("profile document " + path.string() +
                             " has the wrong shape: " + e.what());
    }
    if (p.user_id != user_id) {
        throw IntegrityError("profile document " + path.string() + " belongs to user \"" +
                             p.user_id + "\"");
    }
    return p;
}

void save_profile(const fs::path& repo_root, const InterestProfile& p) {
    json weights = json::object();
    for (const auto& [term, w] : p.weights) weights[term] = w;
    const json doc{{"user-id", p.user_id},
                   {"weights", std::move(weights)},
                   {"interaction-count", p.interaction_count},
                   {"seen", p.seen}};
    write_file_atomic(repo_root / "profiles" / (p.user_id + ".json"), canonical_bytes(doc));
}

}  // namespace dfs
