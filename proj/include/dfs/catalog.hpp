#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dfs/kernels.hpp"
#include "dfs/metafile.hpp"

namespace dfs {

// Filesystem dataset store: datasets/<id>/v<N>/metafile.json with the data
// files under the same directory at their relative paths. A written
// (id, version) slot is immutable.
class Repository {
public:
    explicit Repository(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    // Validates (against data_root when given), writes canonical metafile
    // bytes and copies data files. Re-putting identical content is a no-op.
    // Throws ValidationError, ImmutabilityError, IoError.
    DatasetRef put(const Metafile& m,
                   const std::optional<std::filesystem::path>& data_root = std::nullopt) const;

    // Reads, reparses and checksum-verifies the stored metafile.
    // Throws NotFoundError, IntegrityError.
    Metafile get(const DatasetRef& ref) const;

    // id -> stored versions, both in ascending order.
    std::map<std::string, std::set<std::int64_t>> list() const;

    std::filesystem::path slot_dir(const DatasetRef& ref) const;
    std::filesystem::path metafile_path(const DatasetRef& ref) const;

private:
    std::filesystem::path root_;
};

// Bag of terms over a metafile's searchable text: name, description,
// keywords (double weight), field names, field descriptions, measurement
// kinds. Everything is tokenized with normalize_name.
std::map<std::string, std::int64_t> term_counts(const Metafile& m);

// Sublinear term frequency: tf = 1 + ln(count). This raw vector (not yet
// idf-weighted) is what interest profiles consume.
TermVector tf_vector(const std::map<std::string, std::int64_t>& counts);

struct TfIdfIndex {
    std::int64_t doc_count = 0;                       // indexed dataset ids
    std::map<std::string, std::int64_t> df;           // term -> document frequency
    std::map<std::string, TermVector> vectors;        // citation -> unit tf-idf
    std::map<std::string, std::set<std::string>> inverted;  // term -> citations

    // Applies this index's idf to a raw tf vector and normalizes.
    TermVector weighted(const TermVector& tf) const;

    json to_json() const;
    static TfIdfIndex from_json(const json& j);  // rebuilds the inverted map
};

struct IndexBuildResult {
    TfIdfIndex index;
    std::vector<std::string> warnings;  // datasets skipped and why
};

// Indexes the latest version of every dataset id in the repository.
// Datasets whose stored metafile fails to load or validate are skipped
// with a warning. Throws IoError.
IndexBuildResult index_build(const Repository& repo);

void save_index(const TfIdfIndex& ix, const std::filesystem::path& repo_root);
TfIdfIndex load_index(const std::filesystem::path& repo_root);  // NotFoundError, IntegrityError

struct SearchHit {
    DatasetRef ref;
    double score = 0.0;
};

// Top-k datasets by tf-idf cosine against the tokenized query. Only
// positive scores; ties broken by ascending citation string.
std::vector<SearchHit> search(const TfIdfIndex& ix, const std::string& query, std::size_t k);

// Per-user interest profile: unit-norm term weights folded together from
// interacted-with datasets.
struct InterestProfile {
    std::string user_id;
    TermVector weights;
    std::int64_t interaction_count = 0;
    std::set<std::string> seen;  // citation strings
};

// weights' = normalize((1 - lambda) * weights + lambda * normalize(tf(m))).
// The first interaction adopts the document vector exactly.
InterestProfile profile_update(const InterestProfile& p, const Metafile& m, double lambda = 0.3);

// Cosine of the profile against every indexed vector; seen datasets are
// excluded unless include_seen. Same ordering contract as search.
std::vector<SearchHit> recommend(const TfIdfIndex& ix, const InterestProfile& p, std::size_t k,
                                 bool include_seen = false);

// profiles/<user_id>.json under the repository root. Loading a user with
// no stored profile returns a fresh empty one.
InterestProfile load_profile(const std::filesystem::path& repo_root, const std::string& user_id);
void save_profile(const std::filesystem::path& repo_root, const InterestProfile& p);

}  // namespace dfs
