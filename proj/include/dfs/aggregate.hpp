#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dfs/metafile.hpp"

namespace dfs {

struct AggregationConfig {
    double epsilon = 0.1;  // reject when graph similarity <= epsilon
    double sigma = 0.6;    // accept field pairs with overlap >= sigma

    // Throws UsageError unless 0 <= epsilon < 1 and 0 < sigma <= 1.
    void check() const;
};

struct MatchedPair {
    FieldRef alpha;  // in the first input's coordinates
    FieldRef beta;   // in the second input's original coordinates
    double overlap = 0.0;
};

struct AggregationReport {
    double similarity_score = 0.0;
    std::vector<MatchedPair> matched_pairs;
    std::vector<std::string> files_added;  // result-coordinate file local ids
    DatasetRef result_ref;
};

void to_json(json& j, const AggregationReport& r);

// Result metafile under construction plus the bookkeeping metajoin needs:
// which incoming files have already landed and under which local ids.
struct MergeState {
    Metafile acc;
    std::map<std::string, std::string> beta_file_map;  // beta $id -> acc $id
    std::vector<std::string> files_added;
};

// Ensures delta's file exists in the accumulator (identified by content
// checksum; colliding paths are remapped "-2", "-3", ... before the
// extension) and appends one "aggregation" link for the pair. Appending an
// identical link twice is a no-op.
void metajoin(MergeState& st, const Metafile& beta, const FieldRef& gamma, const FieldRef& delta,
              double overlap);

struct AggregationResult {
    Metafile metafile;
    AggregationReport report;
};

// Gate on graph similarity, scan all field pairs in deterministic order
// (file order, then field order), metajoin every pair at or above sigma,
// and assemble a new dataset with fresh identity, merged descriptive
// metadata, and provenance refs to both inputs. Inputs are not mutated.
// Throws IncompatibleDatasetsError, NoMatchError, CollisionError, UsageError.
AggregationResult aggregate(const Metafile& alpha, const Metafile& beta,
                            const AggregationConfig& cfg, std::int64_t now,
                            const UuidSource& uuid = random_uuid);

}  // namespace dfs
