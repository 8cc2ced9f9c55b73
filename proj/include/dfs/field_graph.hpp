#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dfs/metafile.hpp"

namespace dfs {

// Lowercase tokens split on non-alphanumeric runs and lower-to-upper
// camelCase boundaries; empty tokens dropped. "patientID" -> {patient, id}.
std::vector<std::string> normalize_name(const std::string& raw);

struct NormalizedLabel {
    std::vector<std::string> name_tokens;
    FieldType type = FieldType::string_;

    friend auto operator<=>(const NormalizedLabel&, const NormalizedLabel&) = default;
};

NormalizedLabel label_for(const FieldDef& f);

struct FieldEdge {
    std::string a;  // node ids, a < b
    std::string b;
    std::string link_type;

    friend auto operator<=>(const FieldEdge&, const FieldEdge&) = default;
};

// Labeled undirected graph of a metafile's fields; nodes are
// "file_local_id/field_name", edges come from links (a link with k refs
// induces all k*(k-1)/2 unordered pairs).
class FieldGraph {
public:
    void add_node(const std::string& node_id, NormalizedLabel label);
    void add_edge(const std::string& a, const std::string& b, const std::string& link_type);

    const std::map<std::string, NormalizedLabel>& nodes() const { return nodes_; }
    const std::set<FieldEdge>& edges() const { return edges_; }
    bool empty() const { return nodes_.empty(); }

    std::set<NormalizedLabel> label_set() const;
    std::set<std::pair<NormalizedLabel, NormalizedLabel>> edge_label_pairs() const;

    // Plain-text debug export: node ids first, then "a\tb\tlink_type",
    // one per line, sorted.
    std::string edge_list_text() const;

private:
    std::map<std::string, NormalizedLabel> nodes_;
    std::set<FieldEdge> edges_;
};

FieldGraph build_field_graph(const Metafile& m);

// Reflexive, plus integer ~ number.
bool types_compatible(FieldType a, FieldType b);

// 0.7 * Jaccard(label sets) + 0.3 * Jaccard(edge label-pair sets), with the
// edge term collapsing onto the label term when both graphs are edgeless;
// two entirely empty graphs compare equal (1.0). Symmetric, in [0, 1].
double graph_similarity(const FieldGraph& a, const FieldGraph& b);

// 0 when types are incompatible; otherwise an even blend of name-token
// Jaccard and description term-frequency cosine (name term alone when both
// descriptions are token-free). Symmetric, in [0, 1], 1 on identical fields.
double field_overlap(const FieldDef& a, const FieldDef& b);

}  // namespace dfs
