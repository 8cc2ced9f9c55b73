#include "dfs/field_graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "dfs/errors.hpp"
#include "dfs/kernels.hpp"

namespace dfs {

namespace {

template <typename T>
double jaccard(const std::set<T>& x, const std::set<T>& y) {
    if (x.empty() && y.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& e : x) inter += y.count(e);
    std::size_t uni = x.size() + y.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

std::vector<std::string> normalize_name(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    unsigned char prev = 0;
    for (unsigned char c : text) {
        const bool alnum = c < 128 && std::isalnum(c);
        if (!alnum) {
            if (!cur.empty()) {
                tokens.push_back(cur);
                cur.clear();
            }
            prev = 0;
            continue;
        }
        // camelCase boundary: lower followed by upper starts a new token
        if (std::isupper(c) && prev != 0 && std::islower(prev)) {
            tokens.push_back(cur);
            cur.clear();
        }
        cur.push_back(static_cast<char>(std::tolower(c)));
        prev = c;
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

NormalizedLabel label_for(const FieldDef& field) {
    return NormalizedLabel{normalize_name(field.name), field.type};
}

void FieldGraph::add_node(const std::string& node_id, NormalizedLabel label) {
    nodes_[node_id] = std::move(label);
}

void FieldGraph::add_edge(const std::string& a, const std::string& b,
                          const std::string& link_type) {
    if (a == b) return;
    if (!nodes_.count(a) || !nodes_.count(b)) {
        throw UsageError("edge endpoint is not a known node");
    }
    FieldEdge e{std::min(a, b), std::max(a, b), link_type};
    edges_.insert(std::move(e));
}

std::set<NormalizedLabel> FieldGraph::label_set() const {
    std::set<NormalizedLabel> out;
    for (const auto& [id, label] : nodes_) out.insert(label);
    return out;
}

std::set<std::pair<NormalizedLabel, NormalizedLabel>> FieldGraph::edge_label_pairs() const {
    std::set<std::pair<NormalizedLabel, NormalizedLabel>> out;
    for (const auto& e : edges_) {
        NormalizedLabel la = nodes_.at(e.a);
        NormalizedLabel lb = nodes_.at(e.b);
        if (lb < la) std::swap(la, lb);
        out.emplace(std::move(la), std::move(lb));
    }
    return out;
}

std::string FieldGraph::edge_list_text() const {
    // debug export: sorted node ids first, then "a<TAB>b<TAB>link_type" lines
    std::ostringstream os;
    for (const auto& [id, label] : nodes_) os << id << "\n";
    for (const auto& e : edges_) {
        os << e.a << "\t" << e.b << "\t" << e.link_type << "\n";
    }
    return os.str();
}

FieldGraph build_field_graph(const Metafile& m) {
    FieldGraph g;
    for (const auto& file : m.meta.files) {
        for (const auto& field : file.fields) {
            g.add_node(file.local_id + "/" + field.name, label_for(field));
        }
    }
    for (const auto& link : m.meta.links) {
        for (std::size_t i = 0; i < link.fields.size(); ++i) {
            for (std::size_t k = i + 1; k < link.fields.size(); ++k) {
                const std::string a = link.fields[i].node_id();
                const std::string b = link.fields[k].node_id();
                if (!m.meta.resolves(link.fields[i]) || !m.meta.resolves(link.fields[k])) {
                    continue;  // unresolved refs never reach here via parse
                }
                g.add_edge(a, b, link.type);
            }
        }
    }
    return g;
}

bool types_compatible(FieldType a, FieldType b) {
    if (a == b) return true;
    auto numeric = [](FieldType t) {
        return t == FieldType::integer || t == FieldType::number;
    };
    return numeric(a) && numeric(b);
}

double graph_similarity(const FieldGraph& a, const FieldGraph& b) {
    if (a.empty() && b.empty()) return 1.0;
    const double label_term = jaccard(a.label_set(), b.label_set());
    if (a.edges().empty() && b.edges().empty()) return label_term;
    const double edge_term = jaccard(a.edge_label_pairs(), b.edge_label_pairs());
    return 0.7 * label_term + 0.3 * edge_term;
}

double field_overlap(const FieldDef& gamma, const FieldDef& delta) {
    if (!types_compatible(gamma.type, delta.type)) return 0.0;

    const auto ga = normalize_name(gamma.name);
    const auto gb = normalize_name(delta.name);
    const std::set<std::string> sa(ga.begin(), ga.end());
    const std::set<std::string> sb(gb.begin(), gb.end());
    const double name_sim = jaccard(sa, sb);

    const auto da = normalize_name(gamma.description);
    const auto db = normalize_name(delta.description);
    if (da.empty() && db.empty()) return name_sim;
    if (da.empty() || db.empty()) return 0.5 * name_sim;

    TermVector ca, cb;
    for (const auto& t : da) ca[t] += 1.0;
    for (const auto& t : db) cb[t] += 1.0;
    double desc_sim;
    if (ca == cb) {
        desc_sim = 1.0;  // identical count maps: avoid rounding drift below 1
    } else {
        desc_sim = dot(ca, cb) / (std::sqrt(dot(ca, ca)) * std::sqrt(dot(cb, cb)));
        if (desc_sim > 1.0) desc_sim = 1.0;
    }
    double v = 0.5 * name_sim + 0.5 * desc_sim;
    return v > 1.0 ? 1.0 : v;
}

}  // namespace dfs
