#include "dfs/aggregate.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>

#include "dfs/field_graph.hpp"
#include "dfs/kernels.hpp"
#include "dfs/versioning.hpp"

namespace dfs {

namespace {

std::string remapped_path(const std::string& rel, int n) {
    std::filesystem::path p(rel);
    const std::string suffixed = p.stem().string() + "-" + std::to_string(n) +
                                 p.extension().string();
    return (p.parent_path() / suffixed).generic_string();
}

std::string overlap_text(double overlap) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", overlap);
    return buf;
}

constexpr int kMaxRemapAttempts = 10000;

}  // namespace

void AggregationConfig::check() const {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw UsageError("epsilon must be in [0, 1)");
    }
    if (!(sigma > 0.0 && sigma <= 1.0)) {
        throw UsageError("sigma must be in (0, 1]");
    }
}

void to_json(json& j, const AggregationReport& r) {
    json pairs = json::array();
    for (const auto& p : r.matched_pairs) {
        pairs.push_back(json{
            {"alpha", {{"file", p.alpha.file_local_id}, {"field", p.alpha.field_name}}},
            {"beta", {{"file", p.beta.file_local_id}, {"field", p.beta.field_name}}},
            {"overlap", p.overlap},
        });
    }
    j = json{
        {"similarity-score", r.similarity_score},
        {"matched-pairs", std::move(pairs)},
        {"files-added", r.files_added},
        {"result", r.result_ref.str()},
    };
}

void metajoin(MergeState& st, const Metafile& beta, const FieldRef& gamma, const FieldRef& delta,
              double overlap) {
    if (!st.acc.meta.resolves(gamma)) {
        throw UsageError("gamma does not resolve in the accumulator: " + gamma.node_id());
    }
    const DataFileEntry* source = beta.meta.find_file(delta.file_local_id);
    const FieldDef* source_field = source ? source->find_field(delta.field_name) : nullptr;
    if (source_field == nullptr) {
        throw UsageError("delta does not resolve in beta: " + delta.node_id());
    }

    std::string mapped_id;
    if (auto it = st.beta_file_map.find(source->local_id); it != st.beta_file_map.end()) {
        mapped_id = it->second;
    } else {
        const DataFileEntry* same = nullptr;
        for (const auto& f : st.acc.meta.files) {
            if (f.checksum == source->checksum) {
                same = &f;
                break;
            }
        }
        if (same != nullptr) {
            mapped_id = same->local_id;
        } else {
            DataFileEntry imported = *source;
            auto path_taken = [&st](const std::string& p) {
                return std::any_of(st.acc.meta.files.begin(), st.acc.meta.files.end(),
                                   [&p](const DataFileEntry& f) { return f.path == p; });
            };
            if (path_taken(imported.path)) {
                int n = 2;
                std::string candidate;
                for (; n < kMaxRemapAttempts; ++n) {
                    candidate = remapped_path(imported.path, n);
                    if (!path_taken(candidate)) break;
                }
                if (n >= kMaxRemapAttempts) {
                    throw CollisionError("cannot find a free path for \"" + imported.path + "\"");
                }
                imported.path = candidate;
            }
            if (st.acc.meta.find_file(imported.local_id) != nullptr) {
                int n = 2;
                std::string candidate;
                for (; n < kMaxRemapAttempts; ++n) {
                    candidate = imported.local_id + "-" + std::to_string(n);
                    if (st.acc.meta.find_file(candidate) == nullptr) break;
                }
                if (n >= kMaxRemapAttempts) {
                    throw CollisionError("cannot find a free local id for \"" +
                                         imported.local_id + "\"");
                }
                imported.local_id = candidate;
            }
            mapped_id = imported.local_id;
            st.acc.meta.files.push_back(std::move(imported));
            st.files_added.push_back(mapped_id);
        }
        st.beta_file_map.emplace(source->local_id, mapped_id);
    }

    // Reused-by-checksum entries may describe fewer fields than beta's entry
    // for the same bytes; carry the field def over so the link resolves.
    {
        auto it = std::find_if(st.acc.meta.files.begin(), st.acc.meta.files.end(),
                               [&mapped_id](const DataFileEntry& f) {
                                   return f.local_id == mapped_id;
                               });
        if (it->find_field(delta.field_name) == nullptr) {
            it->fields.push_back(*source_field);
        }
    }

    FieldRef gamma_ref{gamma.file_local_id, gamma.field_name};
    FieldRef delta_ref{mapped_id, delta.field_name};
    // Checksum reuse can collapse the pair onto a single field (matching a
    // field with itself); a link would be degenerate, so only the file-level
    // merge above applies.
    if (same_ref(gamma_ref, delta_ref)) return;
    Link link;
    link.type = "aggregation";
    link.description = "matched " + gamma_ref.node_id() + " ↔ " + delta_ref.node_id() +
                       " (overlap=" + overlap_text(overlap) + ")";
    link.fields = {std::move(gamma_ref), std::move(delta_ref)};

    for (const auto& existing : st.acc.meta.links) {
        if (same_link(existing, link)) return;  // idempotent
    }
    st.acc.meta.links.push_back(std::move(link));
}

AggregationResult aggregate(const Metafile& alpha, const Metafile& beta,
                            const AggregationConfig& cfg, std::int64_t now,
                            const UuidSource& uuid) {
    cfg.check();
    if (alpha.id == beta.id && alpha.meta_version == beta.meta_version) {
        throw UsageError("cannot aggregate a dataset version with itself: " + alpha.ref().str());
    }

    const double s = graph_similarity(build_field_graph(alpha), build_field_graph(beta));
    if (s <= cfg.epsilon) {
        throw IncompatibleDatasetsError(
            s, cfg.epsilon,
            "datasets are not comparable: graph similarity " + std::to_string(s) +
                " <= epsilon " + std::to_string(cfg.epsilon));
    }

    // Flatten both field lists in file order, then field order.
    std::vector<const FieldDef*> fa, fb;
    std::vector<FieldRef> ra, rb;
    for (const auto& file : alpha.meta.files) {
        for (const auto& field : file.fields) {
            fa.push_back(&field);
            ra.push_back(FieldRef{file.local_id, field.name});
        }
    }
    for (const auto& file : beta.meta.files) {
        for (const auto& field : file.fields) {
            fb.push_back(&field);
            rb.push_back(FieldRef{file.local_id, field.name});
        }
    }

    const std::vector<double> overlaps = kernels::overlap_matrix(fa, fb);
    std::vector<MatchedPair> matches;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        for (std::size_t j = 0; j < fb.size(); ++j) {
            const double v = overlaps[i * fb.size() + j];
            if (v >= cfg.sigma) matches.push_back(MatchedPair{ra[i], rb[j], v});
        }
    }
    if (matches.empty()) {
        throw NoMatchError(s, "graph similarity " + std::to_string(s) +
                                  " passed the gate, but no field pair reached sigma " +
                                  std::to_string(cfg.sigma));
    }

    MergeState st;
    st.acc.schema_uri = alpha.schema_uri;
    st.acc.id = uuid();
    st.acc.meta_version = 1;
    st.acc.created = format_timestamp(now);
    st.acc.modified = st.acc.created;

    MetaBlock& meta = st.acc.meta;
    meta.name = alpha.meta.name + " + " + beta.meta.name;
    meta.description = alpha.meta.description + "\n---\n" + beta.meta.description;
    if (alpha.meta.copyright.empty()) {
        meta.copyright = beta.meta.copyright;
    } else if (beta.meta.copyright.empty() || beta.meta.copyright == alpha.meta.copyright) {
        meta.copyright = alpha.meta.copyright;
    } else {
        meta.copyright = alpha.meta.copyright + "; " + beta.meta.copyright;
    }
    {
        std::set<std::string> kw(alpha.meta.keywords.begin(), alpha.meta.keywords.end());
        kw.insert(beta.meta.keywords.begin(), beta.meta.keywords.end());
        meta.keywords.assign(kw.begin(), kw.end());
    }

    meta.authors = alpha.meta.authors;
    for (const auto& incoming : beta.meta.authors) {
        const bool dup = std::any_of(
            meta.authors.begin(), meta.authors.end(), [&incoming](const Author& a) {
                return !incoming.email.empty() ? a.email == incoming.email
                                               : a.local_id == incoming.local_id;
            });
        if (dup) continue;
        Author added = incoming;
        auto id_taken = [&meta](const std::string& id) {
            return std::any_of(meta.authors.begin(), meta.authors.end(),
                               [&id](const Author& a) { return a.local_id == id; });
        };
        if (id_taken(added.local_id)) {
            int n = 2;
            std::string candidate;
            for (; n < kMaxRemapAttempts; ++n) {
                candidate = added.local_id + "-" + std::to_string(n);
                if (!id_taken(candidate)) break;
            }
            if (n >= kMaxRemapAttempts) {
                throw CollisionError("cannot find a free author local id for \"" +
                                     added.local_id + "\"");
            }
            added.local_id = candidate;
        }
        meta.authors.push_back(std::move(added));
    }

    meta.files = alpha.meta.files;
    meta.links = alpha.meta.links;
    const std::size_t alpha_link_count = meta.links.size();

    for (const auto& m : matches) {
        metajoin(st, beta, m.alpha, m.beta, m.overlap);
    }

    // Splice beta's links (rewritten into result coordinates) between alpha's
    // links and the aggregation links. Links touching files that never made it
    // into the result cannot be rewritten and are dropped.
    std::vector<Link> beta_links;
    for (const auto& l : beta.meta.links) {
        Link rewritten = l;
        bool ok = true;
        for (auto& ref : rewritten.fields) {
            auto it = st.beta_file_map.find(ref.file_local_id);
            if (it == st.beta_file_map.end()) {
                ok = false;
                break;
            }
            ref.file_local_id = it->second;
            if (!meta.resolves(ref)) {
                ok = false;
                break;
            }
        }
        if (ok) beta_links.push_back(std::move(rewritten));
    }
    {
        std::vector<Link> merged;
        merged.reserve(meta.links.size() + beta_links.size());
        auto push_unique = [&merged](const Link& l) {
            const bool dup = std::any_of(merged.begin(), merged.end(),
                                         [&l](const Link& e) { return same_link(e, l); });
            if (!dup) merged.push_back(l);
        };
        for (std::size_t i = 0; i < alpha_link_count; ++i) push_unique(meta.links[i]);
        for (const auto& l : beta_links) push_unique(l);
        for (std::size_t i = alpha_link_count; i < meta.links.size(); ++i) {
            push_unique(meta.links[i]);
        }
        meta.links = std::move(merged);
    }

    meta.derived_from = std::vector<DatasetRef>{alpha.ref(), beta.ref()};
    st.acc.checksum = compute_meta_checksum(st.acc);

    AggregationReport report;
    report.similarity_score = s;
    report.matched_pairs = std::move(matches);
    report.files_added = st.files_added;
    report.result_ref = st.acc.ref();
    return AggregationResult{std::move(st.acc), std::move(report)};
}

}  // namespace dfs
