#include "dfs/kernels.hpp"

#include <cmath>

#include "dfs/field_graph.hpp"

namespace dfs {

double dot(const TermVector& a, const TermVector& b) {
    const TermVector& small = a.size() <= b.size() ? a : b;
    const TermVector& large = a.size() <= b.size() ? b : a;
    double sum = 0.0;
    for (const auto& [term, w] : small) {
        auto it = large.find(term);
        if (it != large.end()) sum += w * it->second;
    }
    return sum;
}

TermVector l2_normalized(const TermVector& v) {
    double sq = 0.0;
    for (const auto& [term, w] : v) sq += w * w;
    if (sq == 0.0) return v;
    const double inv = 1.0 / std::sqrt(sq);
    TermVector out = v;
    for (auto& [term, w] : out) w *= inv;
    return out;
}

double idf_weight(std::int64_t doc_count, std::int64_t df) {
    return std::log((1.0 + static_cast<double>(doc_count)) / (1.0 + static_cast<double>(df))) +
           1.0;
}

namespace kernels {

namespace {

double cosine_one(const TermVector& query, double query_norm, const TermVector& doc) {
    double doc_sq = 0.0;
    for (const auto& [term, w] : doc) doc_sq += w * w;
    if (query_norm == 0.0 || doc_sq == 0.0) return 0.0;
    double c = dot(query, doc) / (query_norm * std::sqrt(doc_sq));
    if (c < 0.0) c = 0.0;
    if (c > 1.0) c = 1.0;
    return c;
}

double query_norm_of(const TermVector& query) {
    double sq = 0.0;
    for (const auto& [term, w] : query) sq += w * w;
    return std::sqrt(sq);
}

void finalize_one(TermVector& v, const std::map<std::string, std::int64_t>& df,
                  std::int64_t doc_count) {
    double sq = 0.0;
    for (auto& [term, w] : v) {
        auto it = df.find(term);
        const std::int64_t seen = it == df.end() ? 0 : it->second;
        w *= idf_weight(doc_count, seen);
        sq += w * w;
    }
    if (sq == 0.0) return;
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& [term, w] : v) w *= inv;
}

}  // namespace

std::vector<double> cosine_scan_serial(const TermVector& query,
                                       const std::vector<const TermVector*>& corpus) {
    const double qn = query_norm_of(query);
    std::vector<double> out(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        out[i] = cosine_one(query, qn, *corpus[i]);
    }
    return out;
}

std::vector<double> cosine_scan(const TermVector& query,
                                const std::vector<const TermVector*>& corpus) {
    const double qn = query_norm_of(query);
    std::vector<double> out(corpus.size());
    const std::int64_t n = static_cast<std::int64_t>(corpus.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = cosine_one(query, qn, *corpus[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::vector<double> overlap_matrix_serial(const std::vector<const FieldDef*>& a,
                                          const std::vector<const FieldDef*>& b) {
    std::vector<double> out(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i * b.size() + j] = field_overlap(*a[i], *b[j]);
        }
    }
    return out;
}

std::vector<double> overlap_matrix(const std::vector<const FieldDef*>& a,
                                   const std::vector<const FieldDef*>& b) {
    const std::size_t nb = b.size();
    std::vector<double> out(a.size() * nb);
    const std::int64_t total = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < total; ++k) {
        const std::size_t i = static_cast<std::size_t>(k) / nb;
        const std::size_t j = static_cast<std::size_t>(k) % nb;
        out[static_cast<std::size_t>(k)] = field_overlap(*a[i], *b[j]);
    }
    return out;
}

void finalize_tfidf_serial(std::vector<TermVector>& vectors,
                           const std::map<std::string, std::int64_t>& df,
                           std::int64_t doc_count) {
    for (auto& v : vectors) finalize_one(v, df, doc_count);
}

void finalize_tfidf(std::vector<TermVector>& vectors,
                    const std::map<std::string, std::int64_t>& df, std::int64_t doc_count) {
    const std::int64_t n = static_cast<std::int64_t>(vectors.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        finalize_one(vectors[static_cast<std::size_t>(i)], df, doc_count);
    }
}

}  // namespace kernels
}  // namespace dfs
