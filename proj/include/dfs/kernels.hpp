#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dfs/field_graph.hpp"

namespace dfs {

// Sparse term -> weight vector. std::map keeps iteration (and therefore
// accumulation and serialization order) deterministic.
using TermVector = std::map<std::string, double>;

double dot(const TermVector& a, const TermVector& b);
TermVector l2_normalized(const TermVector& v);  // empty stays empty; zero weights dropped

// Smoothed inverse document frequency: ln((1 + N) / (1 + df)) + 1.
double idf_weight(std::int64_t doc_count, std::int64_t df);

// Hot loops, each in two forms: a serial reference and an OpenMP version.
// Every output element is computed independently by exactly one thread with
// identical per-element arithmetic, so the two forms match bit for bit; the
// tests hold them to that and bench/ compares their throughput.
namespace kernels {

// Cosine of one unit-norm query against every unit-norm corpus vector.
// Scores clamped to [0, 1].
std::vector<double> cosine_scan_serial(const TermVector& query,
                                       const std::vector<const TermVector*>& corpus);
std::vector<double> cosine_scan(const TermVector& query,
                                const std::vector<const TermVector*>& corpus);

// All-pairs field_overlap, row-major: result[i * b.size() + j].
std::vector<double> overlap_matrix_serial(const std::vector<const FieldDef*>& a,
                                          const std::vector<const FieldDef*>& b);
std::vector<double> overlap_matrix(const std::vector<const FieldDef*>& a,
                                   const std::vector<const FieldDef*>& b);

// Raw tf vectors -> unit-norm tf-idf, in place.
void finalize_tfidf_serial(std::vector<TermVector>& vectors,
                           const std::map<std::string, std::int64_t>& df,
                           std::int64_t doc_count);
void finalize_tfidf(std::vector<TermVector>& vectors,
                    const std::map<std::string, std::int64_t>& df, std::int64_t doc_count);

}  // namespace kernels

}  // namespace dfs
