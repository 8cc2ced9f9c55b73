// Serial reference vs OpenMP form of the three hot loops, on synthetic
// corpora with deterministic content per problem size so both forms see
// identical input.

#include <benchmark/benchmark.h>

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "dfs/kernels.hpp"
#include "dfs/metafile.hpp"

namespace {

std::string vocab_word(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "term%03zu", i % 400);
    return buf;
}

dfs::TermVector random_unit_vector(std::mt19937_64& rng, int terms) {
    dfs::TermVector v;
    std::uniform_int_distribution<std::size_t> pick(0, 399);
    std::uniform_real_distribution<double> weight(0.1, 5.0);
    for (int t = 0; t < terms; ++t) v[vocab_word(pick(rng))] = weight(rng);
    return dfs::l2_normalized(v);
}

struct CosineData {
    dfs::TermVector query;
    std::vector<dfs::TermVector> corpus;
    std::vector<const dfs::TermVector*> view;
};

CosineData cosine_data(std::int64_t docs) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(docs));
    CosineData d;
    d.query = random_unit_vector(rng, 40);
    d.corpus.reserve(docs);
    for (std::int64_t i = 0; i < docs; ++i) d.corpus.push_back(random_unit_vector(rng, 32));
    for (const auto& v : d.corpus) d.view.push_back(&v);
    return d;
}

void bm_cosine_scan_serial(benchmark::State& state) {
    const CosineData d = cosine_data(state.range(0));
    for (auto _ : state) {
        auto scores = dfs::kernels::cosine_scan_serial(d.query, d.view);
        benchmark::DoNotOptimize(scores);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_cosine_scan_parallel(benchmark::State& state) {
    const CosineData d = cosine_data(state.range(0));
    for (auto _ : state) {
        auto scores = dfs::kernels::cosine_scan(d.query, d.view);
        benchmark::DoNotOptimize(scores);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct OverlapData {
    std::vector<dfs::FieldDef> a, b;
    std::vector<const dfs::FieldDef*> va, vb;
};

OverlapData overlap_data(std::int64_t fields) {
    std::mt19937_64 rng(2000 + static_cast<std::uint64_t>(fields));
    std::uniform_int_distribution<std::size_t> pick(0, 399);
    std::uniform_int_distribution<int> words(3, 8);
    const dfs::FieldType types[] = {dfs::FieldType::string_, dfs::FieldType::integer,
                                    dfs::FieldType::number, dfs::FieldType::datetime};
    OverlapData d;
    auto make = [&](std::vector<dfs::FieldDef>& out) {
        for (std::int64_t i = 0; i < fields; ++i) {
            dfs::FieldDef f;
            f.name = vocab_word(pick(rng)) + "_" + vocab_word(pick(rng));
            f.type = types[pick(rng) % 4];
            std::string desc;
            for (int w = words(rng); w > 0; --w) {
                if (!desc.empty()) desc += ' ';
                desc += vocab_word(pick(rng));
            }
            f.description = desc;
            out.push_back(std::move(f));
        }
    };
    make(d.a);
    make(d.b);
    for (const auto& f : d.a) d.va.push_back(&f);
    for (const auto& f : d.b) d.vb.push_back(&f);
    return d;
}

void bm_overlap_matrix_serial(benchmark::State& state) {
    const OverlapData d = overlap_data(state.range(0));
    for (auto _ : state) {
        auto m = dfs::kernels::overlap_matrix_serial(d.va, d.vb);
        benchmark::DoNotOptimize(m);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void bm_overlap_matrix_parallel(benchmark::State& state) {
    const OverlapData d = overlap_data(state.range(0));
    for (auto _ : state) {
        auto m = dfs::kernels::overlap_matrix(d.va, d.vb);
        benchmark::DoNotOptimize(m);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

struct TfidfData {
    std::vector<dfs::TermVector> vectors;
    std::map<std::string, std::int64_t> df;
};

TfidfData tfidf_data(std::int64_t docs) {
    std::mt19937_64 rng(3000 + static_cast<std::uint64_t>(docs));
    std::uniform_int_distribution<std::size_t> pick(0, 399);
    std::uniform_int_distribution<int> count(1, 9);
    TfidfData d;
    for (std::int64_t i = 0; i < docs; ++i) {
        dfs::TermVector v;
        for (int t = 0; t < 30; ++t) v[vocab_word(pick(rng))] = count(rng);
        for (const auto& [term, weight] : v) ++d.df[term];
        d.vectors.push_back(std::move(v));
    }
    return d;
}

void bm_finalize_tfidf_serial(benchmark::State& state) {
    const TfidfData d = tfidf_data(state.range(0));
    for (auto _ : state) {
        state.PauseTiming();
        auto work = d.vectors;
        state.ResumeTiming();
        dfs::kernels::finalize_tfidf_serial(work, d.df, state.range(0));
        benchmark::DoNotOptimize(work);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_finalize_tfidf_parallel(benchmark::State& state) {
    const TfidfData d = tfidf_data(state.range(0));
    for (auto _ : state) {
        state.PauseTiming();
        auto work = d.vectors;
        state.ResumeTiming();
        dfs::kernels::finalize_tfidf(work, d.df, state.range(0));
        benchmark::DoNotOptimize(work);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(bm_cosine_scan_serial)->Arg(256)->Arg(2048)->Arg(8192)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_cosine_scan_parallel)->Arg(256)->Arg(2048)->Arg(8192)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_overlap_matrix_serial)->Arg(8)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_overlap_matrix_parallel)->Arg(8)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_finalize_tfidf_serial)->Arg(512)->Arg(4096)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_finalize_tfidf_parallel)->Arg(512)->Arg(4096)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
