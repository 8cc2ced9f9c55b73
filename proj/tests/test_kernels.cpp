#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <map>
#include <vector>

#include "dfs/kernels.hpp"
#include "test_support.hpp"

using dfs::TermVector;
namespace ts = testsupport;

namespace {

TermVector random_vector(ts::Gen& g, int max_terms) {
    TermVector v;
    const int n = g.range(0, max_terms);
    for (int i = 0; i < n; ++i) {
        v[g.word()] = g.range(1, 50) / 10.0;
    }
    return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    return a.empty() ||
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool bitwise_equal(const TermVector& a, const TermVector& b) {
    if (a.size() != b.size()) return false;
    auto ia = a.begin();
    for (auto ib = b.begin(); ib != b.end(); ++ia, ++ib) {
        if (ia->first != ib->first) return false;
        if (std::memcmp(&ia->second, &ib->second, sizeof(double)) != 0) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("sparse dot product") {
    const TermVector a{{"x", 2.0}, {"y", 3.0}};
    const TermVector b{{"y", 4.0}, {"z", 5.0}};
    CHECK(dfs::dot(a, b) == 12.0);
    CHECK(dfs::dot(b, a) == 12.0);
    CHECK(dfs::dot(a, TermVector{}) == 0.0);
    CHECK(dfs::dot(TermVector{}, TermVector{}) == 0.0);
    CHECK(dfs::dot(a, a) == 13.0);
}

TEST_CASE("l2 normalization") {
    const TermVector v{{"x", 3.0}, {"y", 4.0}};
    const TermVector n = dfs::l2_normalized(v);
    CHECK(n.at("x") == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(n.at("y") == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(std::sqrt(dfs::dot(n, n)) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(dfs::l2_normalized(TermVector{}).empty());
    // an all-zero vector cannot be normalized; it comes back unchanged
    const TermVector z{{"x", 0.0}};
    CHECK(dfs::l2_normalized(z) == z);

    // property: unit norm over random non-zero vectors
    ts::Gen g(31);
    for (int i = 0; i < 200; ++i) {
        TermVector r = random_vector(g, 12);
        if (r.empty()) continue;
        const TermVector u = dfs::l2_normalized(r);
        CHECK(std::abs(std::sqrt(dfs::dot(u, u)) - 1.0) < 1e-9);
    }
}

TEST_CASE("idf weighting is smoothed and never non-positive") {
    // ln((1+N)/(1+df)) + 1
    CHECK(dfs::idf_weight(3, 1) == doctest::Approx(std::log(4.0 / 2.0) + 1.0).epsilon(1e-15));
    CHECK(dfs::idf_weight(3, 3) == doctest::Approx(std::log(1.0) + 1.0).epsilon(1e-15));
    CHECK(dfs::idf_weight(1, 1) == 1.0);
    CHECK(dfs::idf_weight(1000000, 1) > dfs::idf_weight(1000000, 999999));
    for (std::int64_t df = 1; df <= 20; ++df) {
        CHECK(dfs::idf_weight(20, df) > 0.0);
    }
}

TEST_CASE("cosine scan: hand values, clamping, degenerate inputs") {
    const TermVector q = dfs::l2_normalized({{"a", 1.0}, {"b", 1.0}});
    const TermVector d1 = dfs::l2_normalized({{"a", 1.0}, {"b", 1.0}});  // same direction
    const TermVector d2 = dfs::l2_normalized({{"c", 1.0}});              // orthogonal
    const TermVector d3 = dfs::l2_normalized({{"a", 1.0}});              // 45 degrees
    const TermVector empty;

    const std::vector<const TermVector*> corpus{&d1, &d2, &d3, &empty};
    const auto scores = dfs::kernels::cosine_scan(q, corpus);
    REQUIRE(scores.size() == 4);
    CHECK(scores[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(scores[0] <= 1.0);  // clamped even when rounding would push above
    CHECK(scores[1] == 0.0);
    CHECK(scores[2] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(scores[3] == 0.0);  // empty document

    // empty query scores zero everywhere
    const auto zeros = dfs::kernels::cosine_scan(TermVector{}, corpus);
    for (double s : zeros) CHECK(s == 0.0);

    // empty corpus
    CHECK(dfs::kernels::cosine_scan(q, {}).empty());
}

TEST_CASE("cosine scan: serial and parallel agree bit for bit") {
    ts::Gen g(42);
    for (int round = 0; round < 20; ++round) {
        CAPTURE(round);
        const TermVector query = dfs::l2_normalized(random_vector(g, 15));
        std::vector<TermVector> docs;
        const int n = g.range(0, 60);
        for (int i = 0; i < n; ++i) docs.push_back(dfs::l2_normalized(random_vector(g, 15)));
        std::vector<const TermVector*> corpus;
        for (const auto& d : docs) corpus.push_back(&d);

        const auto serial = dfs::kernels::cosine_scan_serial(query, corpus);
        const auto parallel = dfs::kernels::cosine_scan(query, corpus);
        REQUIRE(bitwise_equal(serial, parallel));
        for (double s : serial) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
    }
}

TEST_CASE("overlap matrix: layout matches direct calls; serial == parallel") {
    ts::Gen g(43);
    static const std::vector<dfs::FieldType> types = {
        dfs::FieldType::string_, dfs::FieldType::integer, dfs::FieldType::number,
        dfs::FieldType::boolean};
    for (int round = 0; round < 12; ++round) {
        CAPTURE(round);
        std::vector<dfs::FieldDef> fa, fb;
        const int na = g.range(0, 7), nb = g.range(0, 7);
        for (int i = 0; i < na; ++i)
            fa.push_back({g.identifier(), g.pick(types), g.words(0, 5), dfs::json::object()});
        for (int i = 0; i < nb; ++i)
            fb.push_back({g.identifier(), g.pick(types), g.words(0, 5), dfs::json::object()});
        std::vector<const dfs::FieldDef*> pa, pb;
        for (const auto& f : fa) pa.push_back(&f);
        for (const auto& f : fb) pb.push_back(&f);

        const auto serial = dfs::kernels::overlap_matrix_serial(pa, pb);
        const auto parallel = dfs::kernels::overlap_matrix(pa, pb);
        REQUIRE(serial.size() == static_cast<std::size_t>(na) * nb);
        REQUIRE(bitwise_equal(serial, parallel));

        // row-major agreement with the scalar function
        for (int i = 0; i < na; ++i) {
            for (int j = 0; j < nb; ++j) {
                CHECK(serial[static_cast<std::size_t>(i) * nb + j] ==
                      dfs::field_overlap(fa[i], fb[j]));
            }
        }
    }
}

TEST_CASE("tf-idf finalize: hand-computed small corpus") {
    // three docs; "ecg" in all three, "gait" in one
    std::vector<TermVector> vectors = {
        {{"ecg", 1.0}, {"gait", 1.0}},
        {{"ecg", 1.0}},
        {{"ecg", 1.0 + std::log(2.0)}},  // tf of a double-counted term
    };
    const std::map<std::string, std::int64_t> df{{"ecg", 3}, {"gait", 1}};
    dfs::kernels::finalize_tfidf(vectors, df, 3);

    const double idf_ecg = std::log(4.0 / 4.0) + 1.0;   // 1.0
    const double idf_gait = std::log(4.0 / 2.0) + 1.0;  // ln 2 + 1

    // doc 0: weights (1*1, 1*(ln2+1)) then unit-normalized
    const double n0 = std::sqrt(idf_ecg * idf_ecg + idf_gait * idf_gait);
    CHECK(vectors[0].at("ecg") == doctest::Approx(idf_ecg / n0).epsilon(1e-12));
    CHECK(vectors[0].at("gait") == doctest::Approx(idf_gait / n0).epsilon(1e-12));

    // doc 1: a single term normalizes to exactly 1
    CHECK(vectors[1].at("ecg") == doctest::Approx(1.0).epsilon(1e-12));

    // doc 2: same single term, higher tf, still unit norm
    CHECK(vectors[2].at("ecg") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tf-idf finalize: serial and parallel agree bit for bit") {
    ts::Gen g(44);
    for (int round = 0; round < 15; ++round) {
        CAPTURE(round);
        const int docs = g.range(0, 50);
        std::vector<TermVector> a;
        std::map<std::string, std::int64_t> df;
        for (int i = 0; i < docs; ++i) {
            TermVector v = random_vector(g, 10);
            for (const auto& [term, weight] : v) df[term]++;
            a.push_back(std::move(v));
        }
        std::vector<TermVector> b = a;

        dfs::kernels::finalize_tfidf_serial(a, df, docs);
        dfs::kernels::finalize_tfidf(b, df, docs);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CAPTURE(i);
            REQUIRE(bitwise_equal(a[i], b[i]));
            if (!a[i].empty()) {
                double sq = 0.0;
                for (const auto& [t, w] : a[i]) sq += w * w;
                CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-9);
            }
        }
    }
}
