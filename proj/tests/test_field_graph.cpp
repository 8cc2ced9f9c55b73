#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "dfs/field_graph.hpp"
#include "dfs/metafile.hpp"
#include "test_support.hpp"

using dfs::json;
namespace ts = testsupport;

namespace {

std::vector<std::string> toks(std::initializer_list<const char*> xs) {
    return std::vector<std::string>(xs.begin(), xs.end());
}

dfs::FieldDef field(const char* name, dfs::FieldType type, const char* desc = "") {
    return dfs::FieldDef{name, type, desc, json::object()};
}

// two files, four fields, one 2-ref link — the shape most overlap tests need
dfs::Metafile two_file_doc() {
    dfs::Metafile m;
    m.schema_uri = dfs::kDefaultSchemaUri;
    m.id = "1b4e28ba-2fa1-41d2-883f-0016d3cca427";
    m.meta_version = 1;
    m.created = m.modified = "2024-01-01T00:00:00Z";
    m.checksum = "sha256:" + std::string(64, '0');
    m.meta.name = "G";
    dfs::DataFileEntry f1;
    f1.local_id = "f1";
    f1.path = "a.csv";
    f1.encoding = "csv";
    f1.checksum = "sha256:" + std::string(64, '1');
    f1.fields = {field("patient_id", dfs::FieldType::string_),
                 field("heart_rate", dfs::FieldType::number)};
    dfs::DataFileEntry f2 = f1;
    f2.local_id = "f2";
    f2.path = "b.csv";
    f2.checksum = "sha256:" + std::string(64, '2');
    f2.fields = {field("patientID", dfs::FieldType::string_),
                 field("step_count", dfs::FieldType::integer)};
    m.meta.files = {f1, f2};
    dfs::Link l;
    l.type = "id";
    l.fields = {dfs::FieldRef{"f1", "patient_id", json::object()},
                dfs::FieldRef{"f2", "patientID", json::object()}};
    m.meta.links = {l};
    return m;
}

}  // namespace

TEST_CASE("name normalization") {
    CHECK(dfs::normalize_name("patientID") == toks({"patient", "id"}));
    CHECK(dfs::normalize_name("patient_id") == toks({"patient", "id"}));
    CHECK(dfs::normalize_name("Patient ID") == toks({"patient", "id"}));
    CHECK(dfs::normalize_name("heart_rate-bpm") == toks({"heart", "rate", "bpm"}));
    CHECK(dfs::normalize_name("HeartRate") == toks({"heart", "rate"}));
    CHECK(dfs::normalize_name("x2") == toks({"x2"}));
    CHECK(dfs::normalize_name("HTTPCode") == toks({"httpcode"}));  // no lower->upper boundary
    CHECK(dfs::normalize_name("") == toks({}));
    CHECK(dfs::normalize_name("___") == toks({}));
    CHECK(dfs::normalize_name("  spaced   out  ") == toks({"spaced", "out"}));
    // non-ASCII bytes act as separators
    CHECK(dfs::normalize_name("caf\xc3\xa9 au lait") == toks({"caf", "au", "lait"}));

    // idempotence: re-normalizing the joined tokens changes nothing
    ts::Gen g(5);
    for (int i = 0; i < 200; ++i) {
        std::string s;
        const int len = g.range(0, 20);
        for (int k = 0; k < len; ++k) s.push_back(static_cast<char>(g.rng() % 128));
        const auto once = dfs::normalize_name(s);
        std::string joined;
        for (const auto& t : once) joined += t + "_";
        CHECK(dfs::normalize_name(joined) == once);
    }
}

TEST_CASE("labels pair the normalized tokens with the type") {
    const auto l = dfs::label_for(field("patientID", dfs::FieldType::string_, "ignored"));
    CHECK(l.name_tokens == toks({"patient", "id"}));
    CHECK(l.type == dfs::FieldType::string_);
    CHECK(l == dfs::label_for(field("patient_id", dfs::FieldType::string_)));
    CHECK(l != dfs::label_for(field("patient_id", dfs::FieldType::integer)));
}

TEST_CASE("graph construction from a metafile") {
    const dfs::FieldGraph g = dfs::build_field_graph(two_file_doc());
    CHECK(g.nodes().size() == 4);
    CHECK(g.nodes().count("f1/patient_id") == 1);
    CHECK(g.nodes().count("f2/step_count") == 1);
    REQUIRE(g.edges().size() == 1);
    const dfs::FieldEdge e = *g.edges().begin();
    CHECK(e.a == "f1/patient_id");
    CHECK(e.b == "f2/patientID");
    CHECK(e.link_type == "id");
}

TEST_CASE("a k-ref link induces k choose 2 edges") {
    dfs::Metafile m = two_file_doc();
    m.meta.links[0].fields.push_back(dfs::FieldRef{"f1", "heart_rate", json::object()});
    m.meta.links[0].fields.push_back(dfs::FieldRef{"f2", "step_count", json::object()});
    const dfs::FieldGraph g = dfs::build_field_graph(m);
    CHECK(g.edges().size() == 6);  // C(4,2)

    // a second link over an already-linked pair does not duplicate the edge
    dfs::Link extra;
    extra.type = "id";
    extra.fields = {dfs::FieldRef{"f1", "patient_id", json::object()},
                    dfs::FieldRef{"f2", "patientID", json::object()}};
    m.meta.links.push_back(extra);
    CHECK(dfs::build_field_graph(m).edges().size() == 6);
}

TEST_CASE("graphs reject edges between unknown nodes and ignore self-loops") {
    dfs::FieldGraph g;
    g.add_node("f1/a", dfs::NormalizedLabel{toks({"a"}), dfs::FieldType::string_});
    g.add_node("f1/b", dfs::NormalizedLabel{toks({"b"}), dfs::FieldType::string_});
    CHECK_THROWS_AS(g.add_edge("f1/a", "f9/zzz", "id"), dfs::UsageError);
    g.add_edge("f1/a", "f1/a", "id");  // self-loop: silently dropped
    CHECK(g.edges().empty());
    g.add_edge("f1/b", "f1/a", "id");  // stored with endpoints ordered
    REQUIRE(g.edges().size() == 1);
    CHECK(g.edges().begin()->a == "f1/a");
}

TEST_CASE("edge list debug export is sorted and tab-separated") {
    dfs::FieldGraph g;
    g.add_node("f2/b", dfs::NormalizedLabel{toks({"b"}), dfs::FieldType::string_});
    g.add_node("f1/a", dfs::NormalizedLabel{toks({"a"}), dfs::FieldType::string_});
    g.add_node("f1/c", dfs::NormalizedLabel{toks({"c"}), dfs::FieldType::string_});
    g.add_edge("f2/b", "f1/a", "id");
    g.add_edge("f1/c", "f1/a", "unit");
    CHECK(g.edge_list_text() ==
          "f1/a\nf1/c\nf2/b\n"
          "f1/a\tf1/c\tunit\n"
          "f1/a\tf2/b\tid\n");
}

TEST_CASE("type compatibility is exact except the numeric pair") {
    using dfs::FieldType;
    const FieldType all[] = {FieldType::string_,  FieldType::integer,
                             FieldType::number,   FieldType::boolean,
                             FieldType::datetime, FieldType::categorical,
                             FieldType::binary};
    for (FieldType a : all) {
        for (FieldType b : all) {
            const bool numeric_pair =
                (a == FieldType::integer && b == FieldType::number) ||
                (a == FieldType::number && b == FieldType::integer);
            CHECK(dfs::types_compatible(a, b) == (a == b || numeric_pair));
        }
    }
}

TEST_CASE("graph similarity: fixed points and hand values") {
    const dfs::FieldGraph ga = dfs::build_field_graph(two_file_doc());
    CHECK(dfs::graph_similarity(ga, ga) == 1.0);

    const dfs::FieldGraph empty_graph;
    CHECK(dfs::graph_similarity(empty_graph, empty_graph) == 1.0);
    CHECK(dfs::graph_similarity(ga, empty_graph) == 0.0);  // labels disjoint from nothing

    // edgeless graphs: the label term stands alone
    dfs::FieldGraph g1, g2;
    g1.add_node("f1/a", dfs::NormalizedLabel{toks({"a"}), dfs::FieldType::string_});
    g1.add_node("f1/b", dfs::NormalizedLabel{toks({"b"}), dfs::FieldType::string_});
    g2.add_node("f1/b", dfs::NormalizedLabel{toks({"b"}), dfs::FieldType::string_});
    g2.add_node("f1/c", dfs::NormalizedLabel{toks({"c"}), dfs::FieldType::string_});
    CHECK(dfs::graph_similarity(g1, g2) == 1.0 / 3.0);  // J({a,b},{b,c}) exactly

    // one graph has an edge: the 0.7/0.3 blend kicks in
    g1.add_edge("f1/a", "f1/b", "id");
    CHECK(dfs::graph_similarity(g1, g2) == 0.7 * (1.0 / 3.0) + 0.3 * 0.0);

    // same label multiset, different node ids -> still identical label sets
    dfs::FieldGraph g3;
    g3.add_node("f9/zzz", dfs::NormalizedLabel{toks({"b"}), dfs::FieldType::string_});
    dfs::FieldGraph g4;
    g4.add_node("f1/b", dfs::NormalizedLabel{toks({"b"}), dfs::FieldType::string_});
    CHECK(dfs::graph_similarity(g3, g4) == 1.0);
}

TEST_CASE("graph similarity agrees with a brute-force oracle, exactly") {
    ts::Gen g(20240601);
    for (int i = 0; i < 500; ++i) {
        CAPTURE(i);
        const auto pool = ts::random_label_pool(g);
        const dfs::FieldGraph a = ts::random_graph(g, pool);
        const dfs::FieldGraph b = ts::random_graph(g, pool);
        const double got = dfs::graph_similarity(a, b);
        const double want = ts::oracle_graph_similarity(a, b);
        REQUIRE(got == want);  // bitwise: same counts, same blend expression
        CHECK(got == dfs::graph_similarity(b, a));  // symmetric
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
    }
}

TEST_CASE("field overlap: type gate") {
    CHECK(dfs::field_overlap(field("age", dfs::FieldType::integer),
                             field("age", dfs::FieldType::boolean)) == 0.0);
    CHECK(dfs::field_overlap(field("age", dfs::FieldType::integer),
                             field("age", dfs::FieldType::number)) == 1.0);
    CHECK(dfs::field_overlap(field("age", dfs::FieldType::string_),
                             field("age", dfs::FieldType::datetime)) == 0.0);
}

TEST_CASE("field overlap: name-only cases") {
    // identical fields, no descriptions
    CHECK(dfs::field_overlap(field("patient_id", dfs::FieldType::string_),
                             field("patientID", dfs::FieldType::string_)) == 1.0);
    // disjoint names
    CHECK(dfs::field_overlap(field("alpha", dfs::FieldType::string_),
                             field("beta", dfs::FieldType::string_)) == 0.0);
    // half-overlapping token sets: J({heart,rate},{rate}) = 1/2
    CHECK(dfs::field_overlap(field("heart_rate", dfs::FieldType::number),
                             field("rate", dfs::FieldType::number)) == 0.5);
    // one description empty -> half credit on the name term
    CHECK(dfs::field_overlap(field("heart_rate", dfs::FieldType::number, "beats per minute"),
                             field("heart_rate", dfs::FieldType::number)) == 0.5);
}

TEST_CASE("field overlap: description cosine blends in") {
    // identical descriptions short-circuit to cosine 1
    const auto a = field("hr", dfs::FieldType::number, "beats per minute");
    const auto b = field("hr", dfs::FieldType::number, "beats per minute");
    CHECK(dfs::field_overlap(a, b) == 1.0);

    // "a b" vs "a c": cosine = 1/2, names identical -> 0.5*1 + 0.5*0.5 = 0.75
    const auto c = field("hr", dfs::FieldType::number, "beats minute");
    const auto d = field("hr", dfs::FieldType::number, "beats second");
    CHECK(dfs::field_overlap(c, d) == doctest::Approx(0.75).epsilon(1e-12));

    // symmetry and bounds over random fields
    ts::Gen g(8);
    static const std::vector<dfs::FieldType> types = {
        dfs::FieldType::string_, dfs::FieldType::integer, dfs::FieldType::number};
    for (int i = 0; i < 300; ++i) {
        dfs::FieldDef x{g.identifier(), g.pick(types), g.chance(70) ? g.words(0, 6) : "",
                        json::object()};
        dfs::FieldDef y{g.identifier(), g.pick(types), g.chance(70) ? g.words(0, 6) : "",
                        json::object()};
        const double v = dfs::field_overlap(x, y);
        CHECK(v == dfs::field_overlap(y, x));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    // a field is always a perfect match for itself
    for (int i = 0; i < 100; ++i) {
        dfs::FieldDef x{g.identifier(), g.pick(types), g.words(1, 6), json::object()};
        CHECK(dfs::field_overlap(x, x) == 1.0);
    }
}
