#include "dfs/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dfs/aggregate.hpp"
#include "dfs/catalog.hpp"
#include "dfs/checksum.hpp"
#include "dfs/field_graph.hpp"
#include "dfs/metafile.hpp"
#include "dfs/versioning.hpp"

namespace dfs::cli {

namespace {

namespace fs = std::filesystem;

struct Ctx {
    fs::path repo_root;
    bool json_mode = false;
    Clock clock;
    UuidSource uuid;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + p.string());
    return buf.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
        if (ec) throw IoError("cannot create " + p.parent_path().string());
    }
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + p.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("cannot write " + p.string());
}

Metafile load_metafile(const fs::path& p) {
    return parse_metafile(read_file(p));
}

void emit(const json& doc) {
    std::cout << canonical_bytes(doc) << "\n";
}

DatasetRef parse_ref_arg(const std::string& text) {
    auto ref = DatasetRef::parse(text);
    if (!ref) throw UsageError("malformed dataset ref \"" + text + "\" (expected <uuid>@v<N>)");
    return *ref;
}

std::string score_text(double score) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", score);
    return buf;
}

void print_hits(const Ctx& ctx, const std::vector<SearchHit>& hits) {
    if (ctx.json_mode) {
        json out = json::array();
        for (const auto& h : hits) {
            out.push_back(json{{"ref", h.ref.str()}, {"score", h.score}});
        }
        emit(out);
        return;
    }
    for (const auto& h : hits) {
        std::cout << h.ref.str() << "\t" << score_text(h.score) << "\n";
    }
}

// ---------------------------------------------------------------------------
// diff
// ---------------------------------------------------------------------------

std::string join_key(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

std::string join_index(const std::string& prefix, std::size_t i) {
    return prefix + "[" + std::to_string(i) + "]";
}

void diff_trees(const json& a, const json& b, const std::string& path, json& out) {
    if (a == b) return;
    if (a.is_object() && b.is_object()) {
        auto ia = a.begin(), ib = b.begin();
        while (ia != a.end() || ib != b.end()) {
            if (ib == b.end() || (ia != a.end() && ia.key() < ib.key())) {
                out.push_back(json{{"op", "remove"},
                                   {"path", join_key(path, ia.key())},
                                   {"value", ia.value()}});
                ++ia;
            } else if (ia == a.end() || ib.key() < ia.key()) {
                out.push_back(json{{"op", "add"},
                                   {"path", join_key(path, ib.key())},
                                   {"value", ib.value()}});
                ++ib;
            } else {
                diff_trees(ia.value(), ib.value(), join_key(path, ia.key()), out);
                ++ia;
                ++ib;
            }
        }
        return;
    }
    if (a.is_array() && b.is_array()) {
        const std::size_t common = std::min(a.size(), b.size());
        for (std::size_t i = 0; i < common; ++i) {
            diff_trees(a[i], b[i], join_index(path, i), out);
        }
        for (std::size_t i = common; i < a.size(); ++i) {
            out.push_back(json{{"op", "remove"}, {"path", join_index(path, i)}, {"value", a[i]}});
        }
        for (std::size_t i = common; i < b.size(); ++i) {
            out.push_back(json{{"op", "add"}, {"path", join_index(path, i)}, {"value", b[i]}});
        }
        return;
    }
    out.push_back(json{{"op", "change"}, {"path", path}, {"from", a}, {"to", b}});
}

// ---------------------------------------------------------------------------
// subcommand bodies (each returns the process exit code)
// ---------------------------------------------------------------------------

int do_init(const Ctx& ctx, const fs::path& dir, const std::string& name) {
    const fs::path target = dir / kMetafileName;
    std::error_code ec;
    if (fs::exists(target, ec)) {
        throw UsageError(target.string() + " already exists; refusing to overwrite");
    }
    const Metafile m = generate_skeleton(dir, name, ctx.clock, ctx.uuid);
    write_file(target, canonical_bytes(m));
    if (ctx.json_mode) {
        emit(json(m));
    } else {
        std::cout << "initialized " << cite(m) << " (" << m.meta.files.size() << " file(s)) -> "
                  << target.string() << "\n";
    }
    return 0;
}

int do_validate(const Ctx& ctx, const fs::path& file, const std::optional<fs::path>& data_root) {
    const Metafile m = load_metafile(file);
    const ValidationReport report = validate(m, data_root);
    if (ctx.json_mode) {
        emit(report.to_json());
        return report.valid() ? 0 : 1;
    }
    for (const auto& f : report.findings) {
        std::cerr << (f.severity == Severity::error ? "error: " : "warning: ") << f.path << ": "
                  << f.message << "\n";
    }
    if (report.valid()) {
        std::cout << "OK\n";
        return 0;
    }
    std::cout << "FAILED: " << report.error_count() << " error(s), " << report.warning_count()
              << " warning(s)\n";
    return 1;
}

int do_hash(const Ctx& ctx, const fs::path& file, const std::optional<fs::path>& data_root,
            bool write) {
    Metafile m = load_metafile(file);
    if (data_root) {
        for (auto& f : m.meta.files) {
            f.checksum = compute_file_checksum(*data_root / f.path);
        }
    }
    m.checksum = compute_meta_checksum(m);
    if (write) write_file(file, canonical_bytes(m));

    if (ctx.json_mode) {
        json files = json::object();
        for (const auto& f : m.meta.files) files[f.local_id] = f.checksum;
        emit(json{{"checksum", m.checksum}, {"files", std::move(files)}});
    } else {
        for (const auto& f : m.meta.files) {
            std::cout << f.local_id << "\t" << f.checksum << "\n";
        }
        std::cout << "meta\t" << m.checksum << "\n";
    }
    return 0;
}

int do_bump(const Ctx& ctx, const fs::path& file, bool meta_only,
            const std::vector<std::string>& changed_files) {
    const Metafile m = load_metafile(file);
    VersionBump change;
    change.kind = meta_only ? BumpKind::meta_only : BumpKind::file_change;
    change.changed_file_local_ids = changed_files;
    const Metafile next = bump(m, change, ctx.clock());
    write_file(file, canonical_bytes(next));
    if (ctx.json_mode) {
        emit(json(next));
    } else {
        std::cout << cite(next) << "\n";
    }
    return 0;
}

int do_cite(const Ctx& ctx, const fs::path& file) {
    const Metafile m = load_metafile(file);
    if (ctx.json_mode) {
        emit(json{{"citation", cite(m)}});
    } else {
        std::cout << cite(m) << "\n";
    }
    return 0;
}

int do_diff(const Ctx& ctx, const fs::path& a_path, const fs::path& b_path) {
    const json a = json(load_metafile(a_path));
    const json b = json(load_metafile(b_path));
    json entries = json::array();
    diff_trees(a, b, "", entries);
    if (ctx.json_mode) {
        emit(entries);
        return 0;
    }
    for (const auto& e : entries) {
        const std::string op = e.at("op").get<std::string>();
        const std::string path = e.at("path").get<std::string>();
        if (op == "add") {
            std::cout << "+ " << path << ": " << canonical_bytes(e.at("value")) << "\n";
        } else if (op == "remove") {
            std::cout << "- " << path << ": " << canonical_bytes(e.at("value")) << "\n";
        } else {
            std::cout << "~ " << path << ": " << canonical_bytes(e.at("from")) << " -> "
                      << canonical_bytes(e.at("to")) << "\n";
        }
    }
    if (entries.empty()) std::cout << "identical\n";
    return 0;
}

void require_valid(const Metafile& m, const std::string& label) {
    const ValidationReport report = validate(m);
    if (report.valid()) return;
    for (const auto& f : report.findings) {
        if (f.severity == Severity::error) {
            throw ValidationError(label + " is not valid: " + f.path + ": " + f.message);
        }
    }
}

int do_aggregate(const Ctx& ctx, const fs::path& a_path, const fs::path& b_path,
                 const fs::path& out_path, const std::optional<fs::path>& report_path,
                 const AggregationConfig& cfg) {
    const Metafile alpha = load_metafile(a_path);
    const Metafile beta = load_metafile(b_path);
    require_valid(alpha, a_path.string());
    require_valid(beta, b_path.string());

    const AggregationResult result = aggregate(alpha, beta, cfg, ctx.clock(), ctx.uuid);
    write_file(out_path, canonical_bytes(result.metafile));
    if (report_path) write_file(*report_path, canonical_bytes(json(result.report)));

    if (ctx.json_mode) {
        emit(json(result.report));
    } else {
        std::cout << "similarity: " << score_text(result.report.similarity_score) << "\n"
                  << "matched pairs: " << result.report.matched_pairs.size() << "\n"
                  << "files added: " << result.report.files_added.size() << "\n"
                  << "result: " << result.report.result_ref.str() << " -> " << out_path.string()
                  << "\n";
    }
    return 0;
}

int do_put(const Ctx& ctx, const fs::path& file, const std::optional<fs::path>& data_root) {
    const Metafile m = load_metafile(file);
    const Repository repo(ctx.repo_root);
    const DatasetRef ref = repo.put(m, data_root);
    if (ctx.json_mode) {
        emit(json{{"citation", ref.str()}});
    } else {
        std::cout << "stored " << ref.str() << "\n";
    }
    return 0;
}

int do_get(const Ctx& ctx, const std::string& ref_text, const fs::path& out_dir) {
    const DatasetRef ref = parse_ref_arg(ref_text);
    const Repository repo(ctx.repo_root);
    const Metafile m = repo.get(ref);  // verifies before any copying
    try {
        fs::create_directories(out_dir);
        fs::copy(repo.slot_dir(ref), out_dir,
                 fs::copy_options::recursive | fs::copy_options::copy_symlinks);
    } catch (const fs::filesystem_error& e) {
        throw IoError(std::string("cannot copy dataset: ") + e.what());
    }
    if (ctx.json_mode) {
        emit(json(m));
    } else {
        std::cout << "fetched " << ref.str() << " -> " << out_dir.string() << "\n";
    }
    return 0;
}

int do_index_build(const Ctx& ctx) {
    const Repository repo(ctx.repo_root);
    const IndexBuildResult result = index_build(repo);
    save_index(result.index, ctx.repo_root);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    if (ctx.json_mode) {
        emit(json{{"doc-count", result.index.doc_count},
                  {"terms", result.index.df.size()},
                  {"warnings", result.warnings}});
    } else {
        std::cout << "indexed " << result.index.doc_count << " dataset(s), "
                  << result.index.df.size() << " term(s)\n";
    }
    return 0;
}

int do_search(const Ctx& ctx, const std::vector<std::string>& words, int k) {
    if (k < 1) throw UsageError("k must be >= 1");
    std::string query;
    for (const auto& w : words) {
        if (!query.empty()) query += " ";
        query += w;
    }
    const TfIdfIndex ix = load_index(ctx.repo_root);
    print_hits(ctx, search(ix, query, static_cast<std::size_t>(k)));
    return 0;
}

int do_interact(const Ctx& ctx, const std::string& ref_text, const std::string& user,
                double lambda) {
    const DatasetRef ref = parse_ref_arg(ref_text);
    const Repository repo(ctx.repo_root);
    const Metafile m = repo.get(ref);
    const InterestProfile before = load_profile(ctx.repo_root, user);
    const InterestProfile after = profile_update(before, m, lambda);
    save_profile(ctx.repo_root, after);
    if (ctx.json_mode) {
        json weights = json::object();
        for (const auto& [term, w] : after.weights) weights[term] = w;
        emit(json{{"user-id", after.user_id},
                  {"interaction-count", after.interaction_count},
                  {"seen", after.seen},
                  {"weights", std::move(weights)}});
    } else {
        std::cout << "updated profile \"" << user << "\" (" << after.interaction_count
                  << " interaction(s))\n";
    }
    return 0;
}

int do_recommend(const Ctx& ctx, const std::string& user, int k, bool include_seen) {
    if (k < 1) throw UsageError("k must be >= 1");
    const TfIdfIndex ix = load_index(ctx.repo_root);
    const InterestProfile p = load_profile(ctx.repo_root, user);
    print_hits(ctx, recommend(ix, p, static_cast<std::size_t>(k), include_seen));
    return 0;
}

// ---------------------------------------------------------------------------
// error -> exit code map
// ---------------------------------------------------------------------------

int exit_code_for(const Error& e) {
    if (dynamic_cast<const SyntaxError*>(&e) || dynamic_cast<const SchemaError*>(&e) ||
        dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ClockError*>(&e)) {
        return 1;
    }
    if (dynamic_cast<const IntegrityError*>(&e) || dynamic_cast<const ImmutabilityError*>(&e)) {
        return 3;
    }
    if (dynamic_cast<const IncompatibleDatasetsError*>(&e) ||
        dynamic_cast<const NoMatchError*>(&e) || dynamic_cast<const CollisionError*>(&e)) {
        return 4;
    }
    // UsageError, IoError, NotFoundError, EmptyDatasetError, UnknownFileError
    return 2;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"dfs - dataset metafile toolkit"};
    app.require_subcommand(1);

    Ctx ctx;
    std::string repo_text = "./dfs-repo";
    app.add_option("--repo", repo_text, "repository root (env DFS_REPO)")
        ->envname("DFS_REPO")
        ->capture_default_str();
    app.add_flag("--json", ctx.json_mode, "emit canonical JSON documents on stdout");

    // init
    auto* init_cmd = app.add_subcommand("init", "generate a skeleton metafile for a directory");
    std::string init_dir;
    std::string init_name;
    init_cmd->add_option("dir", init_dir, "dataset directory")->required();
    init_cmd->add_option("--name", init_name, "dataset name")->required();

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "check a metafile document");
    std::string validate_file;
    std::string validate_data_root;
    validate_cmd->add_option("metafile", validate_file, "metafile path")->required();
    validate_cmd->add_option("--data-root", validate_data_root,
                             "verify data file checksums against this directory");

    // hash
    auto* hash_cmd = app.add_subcommand("hash", "recompute checksums");
    std::string hash_file;
    std::string hash_data_root;
    bool hash_write = false;
    hash_cmd->add_option("metafile", hash_file, "metafile path")->required();
    hash_cmd->add_option("--data-root", hash_data_root, "recompute data file checksums too");
    hash_cmd->add_flag("--write", hash_write, "rewrite the metafile with the new checksums");

    // bump
    auto* bump_cmd = app.add_subcommand("bump", "advance the meta-version");
    std::string bump_file;
    bool bump_meta = false;
    std::vector<std::string> bump_files;
    bump_cmd->add_option("metafile", bump_file, "metafile path")->required();
    auto* bump_meta_opt = bump_cmd->add_flag("--meta", bump_meta, "metadata-only change");
    auto* bump_file_opt =
        bump_cmd->add_option("--file", bump_files, "local id of a changed data file");
    bump_meta_opt->excludes(bump_file_opt);

    // cite
    auto* cite_cmd = app.add_subcommand("cite", "print the citation identifier");
    std::string cite_file;
    cite_cmd->add_option("metafile", cite_file, "metafile path")->required();

    // diff
    auto* diff_cmd = app.add_subcommand("diff", "structural diff of two metafiles");
    std::string diff_a, diff_b;
    diff_cmd->add_option("a", diff_a, "first metafile")->required();
    diff_cmd->add_option("b", diff_b, "second metafile")->required();

    // aggregate
    auto* agg_cmd = app.add_subcommand("aggregate", "aggregate two datasets into a new one");
    std::string agg_a, agg_b, agg_out;
    std::string agg_report;
    AggregationConfig agg_cfg;
    agg_cmd->add_option("a", agg_a, "first metafile")->required();
    agg_cmd->add_option("b", agg_b, "second metafile")->required();
    agg_cmd->add_option("-o,--out", agg_out, "output metafile path")->required();
    agg_cmd->add_option("--report", agg_report, "also write the aggregation report here");
    agg_cmd->add_option("--epsilon", agg_cfg.epsilon, "graph-similarity rejection threshold")
        ->capture_default_str();
    agg_cmd->add_option("--sigma", agg_cfg.sigma, "field-overlap acceptance threshold")
        ->capture_default_str();

    // put / get
    auto* put_cmd = app.add_subcommand("put", "store a dataset version in the repository");
    std::string put_file;
    std::string put_data_root;
    put_cmd->add_option("metafile", put_file, "metafile path")->required();
    put_cmd->add_option("--data-root", put_data_root, "copy data files from this directory");

    auto* get_cmd = app.add_subcommand("get", "fetch a dataset version from the repository");
    std::string get_ref;
    std::string get_out;
    get_cmd->add_option("ref", get_ref, "dataset ref <uuid>@v<N>")->required();
    get_cmd->add_option("-o,--out", get_out, "output directory")->required();

    // index build
    auto* index_cmd = app.add_subcommand("index", "index operations");
    index_cmd->require_subcommand(1);
    auto* index_build_cmd =
        index_cmd->add_subcommand("build", "build the tf-idf index over latest versions");

    // search
    auto* search_cmd = app.add_subcommand("search", "query the index");
    std::vector<std::string> search_words;
    int search_k = 10;
    search_cmd->add_option("query", search_words, "query terms")->required();
    search_cmd->add_option("-k", search_k, "maximum results")->capture_default_str();

    // interact
    auto* interact_cmd =
        app.add_subcommand("interact", "record a dataset interaction in a user profile");
    std::string interact_ref;
    std::string interact_user = "default";
    double interact_lambda = 0.3;
    interact_cmd->add_option("ref", interact_ref, "dataset ref <uuid>@v<N>")->required();
    interact_cmd->add_option("--user", interact_user, "profile name")->capture_default_str();
    interact_cmd->add_option("--lambda", interact_lambda, "profile learning rate")
        ->capture_default_str();

    // recommend
    auto* recommend_cmd = app.add_subcommand("recommend", "rank datasets against a profile");
    std::string recommend_user = "default";
    int recommend_k = 10;
    bool recommend_seen = false;
    recommend_cmd->add_option("--user", recommend_user, "profile name")->capture_default_str();
    recommend_cmd->add_option("-k", recommend_k, "maximum results")->capture_default_str();
    recommend_cmd->add_flag("--include-seen", recommend_seen,
                            "allow already-interacted datasets in the results");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        ctx.repo_root = fs::path(repo_text);
        ctx.clock = system_now;
        if (const char* now_env = std::getenv("DFS_NOW")) {
            auto t = parse_timestamp(now_env);
            if (!t) throw UsageError("DFS_NOW must be a UTC timestamp YYYY-MM-DDTHH:MM:SSZ");
            ctx.clock = [t]() { return *t; };
        }
        ctx.uuid = random_uuid;
        if (const char* seed_env = std::getenv("DFS_UUID_SEED")) {
            std::uint64_t seed = 0;
            const std::string text(seed_env);
            if (text.empty()) throw UsageError("DFS_UUID_SEED must be a decimal integer");
            for (char c : text) {
                if (c < '0' || c > '9') {
                    throw UsageError("DFS_UUID_SEED must be a decimal integer");
                }
                seed = seed * 10 + static_cast<std::uint64_t>(c - '0');
            }
            ctx.uuid = seeded_uuid_source(seed);
        }

        auto opt_path = [](const std::string& s) {
            return s.empty() ? std::optional<fs::path>() : std::optional<fs::path>(s);
        };

        if (init_cmd->parsed()) return do_init(ctx, init_dir, init_name);
        if (validate_cmd->parsed()) {
            return do_validate(ctx, validate_file, opt_path(validate_data_root));
        }
        if (hash_cmd->parsed()) {
            return do_hash(ctx, hash_file, opt_path(hash_data_root), hash_write);
        }
        if (bump_cmd->parsed()) {
            if (!bump_meta && bump_files.empty()) {
                throw UsageError("bump needs --meta or at least one --file <local_id>");
            }
            return do_bump(ctx, bump_file, bump_meta, bump_files);
        }
        if (cite_cmd->parsed()) return do_cite(ctx, cite_file);
        if (diff_cmd->parsed()) return do_diff(ctx, diff_a, diff_b);
        if (agg_cmd->parsed()) {
            return do_aggregate(ctx, agg_a, agg_b, agg_out, opt_path(agg_report), agg_cfg);
        }
        if (put_cmd->parsed()) return do_put(ctx, put_file, opt_path(put_data_root));
        if (get_cmd->parsed()) return do_get(ctx, get_ref, get_out);
        if (index_cmd->parsed() && index_build_cmd->parsed()) return do_index_build(ctx);
        if (search_cmd->parsed()) return do_search(ctx, search_words, search_k);
        if (interact_cmd->parsed()) {
            return do_interact(ctx, interact_ref, interact_user, interact_lambda);
        }
        if (recommend_cmd->parsed()) {
            return do_recommend(ctx, recommend_user, recommend_k, recommend_seen);
        }
        throw UsageError("no subcommand given");
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace dfs::cli
