// Acceptance suite: one self-contained check per shipped guarantee, each
// printed as a single [PASS]/[FAIL] line with its runtime and budget.  The
// process exits non-zero if any criterion fails.  argv[1] must be the path
// to the varcg command-line binary (used by the exit-code criterion).

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "centrality_oracles.hpp"
#include "corpus_support.hpp"
#include "support.hpp"
#include "varcg/graph.hpp"
#include "varcg/metrics.hpp"
#include "varcg/pipeline.hpp"
#include "varcg/scan.hpp"
#include "varcg/stats.hpp"
#include "varcg/vuln.hpp"

using namespace varcg;

namespace {

std::string g_cli;  // path to the varcg binary

// ---------------------------------------------------------------------------
// 1. Worked-example exactness: a function defined under one option, with one
//    two-option-disjunction block and one single-option block inside, scores
//    internal_ifdefs = 2, internal_options = 3, external_options = 1.

bool criterion_worked_example(std::string& detail) {
    const char* src =
        "#ifdef OPT_A\n"
        "int fetch_value(int v)\n"
        "{\n"
        "    int r = base_value(v);\n"
        "#if defined(OPT_A) || defined(OPT_B)\n"
        "    r = extended_value(v);\n"
        "#endif\n"
        "    if (r) {\n"
        "        v = r + 1;\n"
        "    }\n"
        "#ifdef OPT_C\n"
        "    check_value(v, r);\n"
        "#endif\n"
        "    return v;\n"
        "}\n"
        "#endif\n";
    SourceFile file{"worked.c", src, pc_true()};
    auto records = extract_functions(file);
    if (records.size() != 1) {
        detail = "expected 1 record, got " + std::to_string(records.size());
        return false;
    }
    const FunctionRecord& fn = records[0];
    if (fn.internal_ifdefs != 2) {
        detail = "internal_ifdefs = " + std::to_string(fn.internal_ifdefs) + ", want 2";
        return false;
    }
    if (fn.internal_options.size() != 3) {
        detail = "internal_options = " + std::to_string(fn.internal_options.size()) +
                 ", want 3";
        return false;
    }
    auto graph = build_graph({{file.path, file.file_pc, records}});
    auto table = metric_table(graph, {}, {}, BetweennessMode::Inverse);
    if (table.rows.size() != 1 || table.rows[0].external_options != 1) {
        detail = "external_options != 1";
        return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// 2. Edge-weight rule: weight == 1 + (distinct options of the edge pc) on
//    every edge of 1,000 randomized record-level fixtures, with the option
//    set collected by the independent traversal oracle.

bool criterion_edge_weights(std::string& detail) {
    std::mt19937 rng(9217);
    const std::vector<std::string> options = {"W_A", "W_B", "W_C", "W_D", "W_E"};
    long long edges_checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        auto corpus = testsupport::random_scan_fixture(rng, options);
        auto graph = build_graph(corpus);
        for (const VCGEdge& edge : graph.edges) {
            std::set<std::string> opts;
            testsupport::oracle_collect_options(edge.pc, opts);
            if (edge.weight != 1 + static_cast<int>(opts.size())) {
                detail = "trial " + std::to_string(trial) + " edge " + edge.from +
                         " -> " + edge.to + ": weight " + std::to_string(edge.weight) +
                         " != 1 + " + std::to_string(opts.size());
                return false;
            }
            ++edges_checked;
        }
    }
    if (edges_checked < 1000) {
        detail = "only " + std::to_string(edges_checked) + " edges exercised";
        return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// 3. Projection equivalence: for 20 generated corpora over <= 8 options,
//    projecting the variational graph equals the flatten-first oracle graph
//    under every one of the 2^k configurations.

bool criterion_projection(std::string& detail) {
    std::mt19937 rng(501213);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = 3 + trial % 6;  // 3..8 options
        std::vector<std::string> options;
        for (int i = 0; i < k; ++i) options.push_back("P_OPT" + std::to_string(i));
        auto gen = testsupport::generate_corpus(
            rng, testsupport::detail::rand_int(rng, 2, 4), options);
        auto graph = build_graph(testsupport::scan_corpus(gen));
        for (const ConfigAssignment& config : testsupport::enumerate_configs(options)) {
            ProjectedGraph projected = project(graph, config);
            testsupport::FlatGraph oracle = testsupport::flat_graph(gen, config);
            if (projected.nodes != oracle.nodes || projected.edges != oracle.edges) {
                detail = "trial " + std::to_string(trial) + ": projection disagrees "
                         "with the flatten oracle";
                return false;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// 4. Centrality oracles: exact degree sums; eigenvector within 1e-6 of a
//    dense power iteration on 50 primitive graphs (<= 20 nodes); betweenness
//    within 1e-9 of exhaustive path enumeration on 30 graphs (<= 15 nodes),
//    both distance modes.

Adjacency adjacency_of(const testsupport::WeightedDigraph& graph) {
    Adjacency adj;
    for (int i = 0; i < graph.n; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "n%02d", i);
        adj.ids.push_back(buf);
    }
    adj.out.resize(adj.ids.size());
    for (const auto& [u, v, w] : graph.edges)
        adj.out[static_cast<std::size_t>(u)].push_back({v, static_cast<double>(w)});
    return adj;
}

bool criterion_centralities(std::string& detail) {
    std::mt19937 rng(77023);

    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 19u);
        auto graph = testsupport::random_sparse_digraph(rng, n, 6);
        Adjacency adj = adjacency_of(graph);
        DegreeResult degrees = weighted_degrees(adj);
        std::map<std::string, long long> in_oracle, out_oracle;
        for (const std::string& id : adj.ids) in_oracle[id] = out_oracle[id] = 0;
        for (const auto& [u, v, w] : graph.edges) {
            out_oracle[adj.ids[static_cast<std::size_t>(u)]] += w;
            in_oracle[adj.ids[static_cast<std::size_t>(v)]] += w;
        }
        if (degrees.in != in_oracle || degrees.out != out_oracle) {
            detail = "degree trial " + std::to_string(trial) + " mismatch";
            return false;
        }
    }

    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 19u);  // <= 20 nodes
        auto graph = testsupport::random_primitive_digraph(rng, n);
        EigenvectorResult result = eigenvector_centrality(adjacency_of(graph));
        std::vector<double> oracle = testsupport::oracle_eigenvector(graph);
        if (result.degenerate || !result.converged) {
            detail = "eigen trial " + std::to_string(trial) + " did not converge";
            return false;
        }
        for (int i = 0; i < n; ++i) {
            const std::string id = adjacency_of(graph).ids[static_cast<std::size_t>(i)];
            if (std::fabs(result.scores.at(id) - oracle[static_cast<std::size_t>(i)]) >
                1e-6) {
                detail = "eigen trial " + std::to_string(trial) + " node " + id +
                         " off by more than 1e-6";
                return false;
            }
        }
    }

    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 14u);  // <= 15 nodes
        auto graph = testsupport::random_sparse_digraph(rng, n, 5);
        Adjacency adj = adjacency_of(graph);
        for (bool inverse : {true, false}) {
            auto scores = betweenness_centrality(
                adj, inverse ? BetweennessMode::Inverse : BetweennessMode::Direct);
            std::vector<double> oracle = testsupport::oracle_betweenness(graph, inverse);
            for (int i = 0; i < n; ++i) {
                const std::string& id = adj.ids[static_cast<std::size_t>(i)];
                if (std::fabs(scores.at(id) - oracle[static_cast<std::size_t>(i)]) >
                    1e-9) {
                    detail = "betweenness trial " + std::to_string(trial) +
                             (inverse ? " (inverse)" : " (direct)") + " node " + id +
                             " off by more than 1e-9";
                    return false;
                }
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// 5. Statistics oracles: frozen Welch fixtures at 1e-9; exact t_cdf center;
//    t_cdf(1.959964, 1e6) within 1e-6 of 0.975; frozen logistic coefficients
//    at 1e-6; odds ratios 1.15 vs 1.07 give a 6.96 percent change (+- 0.01).

bool criterion_stats_oracles(std::string& detail) {
    auto close = [](double a, double b, double tol) { return std::fabs(a - b) <= tol; };

    {
        TTestResult r = welch_t_test({2.1, 2.5, 2.8, 3.0}, {1.0, 1.2, 1.1, 1.4});
        if (!close(r.t, 6.6713453901794422, 1e-9) ||
            !close(r.df, 4.1014509278526834, 1e-9) ||
            !close(r.p_two_sided, 0.0023987322106347399, 1e-9)) {
            detail = "Welch fixture 1 outside 1e-9";
            return false;
        }
    }
    {
        TTestResult r = welch_t_test({5, 7, 8, 9, 11, 14}, {3, 4, 4, 6});
        if (!close(r.t, 3.307475463158259, 1e-9) ||
            !close(r.df, 6.9990478457510106, 1e-9) ||
            !close(r.p_two_sided, 0.01298908325231754, 1e-9)) {
            detail = "Welch fixture 2 outside 1e-9";
            return false;
        }
    }
    for (double df : {0.5, 1.0, 2.7, 10.0, 1e6}) {
        if (t_cdf(0.0, df) != 0.5) {
            detail = "t_cdf(0, df) not exactly 0.5";
            return false;
        }
    }
    if (!close(t_cdf(1.959964, 1e6), 0.975, 1e-6)) {
        detail = "t_cdf(1.959964, 1e6) outside 1e-6 of 0.975";
        return false;
    }
    {
        const std::vector<double> x = {0.2, 0.5, 0.9, 1.3, 1.7, 2.1, 2.6,
                                       3.0, 3.4, 3.9, 0.4, 0.8, 1.1, 1.6,
                                       2.0, 2.4, 2.9, 3.3, 3.7, 4.2};
        const std::vector<bool> y = {false, false, false, false, false, true, false,
                                     true,  true,  true,  false, false, true, false,
                                     true,  false, true,  true,  true,  true};
        std::vector<std::vector<double>> design;
        for (double v : x) design.push_back({1.0, v});
        LogisticModel model = logistic_fit(design, y);
        if (!model.converged ||
            !close(model.coefficients[0], -3.9486610546300658, 1e-6) ||
            !close(model.coefficients[1], 1.8998775184953947, 1e-6)) {
            detail = "logistic fixture coefficients outside 1e-6";
            return false;
        }
    }
    if (!close(percent_change(1.15, 1.07), 6.96, 0.01)) {
        detail = "percent change of odds ratios 1.15 vs 1.07 not within 0.01 of 6.96";
        return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// 6. Bootstrap calibration: when pool and observed sample come from the same
//    distribution, the observed t lands inside the (0.025, 0.975) null
//    percentile band in >= 90 of 100 seeded trials at B = 1000, and a
//    repeated run reproduces null_t bit for bit.

bool criterion_bootstrap_calibration(std::string& detail) {
    constexpr std::uint64_t kMaster = 424242;
    int hits = 0;
    for (int trial = 0; trial < 100; ++trial) {
        DetRng rng(derive_seed(kMaster, static_cast<std::uint64_t>(trial)));
        auto normal = [&rng] {
            const double u1 = 1.0 - rng.unit();
            const double u2 = rng.unit();
            return std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(2.0 * 3.141592653589793 * u2);
        };
        // The null resamples inside the pool, so its t-spread carries a
        // finite-population shrink of about (1 - n/N); a small sample from a
        // large pool keeps that distortion inside the calibration budget.
        std::vector<double> pool(600), observed(20);
        for (double& v : pool) v = 10.0 + 2.0 * normal();
        for (double& v : observed) v = 10.0 + 2.0 * normal();
        BootstrapResult result = bootstrap_null(
            pool, observed, 1000, Transform::Identity,
            derive_seed(kMaster, 1000 + static_cast<std::uint64_t>(trial)));
        if (result.percentile_of_observed > 0.025 &&
            result.percentile_of_observed < 0.975)
            ++hits;
        if (trial == 0) {
            BootstrapResult again = bootstrap_null(
                pool, observed, 1000, Transform::Identity,
                derive_seed(kMaster, 1000));
            if (again.null_t.size() != result.null_t.size() ||
                std::memcmp(again.null_t.data(), result.null_t.data(),
                            result.null_t.size() * sizeof(double)) != 0) {
                detail = "same seed did not reproduce null_t byte-for-byte";
                return false;
            }
        }
    }
    if (hits < 90) {
        detail = "only " + std::to_string(hits) + "/100 trials inside (0.025, 0.975)";
        return false;
    }
    detail = std::to_string(hits) + "/100 inside the band";
    return true;
}

// ---------------------------------------------------------------------------
// 7. Directional end-to-end run on a synthetic corpus of >= 2,000 functions
//    whose vulnerable group is generated with ~3x internal-#ifdef density and
//    fewer external options: the pipeline must report ratio_of_means > 1 for
//    internal_ifdefs and internal_options, < 1 for external_options, all with
//    p < 0.01.

struct SynthCorpus {
    int files = 0;
    int functions = 0;
    int vulnerable = 0;
};

/// Writes sources, a corpus manifest and a CVE manifest under `dir`.  Every
/// (global_index % 7 == 0) function is made vulnerable via a fix-commit hunk
/// inside its body.
SynthCorpus write_synthetic_corpus(const std::filesystem::path& dir, int n_files,
                                   int fns_per_file, std::uint32_t seed) {
    std::mt19937 rng(seed);
    auto pick = [&rng](int bound) { return static_cast<int>(rng() % static_cast<unsigned>(bound)); };

    nlohmann::ordered_json manifest;
    manifest["files"] = nlohmann::ordered_json::array();
    nlohmann::ordered_json commits = nlohmann::ordered_json::array();

    SynthCorpus info;
    info.files = n_files;
    int global_index = 0;
    for (int f = 0; f < n_files; ++f) {
        const std::string path = "src/mod" + std::to_string(f) + ".c";
        std::string content;
        int line = 0;
        auto emit = [&](const std::string& text) {
            content += text + "\n";
            ++line;
        };
        nlohmann::ordered_json hunks_diff;
        std::string diff = "--- a/" + path + "\n+++ b/" + path + "\n";
        bool file_has_hunks = false;
        std::string prev_fn;

        for (int i = 0; i < fns_per_file; ++i, ++global_index) {
            const bool vulnerable = global_index % 7 == 0;
            const std::string name = "fn_" + std::to_string(f) + "_" + std::to_string(i);

            // External guard: common and two-option for the healthy group,
            // rare and single-option for the vulnerable group.
            int guard_depth = 0;
            if (vulnerable) {
                if (pick(100) < 20) {
                    emit("#if defined(EXT_" + std::to_string(pick(20)) + ")");
                    guard_depth = 1;
                }
            } else if (pick(100) < 85) {
                emit("#if defined(EXT_" + std::to_string(pick(20)) + ") || defined(EXT_" +
                     std::to_string(pick(20)) + ")");
                guard_depth = 1;
            }

            emit("int " + name + "(int v)");
            emit("{");
            emit("    int r = v;");
            const int fix_line = line;  // the "int r = v;" line, 1-based
            const int blocks = vulnerable ? 2 + pick(3) : pick(2);
            for (int b = 0; b < blocks; ++b) {
                if (pick(100) < 30)
                    emit("#if defined(INT_" + std::to_string(pick(40)) +
                         ") && defined(INT_" + std::to_string(pick(40)) + ")");
                else
                    emit("#ifdef INT_" + std::to_string(pick(40)));
                emit("    r += " + std::to_string(1 + b) + ";");
                emit("#endif");
            }
            if (!prev_fn.empty() && pick(100) < 60) emit("    r += " + prev_fn + "(r);");
            emit("    return r;");
            emit("}");
            if (guard_depth) emit("#endif");
            emit("");
            prev_fn = name;

            if (vulnerable) {
                ++info.vulnerable;
                diff += "@@ -" + std::to_string(fix_line) + ",1 +" +
                        std::to_string(fix_line) + ",1 @@\n"
                        "-    int r = v;\n"
                        "+    int r = v + 1;\n";
                file_has_hunks = true;
            }
            ++info.functions;
        }

        testsupport::write_file(dir / path, content);
        nlohmann::ordered_json entry;
        entry["path"] = path;
        manifest["files"].push_back(entry);

        if (file_has_hunks) {
            nlohmann::ordered_json commit;
            commit["commit_id"] = "fix" + std::to_string(f);
            commit["message"] = "harden option handling (CVE-2024-1000)";
            commit["files"] = nlohmann::ordered_json::array();
            nlohmann::ordered_json file_entry;
            file_entry["path"] = path;
            file_entry["diff"] = diff;
            commit["files"].push_back(file_entry);
            commits.push_back(commit);
        }
        (void)hunks_diff;
    }

    nlohmann::ordered_json cves = nlohmann::ordered_json::array();
    nlohmann::ordered_json cve;
    cve["cve_id"] = "CVE-2024-1000";
    cve["commits"] = commits;
    cves.push_back(cve);

    testsupport::write_file(dir / "manifest.json", manifest.dump(1) + "\n");
    testsupport::write_file(dir / "cves.json", cves.dump(1) + "\n");
    return info;
}

bool criterion_directional(std::string& detail) {
    testsupport::TempDir dir("acceptance_directional");
    SynthCorpus info = write_synthetic_corpus(dir.path(), 110, 20, 70707);
    if (info.functions < 2000) {
        detail = "generator produced only " + std::to_string(info.functions) +
                 " functions";
        return false;
    }

    PipelineConfig config;
    config.manifest_path = (dir.path() / "manifest.json").string();
    config.cve_manifest_path = (dir.path() / "cves.json").string();
    config.out_dir = (dir.path() / "out").string();
    config.bootstrap_b = 200;
    config.seed = 20240815;

    (void)cmd_scan(config);
    (void)cmd_graph(config);
    (void)cmd_labels(config);
    (void)cmd_metrics(config);
    (void)cmd_stats(config);

    auto doc = nlohmann::json::parse(testsupport::read_file(
        std::filesystem::path(config.out_dir) / "stats.json"));
    if (doc.at("n_functions").get<int>() < 2000) {
        detail = "pipeline saw fewer than 2000 functions";
        return false;
    }

    auto entry_for = [&doc](const std::string& name) -> const nlohmann::json& {
        for (const auto& entry : doc.at("metrics"))
            if (entry.at("metric") == name) return entry;
        throw std::runtime_error("metric " + name + " missing from stats output");
    };
    struct Expect {
        const char* metric;
        bool ratio_above_one;
    };
    for (const Expect& expect : {Expect{"internal_ifdefs", true},
                                 Expect{"internal_options", true},
                                 Expect{"external_options", false}}) {
        const nlohmann::json& entry = entry_for(expect.metric);
        if (entry.contains("error")) {
            detail = std::string(expect.metric) + ": " +
                     entry.at("error").get<std::string>();
            return false;
        }
        const nlohmann::json& test = entry.at("test");
        if (test.at("ratio_of_means").is_null()) {
            detail = std::string(expect.metric) + ": ratio undefined";
            return false;
        }
        const double ratio = test.at("ratio_of_means").get<double>();
        const double p = test.at("p").get<double>();
        if (expect.ratio_above_one ? ratio <= 1.0 : ratio >= 1.0) {
            detail = std::string(expect.metric) + ": ratio_of_means " +
                     std::to_string(ratio) + " on the wrong side of 1";
            return false;
        }
        if (p >= 0.01) {
            detail = std::string(expect.metric) + ": p = " + std::to_string(p) +
                     " not < 0.01";
            return false;
        }
    }
    detail = std::to_string(info.functions) + " functions, " +
             std::to_string(info.vulnerable) + " vulnerable";
    return true;
}

// ---------------------------------------------------------------------------
// 8. Determinism and exit codes through the installed CLI: two full runs
//    produce byte-identical artifacts; malformed inputs exit 2, success 0.

int run_cli(const std::string& args) {
    const std::string command = "\"" + g_cli + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    if (status == -1 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

bool criterion_determinism(std::string& detail) {
    if (g_cli.empty()) {
        detail = "no CLI path given (argv[1])";
        return false;
    }
    testsupport::TempDir dir("acceptance_determinism");
    write_synthetic_corpus(dir.path(), 12, 6, 31337);
    testsupport::write_file(dir.path() / "base.cfg", "EXT_0=y\nEXT_1=y\nINT_0=n\n");
    const std::string manifest = (dir.path() / "manifest.json").string();
    const std::string cves = (dir.path() / "cves.json").string();
    const std::string cfg = (dir.path() / "base.cfg").string();

    for (const char* out : {"run1", "run2"}) {
        const std::string out_dir = (dir.path() / out).string();
        struct Step {
            const char* what;
            std::string args;
        };
        const Step steps[] = {
            {"scan", "scan --manifest \"" + manifest + "\" --out \"" + out_dir + "\""},
            {"graph", "graph --out \"" + out_dir + "\" --dot"},
            {"labels",
             "labels --out \"" + out_dir + "\" --cve-manifest \"" + cves + "\""},
            {"metrics", "metrics --out \"" + out_dir +
                            "\" --baseline allyes=allyes --baseline defaults=\"" + cfg +
                            "\" --betweenness-mode inverse"},
            {"stats", "stats --out \"" + out_dir + "\" --bootstrap-b 150 --seed 11"},
            {"report", "report --out \"" + out_dir + "\""},
        };
        for (const Step& step : steps) {
            const int code = run_cli(step.args);
            if (code != 0) {
                detail = std::string(step.what) + " exited " + std::to_string(code) +
                         " instead of 0";
                return false;
            }
        }
    }
    for (const char* name :
         {"functions.json", "functions.csv", "graph.json", "graph.dot", "metrics.csv",
          "labels.csv", "labels_warnings.txt", "stats.json", "stats.csv", "report.txt",
          "density.csv"}) {
        const std::string a = testsupport::read_file(dir.path() / "run1" / name);
        const std::string b = testsupport::read_file(dir.path() / "run2" / name);
        if (a.empty() && std::string(name) != "labels_warnings.txt") {
            detail = std::string(name) + " missing or empty";
            return false;
        }
        if (a != b) {
            detail = std::string(name) + " differs between runs";
            return false;
        }
    }

    // Exit-code contract on malformed inputs.
    testsupport::write_file(dir.path() / "bad.json", "{ not json");
    testsupport::write_file(dir.path() / "unbalanced" / "u.c",
                            "#ifdef A\nint f(void) { return 0; }\n");
    testsupport::write_file(dir.path() / "unbalanced" / "m.json",
                            "{\"files\": [{\"path\": \"u.c\"}]}");
    testsupport::write_file(dir.path() / "badcfg.cfg", "EXT_0=maybe\n");
    struct Case {
        const char* what;
        std::string args;
        int want;
    };
    const std::string out1 = (dir.path() / "run1").string();
    const std::string codes_out = (dir.path() / "codes").string();
    const Case cases[] = {
        {"missing manifest",
         "scan --manifest \"" + (dir.path() / "nope.json").string() + "\" --out \"" +
             codes_out + "\"",
         2},
        {"malformed manifest",
         "scan --manifest \"" + (dir.path() / "bad.json").string() + "\" --out \"" +
             codes_out + "\"",
         2},
        {"unbalanced directives",
         "scan --manifest \"" + (dir.path() / "unbalanced" / "m.json").string() +
             "\" --out \"" + codes_out + "\"",
         2},
        {"graph without scan", "graph --out \"" + codes_out + "-none\"", 2},
        {"malformed assignment",
         "metrics --out \"" + out1 + "\" --baseline bad=\"" +
             (dir.path() / "badcfg.cfg").string() + "\"",
         2},
        {"malformed cve manifest",
         "labels --out \"" + out1 + "\" --cve-manifest \"" +
             (dir.path() / "bad.json").string() + "\"",
         2},
        {"unknown flag", "scan --bogus-flag --out \"" + codes_out + "\"", 2},
        {"success", "report --out \"" + out1 + "\"", 0},
    };
    for (const Case& c : cases) {
        const int code = run_cli(c.args);
        if (code != c.want) {
            detail = std::string(c.what) + " exited " + std::to_string(code) +
                     ", want " + std::to_string(c.want);
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------

struct Criterion {
    int number;
    const char* name;
    double limit_seconds;
    std::function<bool(std::string&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli = argv[1];

    const std::vector<Criterion> criteria = {
        {1, "worked-example metrics are exactly 2/3/1", 1.0, criterion_worked_example},
        {2, "edge weight = 1 + option count on 1000 fixtures", 10.0,
         criterion_edge_weights},
        {3, "projection equals the flatten oracle on 20 corpora", 120.0,
         criterion_projection},
        {4, "centralities match independent oracles", 120.0, criterion_centralities},
        {5, "statistics match frozen reference values", 30.0, criterion_stats_oracles},
        {6, "bootstrap percentile calibration at B=1000", 120.0,
         criterion_bootstrap_calibration},
        {7, "directional effects reproduced end to end", 180.0, criterion_directional},
        {8, "byte-deterministic artifacts and exit codes", 60.0,
         criterion_determinism},
    };

    bool all_pass = true;
    for (const Criterion& criterion : criteria) {
        std::string detail;
        bool ok = false;
        const auto start = std::chrono::steady_clock::now();
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        if (ok && elapsed > criterion.limit_seconds) {
            ok = false;
            detail = "over time budget";
        }
        std::printf("[%s] criterion %d: %s (%.2fs / %.0fs)%s%s\n",
                    ok ? "PASS" : "FAIL", criterion.number, criterion.name, elapsed,
                    criterion.limit_seconds, detail.empty() ? "" : " — ",
                    detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && ok;
    }
    return all_pass ? 0 : 1;
}
