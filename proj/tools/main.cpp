// varcg command-line front end.
//
// Exit codes: 0 = success (warnings included), 2 = bad input (anything the
// library reports as varcg::Error, plus command-line usage errors), 3 =
// internal error (unexpected exceptions).

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "varcg/errors.hpp"
#include "varcg/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"varcg: configuration-complexity analysis of C corpora"};
    app.require_subcommand(1);

    varcg::PipelineConfig config;
    std::vector<std::string> baseline_args;
    std::string betweenness = "inverse";

    auto* scan =
        app.add_subcommand("scan", "Scan the corpus into per-function records");
    scan->add_option("--manifest", config.manifest_path,
                     "corpus manifest (JSON): files, optional per-file presence "
                     "conditions, optional stoplist")
        ->required();

    auto* graph = app.add_subcommand(
        "graph", "Build the variational call graph from scanned records");
    graph->add_flag("--dot", config.write_dot, "also write graph.dot (Graphviz)");

    auto* metrics = app.add_subcommand(
        "metrics", "Compute per-function complexity and centrality metrics");
    metrics->add_option("--baseline", baseline_args,
                        "baseline projection <label>=<assignment file|allyes>; "
                        "repeatable");
    metrics->add_option("--betweenness-mode", betweenness,
                        "edge weight -> distance mapping for betweenness")
        ->check(CLI::IsMember({"inverse", "direct"}));

    auto* labels =
        app.add_subcommand("labels", "Label functions from CVE fix diffs");
    labels->add_option("--cve-manifest", config.cve_manifest_path,
                       "CVE manifest (JSON): CVEs with fix commits and diffs");
    labels->add_option("--commit-log", config.commit_log_path,
                       "exported commit log to cross-check against the manifest");

    auto* stats = app.add_subcommand(
        "stats", "Compare vulnerable vs non-vulnerable metric distributions");
    stats->add_option("--bootstrap-b", config.bootstrap_b,
                      "bootstrap iterations (>= 100)");
    stats->add_option("--seed", config.seed, "master random seed");

    auto* report = app.add_subcommand(
        "report", "Render the plain-text report and density table");

    for (auto* cmd : {scan, graph, metrics, labels, stats, report})
        cmd->add_option("--out", config.out_dir, "artifact directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const std::string& entry : baseline_args) {
            const std::size_t eq = entry.find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size())
                throw varcg::Error(
                    "metrics: --baseline expects <label>=<assignment file|allyes>, "
                    "got '" +
                    entry + "'");
            config.baselines.emplace_back(entry.substr(0, eq), entry.substr(eq + 1));
        }
        config.betweenness_mode = betweenness == "direct"
                                      ? varcg::BetweennessMode::Direct
                                      : varcg::BetweennessMode::Inverse;

        std::string summary;
        if (scan->parsed()) summary = varcg::cmd_scan(config);
        else if (graph->parsed()) summary = varcg::cmd_graph(config);
        else if (metrics->parsed()) summary = varcg::cmd_metrics(config);
        else if (labels->parsed()) summary = varcg::cmd_labels(config);
        else if (stats->parsed()) summary = varcg::cmd_stats(config);
        else summary = varcg::cmd_report(config);
        std::cout << summary << "\n";
        return 0;
    } catch (const varcg::Error& e) {
        std::cerr << "varcg: error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "varcg: internal error: " << e.what() << "\n";
        return 3;
    }
}
