#pragma once

// Pipeline orchestration: each command reads its declared input artifacts,
// writes its output artifacts under the configured directory, and returns a
// one-line (or short multi-line) human summary.  All failures are reported
// by throwing varcg::Error subclasses; the CLI front end maps them to exit
// codes (0 success, 2 input error, 3 internal error).
//
// Stage artifacts (all under `out_dir`):
//   scan    -> functions.json, functions.csv
//   graph   -> graph.json [, graph.dot]
//   metrics -> metrics.csv
//   labels  -> labels.csv, labels_warnings.txt
//   stats   -> stats.json, stats.csv
//   report  -> report.txt, density.csv

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "varcg/graph.hpp"
#include "varcg/metrics.hpp"
#include "varcg/scan.hpp"

namespace varcg {

struct PipelineConfig {
    std::string manifest_path;
    std::string cve_manifest_path;  // empty = not provided
    std::string commit_log_path;    // empty = not provided
    /// (label, "allyes" | assignment-file path), in command-line order.
    std::vector<std::pair<std::string, std::string>> baselines;
    BetweennessMode betweenness_mode = BetweennessMode::Inverse;
    int bootstrap_b = 1000;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    bool write_dot = false;
};

// ---------------------------------------------------------------------------
// File and format helpers (exposed for tests)

/// Reads a whole file; throws Error naming the path on failure.
std::string read_text_file(const std::string& path);

/// Writes a whole file (creating parent directories); throws Error on failure.
void write_text_file(const std::string& path, const std::string& content);

/// Loads and scans a corpus manifest: either {"files": [...], "stoplist":
/// [...]} or a bare array of file entries, each {"path": text, "file_pc":
/// canonical pc text (optional, default "1")}.  Source paths are resolved
/// relative to the manifest's directory but recorded as written.
std::vector<ScannedFile> load_corpus(const std::string& manifest_path);

/// Parses an assignment file: one OPTION=y|n per line, '#' comments and
/// blank lines ignored.  `origin` names the file in diagnostics.
ConfigAssignment parse_assignment(const std::string& text, const std::string& origin);

/// Serialization of scanned corpora (the functions.json artifact).
/// serialize(parse(s)) is byte-identical to s.
std::string serialize_functions(const std::vector<ScannedFile>& corpus);
std::vector<ScannedFile> parse_functions(const std::string& text);

/// Human-readable per-record table (the functions.csv artifact).
std::string functions_csv(const std::vector<ScannedFile>& corpus);

/// RFC 4180 CSV reader (quoted fields, doubled quotes, CRLF tolerated).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Reads a labels.csv artifact back into id -> vulnerable.
std::map<std::string, bool> parse_label_csv(const std::string& text);

// ---------------------------------------------------------------------------
// Commands

std::string cmd_scan(const PipelineConfig& config);
std::string cmd_graph(const PipelineConfig& config);
std::string cmd_metrics(const PipelineConfig& config);
std::string cmd_labels(const PipelineConfig& config);
std::string cmd_stats(const PipelineConfig& config);
std::string cmd_report(const PipelineConfig& config);

}  // namespace varcg
