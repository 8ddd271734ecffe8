#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "varcg/graph.hpp"

namespace varcg {

// ---------------------------------------------------------------------------
// Configuration-complexity metrics over variational call graphs.
//
// The "weighted" metrics treat edge weights (1 + option count) as strengths:
// more variability on a call means a stronger coupling in the weighted graph.
// Baseline columns re-compute the same centralities on the plain projection
// of a single configuration (all weights 1), which is what a
// variability-oblivious analysis would see.
// ---------------------------------------------------------------------------

/// How edge weights map to traversal distances for betweenness.
///   Inverse: distance = 1/weight (heavier variability = closer coupling);
///   Direct:  distance = weight   (heavier variability = farther apart).
enum class BetweennessMode { Inverse, Direct };

/// Directed weighted adjacency shared by the centrality routines.  Node ids
/// are sorted; `out[u]` lists (target index, weight) with weight >= 1.
struct Adjacency {
    std::vector<std::string> ids;
    std::vector<std::vector<std::pair<int, double>>> out;

    static Adjacency from_graph(const VariationalCallGraph& graph);
    static Adjacency from_projection(const ProjectedGraph& projected);
};

/// Weighted in/out degree: sum of incident edge weights (self-loops count
/// toward both).  Integral because graph weights are integral.
struct DegreeResult {
    std::map<std::string, long long> in;
    std::map<std::string, long long> out;
};
DegreeResult weighted_degrees(const Adjacency& adj);

/// Eigenvector centrality by power iteration on incoming strength, with the
/// maximum component normalized to 1 each round.  Converges when the
/// max-norm delta drops below 1e-12 (at most 10000 iterations).  Graphs
/// whose iteration collapses to the zero vector (no cycle feeds mass back)
/// are flagged degenerate with all-zero scores.
struct EigenvectorResult {
    std::map<std::string, double> scores;
    bool degenerate = false;
    bool converged = true;
    int iterations = 0;
};
EigenvectorResult eigenvector_centrality(const Adjacency& adj);

/// Betweenness centrality (Brandes), directed, endpoints excluded,
/// self-loops ignored.  Equal-length path detection is exact: integral edge
/// distances are scaled to a common integer grid (falling back to an
/// epsilon comparison only if the scale would overflow 64-bit range).
std::map<std::string, double> betweenness_centrality(const Adjacency& adj,
                                                     BetweennessMode mode);

/// Centralities of one node in one baseline projection (0 when the node is
/// not part of that configuration).
struct BaselineColumns {
    long long in_deg = 0;
    long long out_deg = 0;
    double eigen = 0.0;
    double between = 0.0;
};

struct MetricRow {
    std::string id;
    std::string file;
    std::string name;
    int size_loc = 0;
    int internal_ifdefs = 0;
    int internal_options = 0;
    int external_options = 0;  // option_count of the node pc
    long long w_in_deg = 0;
    long long w_out_deg = 0;
    double w_eigen = 0.0;
    double w_between = 0.0;
    std::vector<std::pair<std::string, BaselineColumns>> baselines;
    std::optional<bool> vulnerable;
};

struct MetricTable {
    std::vector<MetricRow> rows;  // sorted by id
    std::vector<std::string> warnings;
};

/// Compute all per-function metrics.  `baselines` are (label, configuration)
/// pairs evaluated in the given order; `labels` maps node ids to
/// vulnerability (ids absent stay unknown; unknown ids warn).
MetricTable metric_table(
    const VariationalCallGraph& graph,
    const std::vector<std::pair<std::string, ConfigAssignment>>& baselines,
    const std::map<std::string, bool>& labels, BetweennessMode mode);

/// CSV rendering: header, then one row per function sorted by id.  Floats
/// use 12 significant digits; unknown vulnerability is an empty field.
std::string metric_csv(const MetricTable& table);

/// 12-significant-digit rendering used for all floating-point artifacts.
std::string format_double(double value);

/// RFC 4180 field quoting: wraps in double quotes (doubling embedded quotes)
/// only when the value contains a comma, quote, or newline.
std::string csv_field(const std::string& value);

}  // namespace varcg
