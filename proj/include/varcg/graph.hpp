#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "varcg/pc.hpp"
#include "varcg/scan.hpp"

namespace varcg {

// ---------------------------------------------------------------------------
// Variational call graphs
//
// Nodes are function definitions (id = "file::name"), each carrying the
// presence condition under which the definition exists (file condition AND
// definition context).  Edges are name-resolved calls; an edge's presence
// condition is the conjunction of the caller's condition, the call site's
// local condition and the callee's condition, OR-merged over all call sites
// between the same pair.  The edge weight is 1 plus the number of distinct
// options in the merged condition, so unconditional calls weigh 1 and every
// option involved anywhere in the edge's variability adds one.
// ---------------------------------------------------------------------------

/// Scanner output for one file, ready for graph construction.
struct ScannedFile {
    std::string path;
    PcRef file_pc;
    std::vector<FunctionRecord> functions;
};

struct VCGNode {
    std::string id;    // file + "::" + name
    std::string name;
    std::string file;
    PcRef pc;          // satisfiable by construction
    int size_loc = 0;
    int internal_ifdefs = 0;
    int internal_options = 0;
};

struct VCGEdge {
    std::string from;
    std::string to;
    PcRef pc;
    int weight = 0;  // 1 + option_count(pc)
};

struct UnresolvedCall {
    std::string from;    // caller node id
    std::string callee;  // name with no defining node anywhere in the corpus
    int line = 0;
};

struct VariationalCallGraph {
    std::vector<VCGNode> nodes;            // sorted by id
    std::vector<VCGEdge> edges;            // sorted by (from, to)
    std::vector<UnresolvedCall> unresolved;  // sorted by (from, callee, line)

    const VCGNode* find_node(const std::string& id) const;
};

/// Build the graph for a corpus.  Functions whose combined presence condition
/// is unsatisfiable are dropped; multiple definitions of one name in one file
/// (disjoint branches) merge into a single node whose pc is the disjunction.
/// Scanning the same path twice is a ValidationError (duplicate node ids).
VariationalCallGraph build_graph(const std::vector<ScannedFile>& corpus);

/// The plain call graph visible under one configuration.
struct ProjectedGraph {
    std::set<std::string> nodes;
    std::set<std::pair<std::string, std::string>> edges;
};

ProjectedGraph project(const VariationalCallGraph& graph, const ConfigAssignment& config);

/// Deterministic JSON serialization (stable key order, sorted elements,
/// canonical pc rendering).  export_graph_json(import_graph_json(s)) returns
/// s for any s this module produced.
std::string export_graph_json(const VariationalCallGraph& graph);

/// Graphviz rendering with node presence conditions and edge weights.
std::string export_graph_dot(const VariationalCallGraph& graph);

/// Parse and validate a serialized graph: malformed JSON or pc text raises
/// ParseError; duplicate node ids, unknown edge endpoints, or a stored weight
/// that contradicts the edge pc raise ValidationError.
VariationalCallGraph import_graph_json(const std::string& text);

}  // namespace varcg
