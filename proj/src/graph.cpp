#include "varcg/graph.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "varcg/errors.hpp"

namespace varcg {

using ordered_json = nlohmann::ordered_json;

const VCGNode* VariationalCallGraph::find_node(const std::string& id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                               [](const VCGNode& n, const std::string& key) {
                                   return n.id < key;
                               });
    return it != nodes.end() && it->id == id ? &*it : nullptr;
}

VariationalCallGraph build_graph(const std::vector<ScannedFile>& corpus) {
    std::set<std::string> paths;
    for (const ScannedFile& file : corpus)
        if (!paths.insert(file.path).second)
            throw ValidationError("file scanned twice (duplicate node ids): " + file.path);

    // Merge definition records into nodes.  The side table keeps the union
    // of internal option sets; the record list drives edge construction with
    // each record's own presence condition.
    struct RecordRef {
        const FunctionRecord* record;
        PcRef pc;  // file_pc && def_pc, satisfiable
        std::string node_id;
    };
    std::map<std::string, VCGNode> nodes;
    std::map<std::string, std::set<std::string>> internal_options;
    std::vector<RecordRef> records;

    for (const ScannedFile& file : corpus) {
        for (const FunctionRecord& fn : file.functions) {
            PcRef pc = pc_and(file.file_pc ? file.file_pc : pc_true(), fn.def_pc);
            if (!is_satisfiable(pc)) continue;  // exists in no configuration
            std::string id = file.path + "::" + fn.name;
            auto [it, inserted] = nodes.try_emplace(id);
            VCGNode& node = it->second;
            if (inserted) {
                node = VCGNode{id,         fn.name,
                               file.path,  pc,
                               fn.size_loc, fn.internal_ifdefs,
                               0};
            } else {
                node.pc = pc_or(node.pc, pc);
                node.size_loc = std::max(node.size_loc, fn.size_loc);
                node.internal_ifdefs = std::max(node.internal_ifdefs, fn.internal_ifdefs);
            }
            auto& opts = internal_options[id];
            opts.insert(fn.internal_options.begin(), fn.internal_options.end());
            records.push_back({&fn, pc, id});
        }
    }
    for (auto& [id, node] : nodes)
        node.internal_options = static_cast<int>(internal_options[id].size());

    std::map<std::string, std::vector<const VCGNode*>> by_name;
    for (const auto& [id, node] : nodes) by_name[node.name].push_back(&node);

    std::map<std::pair<std::string, std::string>, PcRef> edge_pcs;
    std::vector<UnresolvedCall> unresolved;
    for (const RecordRef& ref : records) {
        for (const CallSite& call : ref.record->calls) {
            auto it = by_name.find(call.callee);
            if (it == by_name.end()) {
                unresolved.push_back({ref.node_id, call.callee, call.line});
                continue;
            }
            for (const VCGNode* callee : it->second) {
                PcRef pc = pc_and(pc_and(ref.pc, call.local_pc), callee->pc);
                if (!is_satisfiable(pc)) continue;
                auto [epos, fresh] =
                    edge_pcs.try_emplace({ref.node_id, callee->id}, pc);
                if (!fresh) epos->second = pc_or(epos->second, pc);
            }
        }
    }

    VariationalCallGraph graph;
    graph.nodes.reserve(nodes.size());
    for (auto& [id, node] : nodes) graph.nodes.push_back(std::move(node));
    graph.edges.reserve(edge_pcs.size());
    for (const auto& [key, pc] : edge_pcs)
        graph.edges.push_back(
            {key.first, key.second, pc, 1 + static_cast<int>(option_count(pc))});
    std::sort(unresolved.begin(), unresolved.end(),
              [](const UnresolvedCall& a, const UnresolvedCall& b) {
                  return std::tie(a.from, a.callee, a.line) <
                         std::tie(b.from, b.callee, b.line);
              });
    graph.unresolved = std::move(unresolved);
    return graph;
}

ProjectedGraph project(const VariationalCallGraph& graph, const ConfigAssignment& config) {
    ProjectedGraph out;
    for (const VCGNode& node : graph.nodes)
        if (evaluate(node.pc, config)) out.nodes.insert(node.id);
    for (const VCGEdge& edge : graph.edges) {
        if (!evaluate(edge.pc, config)) continue;
        // The edge pc entails both endpoint pcs by construction.
        if (out.nodes.count(edge.from) && out.nodes.count(edge.to))
            out.edges.insert({edge.from, edge.to});
    }
    return out;
}

std::string export_graph_json(const VariationalCallGraph& graph) {
    ordered_json doc;
    doc["nodes"] = ordered_json::array();
    for (const VCGNode& node : graph.nodes) {
        doc["nodes"].push_back({{"id", node.id},
                                {"name", node.name},
                                {"file", node.file},
                                {"pc", render(node.pc)},
                                {"size_loc", node.size_loc},
                                {"internal_ifdefs", node.internal_ifdefs},
                                {"internal_options", node.internal_options}});
    }
    doc["edges"] = ordered_json::array();
    for (const VCGEdge& edge : graph.edges) {
        doc["edges"].push_back({{"from", edge.from},
                                {"to", edge.to},
                                {"pc", render(edge.pc)},
                                {"weight", edge.weight}});
    }
    doc["unresolved"] = ordered_json::array();
    for (const UnresolvedCall& call : graph.unresolved) {
        doc["unresolved"].push_back(
            {{"from", call.from}, {"callee", call.callee}, {"line", call.line}});
    }
    return doc.dump(2) + "\n";
}

namespace {

std::string dot_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string export_graph_dot(const VariationalCallGraph& graph) {
    std::string out = "digraph variational_call_graph {\n";
    for (const VCGNode& node : graph.nodes) {
        out += "  \"" + dot_escape(node.id) + "\" [label=\"" + dot_escape(node.name) +
               "\\n" + dot_escape(render(node.pc)) + "\"];\n";
    }
    for (const VCGEdge& edge : graph.edges) {
        out += "  \"" + dot_escape(edge.from) + "\" -> \"" + dot_escape(edge.to) +
               "\" [label=\"" + dot_escape(render(edge.pc)) +
               "\", weight=" + std::to_string(edge.weight) + "];\n";
    }
    out += "}\n";
    return out;
}

namespace {

const ordered_json& require_field(const ordered_json& obj, const char* key,
                                  const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ValidationError("graph JSON: missing field '" + std::string(key) +
                              "' in " + where);
    return *it;
}

std::string require_string(const ordered_json& obj, const char* key,
                           const std::string& where) {
    const auto& value = require_field(obj, key, where);
    if (!value.is_string())
        throw ValidationError("graph JSON: field '" + std::string(key) + "' in " +
                              where + " must be a string");
    return value.get<std::string>();
}

int require_int(const ordered_json& obj, const char* key, const std::string& where) {
    const auto& value = require_field(obj, key, where);
    if (!value.is_number_integer())
        throw ValidationError("graph JSON: field '" + std::string(key) + "' in " +
                              where + " must be an integer");
    return value.get<int>();
}

PcRef parse_pc_field(const std::string& text, const std::string& where) {
    try {
        return parse_pc(text);
    } catch (const ParseError& e) {
        throw ParseError("graph JSON: bad pc in " + where + ": " + e.what());
    }
}

}  // namespace

VariationalCallGraph import_graph_json(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("graph JSON: ") + e.what(), e.byte);
    }
    if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges") ||
        !doc["nodes"].is_array() || !doc["edges"].is_array())
        throw ValidationError("graph JSON: expected an object with 'nodes' and 'edges' arrays");

    VariationalCallGraph graph;
    std::set<std::string> ids;
    for (const auto& item : doc["nodes"]) {
        if (!item.is_object()) throw ValidationError("graph JSON: node entries must be objects");
        VCGNode node;
        node.id = require_string(item, "id", "node");
        const std::string where = "node '" + node.id + "'";
        node.name = require_string(item, "name", where);
        node.file = require_string(item, "file", where);
        node.pc = parse_pc_field(require_string(item, "pc", where), where);
        node.size_loc = require_int(item, "size_loc", where);
        node.internal_ifdefs = require_int(item, "internal_ifdefs", where);
        node.internal_options = require_int(item, "internal_options", where);
        if (node.size_loc < 0 || node.internal_ifdefs < 0 || node.internal_options < 0)
            throw ValidationError("graph JSON: negative count in " + where);
        if (!ids.insert(node.id).second)
            throw ValidationError("graph JSON: duplicate node id '" + node.id + "'");
        graph.nodes.push_back(std::move(node));
    }
    for (const auto& item : doc["edges"]) {
        if (!item.is_object()) throw ValidationError("graph JSON: edge entries must be objects");
        VCGEdge edge;
        edge.from = require_string(item, "from", "edge");
        edge.to = require_string(item, "to", "edge");
        const std::string where = "edge '" + edge.from + "' -> '" + edge.to + "'";
        edge.pc = parse_pc_field(require_string(item, "pc", where), where);
        edge.weight = require_int(item, "weight", where);
        if (!ids.count(edge.from))
            throw ValidationError("graph JSON: " + where + " names unknown node '" +
                                  edge.from + "'");
        if (!ids.count(edge.to))
            throw ValidationError("graph JSON: " + where + " names unknown node '" +
                                  edge.to + "'");
        int expected = 1 + static_cast<int>(option_count(edge.pc));
        if (edge.weight != expected)
            throw ValidationError("graph JSON: " + where + " stores weight " +
                                  std::to_string(edge.weight) + " but its pc implies " +
                                  std::to_string(expected));
        graph.edges.push_back(std::move(edge));
    }
    if (doc.contains("unresolved")) {
        if (!doc["unresolved"].is_array())
            throw ValidationError("graph JSON: 'unresolved' must be an array");
        for (const auto& item : doc["unresolved"]) {
            UnresolvedCall call;
            call.from = require_string(item, "from", "unresolved call");
            call.callee = require_string(item, "callee", "unresolved call");
            call.line = require_int(item, "line", "unresolved call");
            graph.unresolved.push_back(std::move(call));
        }
    }

    std::sort(graph.nodes.begin(), graph.nodes.end(),
              [](const VCGNode& a, const VCGNode& b) { return a.id < b.id; });
    std::sort(graph.edges.begin(), graph.edges.end(),
              [](const VCGEdge& a, const VCGEdge& b) {
                  return std::tie(a.from, a.to) < std::tie(b.from, b.to);
              });
    std::sort(graph.unresolved.begin(), graph.unresolved.end(),
              [](const UnresolvedCall& a, const UnresolvedCall& b) {
                  return std::tie(a.from, a.callee, a.line) <
                         std::tie(b.from, b.callee, b.line);
              });
    return graph;
}

}  // namespace varcg
