#include "varcg/pipeline.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "varcg/errors.hpp"
#include "varcg/stats.hpp"
#include "varcg/vuln.hpp"

namespace varcg {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string artifact_path(const PipelineConfig& config, const char* name) {
    return (fs::path(config.out_dir) / name).string();
}

// --- JSON schema helpers ---------------------------------------------------

const ojson& require_member(const ojson& obj, const std::string& key,
                            const std::string& where) {
    if (!obj.is_object())
        throw ParseError(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        throw ParseError(where + ": missing \"" + key + "\"");
    return *it;
}

std::string require_text(const ojson& obj, const std::string& key,
                         const std::string& where) {
    const ojson& value = require_member(obj, key, where);
    if (!value.is_string())
        throw ParseError(where + "." + key + ": expected a string");
    return value.get<std::string>();
}

int require_int(const ojson& obj, const std::string& key, const std::string& where,
                int min_value) {
    const ojson& value = require_member(obj, key, where);
    if (!value.is_number_integer())
        throw ParseError(where + "." + key + ": expected an integer");
    auto wide = value.get<std::int64_t>();
    if (wide < min_value || wide > std::numeric_limits<int>::max())
        throw ParseError(where + "." + key + ": value " + std::to_string(wide) +
                         " out of range (minimum " + std::to_string(min_value) + ")");
    return static_cast<int>(wide);
}

const ojson& require_list(const ojson& obj, const std::string& key,
                          const std::string& where) {
    const ojson& value = require_member(obj, key, where);
    if (!value.is_array())
        throw ParseError(where + "." + key + ": expected an array");
    return value;
}

PcRef parse_pc_field(const std::string& text, const std::string& where) {
    try {
        return parse_pc(text);
    } catch (const ParseError& e) {
        throw ParseError(where + ": " + e.what());
    }
}

ojson parse_json(const std::string& text, const std::string& what) {
    try {
        return ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(what + ": malformed JSON: " + e.what());
    }
}

// --- misc text helpers -----------------------------------------------------

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, const std::string& where) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ParseError(where + ": expected a number, got '" + field + "'");
    return value;
}

std::string transform_name(Transform transform) {
    return transform == Transform::Log1p ? "log1p" : "identity";
}

/// NaN-safe JSON number: nlohmann serializes NaN as null already, but being
/// explicit keeps the artifact contract visible.
ojson json_number(double value) {
    if (std::isnan(value)) return nullptr;
    return value;
}

}  // namespace

// ---------------------------------------------------------------------------
// File helpers

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw Error("cannot read file: " + path);
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("cannot write file: " + path);
}

// ---------------------------------------------------------------------------
// Corpus manifest

std::vector<ScannedFile> load_corpus(const std::string& manifest_path) {
    const ojson doc = parse_json(read_text_file(manifest_path), "corpus manifest");

    const ojson* file_list = nullptr;
    std::string list_prefix;
    ScanOptions options;
    if (doc.is_array()) {
        file_list = &doc;
        list_prefix = "$";
    } else if (doc.is_object()) {
        file_list = &require_list(doc, "files", "corpus manifest: $");
        list_prefix = "$.files";
        if (doc.contains("stoplist")) {
            const ojson& stop = doc.at("stoplist");
            if (!stop.is_array())
                throw ParseError("corpus manifest: $.stoplist: expected an array");
            for (std::size_t i = 0; i < stop.size(); ++i) {
                if (!stop[i].is_string())
                    throw ParseError("corpus manifest: $.stoplist[" + std::to_string(i) +
                                     "]: expected a string");
                options.extra_stoplist.insert(stop[i].get<std::string>());
            }
        }
    } else {
        throw ParseError("corpus manifest: expected an object or an array");
    }

    const fs::path base = fs::path(manifest_path).parent_path();
    std::vector<ScannedFile> corpus;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < file_list->size(); ++i) {
        const std::string where =
            "corpus manifest: " + list_prefix + "[" + std::to_string(i) + "]";
        const ojson& entry = (*file_list)[i];
        if (!entry.is_object()) throw ParseError(where + ": expected an object");
        const std::string path = require_text(entry, "path", where);
        if (path.empty()) throw ParseError(where + ".path: must not be empty");
        if (!seen.insert(path).second)
            throw ParseError(where + ".path: duplicate corpus path '" + path + "'");
        std::string pc_text = "1";
        if (entry.contains("file_pc")) {
            if (!entry.at("file_pc").is_string())
                throw ParseError(where + ".file_pc: expected a string");
            pc_text = entry.at("file_pc").get<std::string>();
        }
        PcRef file_pc = parse_pc_field(pc_text, where + ".file_pc");
        const std::string content = read_text_file((base / path).string());
        SourceFile source{path, content, file_pc};
        corpus.push_back({path, file_pc, extract_functions(source, options)});
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// Assignment files

ConfigAssignment parse_assignment(const std::string& text, const std::string& origin) {
    ConfigAssignment config;
    std::istringstream lines(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(lines, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (std::size_t hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(where + ": expected OPTION=y|n");
        const std::string name = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!is_option_name(name))
            throw ParseError(where + ": invalid option name '" + name + "'");
        bool on;
        if (value == "y") on = true;
        else if (value == "n") on = false;
        else throw ParseError(where + ": value for " + name + " must be y or n, got '" +
                              value + "'");
        if (!config.bindings.emplace(name, on).second)
            throw ParseError(where + ": duplicate option '" + name + "'");
    }
    return config;
}

// ---------------------------------------------------------------------------
// functions.json / functions.csv

std::string serialize_functions(const std::vector<ScannedFile>& corpus) {
    ojson doc;
    doc["files"] = ojson::array();
    for (const ScannedFile& file : corpus) {
        ojson jf;
        jf["path"] = file.path;
        jf["file_pc"] = render(file.file_pc);
        jf["functions"] = ojson::array();
        for (const FunctionRecord& fn : file.functions) {
            ojson jr;
            jr["name"] = fn.name;
            jr["begin_line"] = fn.begin_line;
            jr["end_line"] = fn.end_line;
            jr["def_pc"] = render(fn.def_pc);
            jr["size_loc"] = fn.size_loc;
            jr["internal_ifdefs"] = fn.internal_ifdefs;
            jr["internal_options"] =
                std::vector<std::string>(fn.internal_options.begin(),
                                         fn.internal_options.end());
            jr["calls"] = ojson::array();
            for (const CallSite& call : fn.calls) {
                ojson jc;
                jc["callee"] = call.callee;
                jc["line"] = call.line;
                jc["pc"] = render(call.local_pc);
                jr["calls"].push_back(std::move(jc));
            }
            jf["functions"].push_back(std::move(jr));
        }
        doc["files"].push_back(std::move(jf));
    }
    return doc.dump(2) + "\n";
}

std::vector<ScannedFile> parse_functions(const std::string& text) {
    const ojson doc = parse_json(text, "functions artifact");
    const ojson& files = require_list(doc, "files", "functions artifact: $");
    std::vector<ScannedFile> corpus;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string fwhere = "functions artifact: $.files[" + std::to_string(i) + "]";
        const ojson& jf = files[i];
        ScannedFile file;
        file.path = require_text(jf, "path", fwhere);
        file.file_pc = parse_pc_field(require_text(jf, "file_pc", fwhere),
                                      fwhere + ".file_pc");
        const ojson& fns = require_list(jf, "functions", fwhere);
        for (std::size_t j = 0; j < fns.size(); ++j) {
            const std::string where = fwhere + ".functions[" + std::to_string(j) + "]";
            const ojson& jr = fns[j];
            FunctionRecord fn;
            fn.name = require_text(jr, "name", where);
            fn.file = file.path;
            fn.begin_line = require_int(jr, "begin_line", where, 1);
            fn.end_line = require_int(jr, "end_line", where, 1);
            if (fn.end_line < fn.begin_line)
                throw ParseError(where + ".end_line: span ends before it begins");
            fn.def_pc = parse_pc_field(require_text(jr, "def_pc", where),
                                       where + ".def_pc");
            fn.size_loc = require_int(jr, "size_loc", where, 0);
            fn.internal_ifdefs = require_int(jr, "internal_ifdefs", where, 0);
            const ojson& opts = require_list(jr, "internal_options", where);
            for (std::size_t k = 0; k < opts.size(); ++k) {
                if (!opts[k].is_string())
                    throw ParseError(where + ".internal_options[" + std::to_string(k) +
                                     "]: expected a string");
                fn.internal_options.insert(opts[k].get<std::string>());
            }
            const ojson& calls = require_list(jr, "calls", where);
            for (std::size_t k = 0; k < calls.size(); ++k) {
                const std::string cwhere = where + ".calls[" + std::to_string(k) + "]";
                const ojson& jc = calls[k];
                CallSite call;
                call.callee = require_text(jc, "callee", cwhere);
                call.line = require_int(jc, "line", cwhere, 1);
                call.local_pc =
                    parse_pc_field(require_text(jc, "pc", cwhere), cwhere + ".pc");
                fn.calls.push_back(std::move(call));
            }
            file.functions.push_back(std::move(fn));
        }
        corpus.push_back(std::move(file));
    }
    return corpus;
}

std::string functions_csv(const std::vector<ScannedFile>& corpus) {
    std::string out =
        "id,file,name,begin_line,end_line,size_loc,internal_ifdefs,"
        "internal_options,calls,def_pc\n";
    for (const ScannedFile& file : corpus) {
        for (const FunctionRecord& fn : file.functions) {
            std::string opts;
            for (const std::string& o : fn.internal_options) {
                if (!opts.empty()) opts += ';';
                opts += o;
            }
            out += csv_field(file.path + "::" + fn.name) + ',' + csv_field(file.path) +
                   ',' + csv_field(fn.name) + ',' + std::to_string(fn.begin_line) + ',' +
                   std::to_string(fn.end_line) + ',' + std::to_string(fn.size_loc) +
                   ',' + std::to_string(fn.internal_ifdefs) + ',' + csv_field(opts) +
                   ',' + std::to_string(fn.calls.size()) + ',' +
                   csv_field(render(fn.def_pc)) + '\n';
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV reading

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;  // quoting is only recognized at field start
    const std::size_t n = text.size();
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };
    for (std::size_t i = 0; i < n;) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                field += c;
                ++i;
            }
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
            ++i;
        } else if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\n') {
            end_row();
            ++i;
        } else if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
            end_row();
            i += 2;
        } else {
            field += c;
            field_started = true;
            ++i;
        }
    }
    if (in_quotes) throw ParseError("csv: unterminated quoted field");
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::map<std::string, bool> parse_label_csv(const std::string& text) {
    const auto rows = parse_csv(text);
    if (rows.empty() ||
        rows.front() != std::vector<std::string>{"id", "vulnerable", "evidence_count",
                                                 "cve_ids"})
        throw ParseError("labels artifact: unexpected header");
    std::map<std::string, bool> labels;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() == 1 && row[0].empty()) continue;
        const std::string where = "labels artifact: row " + std::to_string(i + 1);
        if (row.size() != 4)
            throw ParseError(where + ": expected 4 fields, got " +
                             std::to_string(row.size()));
        bool vulnerable;
        if (row[1] == "1") vulnerable = true;
        else if (row[1] == "0") vulnerable = false;
        else throw ParseError(where + ": vulnerable must be 1 or 0, got '" + row[1] + "'");
        if (!labels.emplace(row[0], vulnerable).second)
            throw ParseError(where + ": duplicate id '" + row[0] + "'");
    }
    return labels;
}

// ---------------------------------------------------------------------------
// scan / graph

std::string cmd_scan(const PipelineConfig& config) {
    if (config.manifest_path.empty())
        throw Error("scan: a corpus manifest is required");
    const std::vector<ScannedFile> corpus = load_corpus(config.manifest_path);
    write_text_file(artifact_path(config, "functions.json"), serialize_functions(corpus));
    write_text_file(artifact_path(config, "functions.csv"), functions_csv(corpus));
    std::size_t total = 0;
    for (const ScannedFile& file : corpus) total += file.functions.size();
    std::ostringstream summary;
    summary << "scan: " << corpus.size() << " files, " << total << " function records";
    return summary.str();
}

std::string cmd_graph(const PipelineConfig& config) {
    const std::vector<ScannedFile> corpus =
        parse_functions(read_text_file(artifact_path(config, "functions.json")));
    const VariationalCallGraph graph = build_graph(corpus);
    write_text_file(artifact_path(config, "graph.json"), export_graph_json(graph));
    if (config.write_dot)
        write_text_file(artifact_path(config, "graph.dot"), export_graph_dot(graph));
    std::ostringstream summary;
    summary << "graph: " << graph.nodes.size() << " nodes, " << graph.edges.size()
            << " edges, " << graph.unresolved.size() << " unresolved calls";
    return summary.str();
}

// ---------------------------------------------------------------------------
// metrics

namespace {

std::vector<std::pair<std::string, ConfigAssignment>> resolve_baselines(
    const PipelineConfig& config, const VariationalCallGraph& graph,
    std::vector<std::string>& warnings) {
    std::set<std::string> graph_options;
    for (const VCGNode& node : graph.nodes) {
        auto opts = options_of(node.pc);
        graph_options.insert(opts.begin(), opts.end());
    }
    for (const VCGEdge& edge : graph.edges) {
        auto opts = options_of(edge.pc);
        graph_options.insert(opts.begin(), opts.end());
    }

    std::vector<std::pair<std::string, ConfigAssignment>> baselines;
    std::set<std::string> labels_seen;
    for (const auto& [label, value] : config.baselines) {
        if (!is_option_name(label))
            throw Error("metrics: baseline label '" + label +
                        "' must be an identifier ([A-Za-z_][A-Za-z0-9_]*)");
        if (!labels_seen.insert(label).second)
            throw Error("metrics: duplicate baseline label '" + label + "'");
        ConfigAssignment assignment;
        if (value == "allyes") {
            assignment.default_for_unbound = true;
        } else {
            assignment = parse_assignment(read_text_file(value), value);
            for (const auto& [option, _] : assignment.bindings) {
                if (!graph_options.count(option))
                    warnings.push_back("baseline '" + label + "': option '" + option +
                                       "' does not appear in the graph");
            }
        }
        baselines.emplace_back(label, std::move(assignment));
    }
    return baselines;
}

}  // namespace

std::string cmd_metrics(const PipelineConfig& config) {
    const VariationalCallGraph graph =
        import_graph_json(read_text_file(artifact_path(config, "graph.json")));

    std::vector<std::string> warnings;
    const auto baselines = resolve_baselines(config, graph, warnings);

    std::map<std::string, bool> labels;
    const std::string labels_path = artifact_path(config, "labels.csv");
    if (fs::exists(labels_path)) labels = parse_label_csv(read_text_file(labels_path));

    const MetricTable table = metric_table(graph, baselines, labels, config.betweenness_mode);
    write_text_file(artifact_path(config, "metrics.csv"), metric_csv(table));

    std::ostringstream summary;
    summary << "metrics: " << table.rows.size() << " functions, " << baselines.size()
            << " baselines";
    for (const std::string& w : warnings) summary << "\nwarning: " << w;
    for (const std::string& w : table.warnings) summary << "\nwarning: " << w;
    return summary.str();
}

// ---------------------------------------------------------------------------
// labels

std::string cmd_labels(const PipelineConfig& config) {
    const std::vector<ScannedFile> corpus =
        parse_functions(read_text_file(artifact_path(config, "functions.json")));

    std::vector<CveRecord> cves;
    if (!config.cve_manifest_path.empty())
        cves = parse_cve_manifest(read_text_file(config.cve_manifest_path));

    LabelResult result = label_functions(corpus, cves);

    if (!config.commit_log_path.empty()) {
        const std::vector<CommitRecord> log_commits =
            scan_commit_log(read_text_file(config.commit_log_path));
        std::set<std::string> manifest_commits;
        for (const CveRecord& cve : cves)
            for (const CommitRecord& commit : cve.commits)
                manifest_commits.insert(commit.commit_id);
        for (const CommitRecord& commit : log_commits) {
            if (manifest_commits.count(commit.commit_id)) continue;
            std::string ids;
            for (const std::string& id : commit.cve_ids) {
                if (!ids.empty()) ids += ", ";
                ids += id;
            }
            result.warnings.push_back("commit log: commit " + commit.commit_id +
                                      " mentions " + ids +
                                      " but the CVE manifest has no diffs for it");
        }
    }

    write_text_file(artifact_path(config, "labels.csv"), label_csv(result));
    std::string warning_text;
    for (const std::string& w : result.warnings) warning_text += w + '\n';
    write_text_file(artifact_path(config, "labels_warnings.txt"), warning_text);

    std::size_t vulnerable = 0;
    for (const VulnerabilityLabel& label : result.labels)
        if (label.vulnerable) ++vulnerable;
    std::ostringstream summary;
    summary << "labels: " << vulnerable << " vulnerable of " << result.labels.size()
            << " functions";
    for (const std::string& w : result.warnings) summary << "\nwarning: " << w;
    return summary.str();
}

// ---------------------------------------------------------------------------
// stats / report shared: join metrics.csv with labels.csv

namespace {

constexpr std::array<const char*, 8> kMetricNames = {
    "size_loc",  "internal_ifdefs", "internal_options", "external_options",
    "w_in_deg",  "w_out_deg",       "w_eigen",          "w_between"};

struct JoinedTable {
    std::vector<std::string> ids;  // joined rows, metrics.csv order
    std::vector<bool> flags;       // vulnerable per joined row
    std::array<std::vector<double>, kMetricNames.size()> values;
    std::string baseline_label;  // first baseline block in the header, "" if none
    // in/out/eigen/between of that baseline (empty when no baseline present)
    std::array<std::vector<double>, 4> baseline_values;
    std::vector<std::string> warnings;
};

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw ParseError("metrics artifact: missing column '" + name + "'");
}

JoinedTable load_joined(const PipelineConfig& config) {
    const auto rows = parse_csv(read_text_file(artifact_path(config, "metrics.csv")));
    if (rows.empty()) throw ParseError("metrics artifact: empty file");
    const std::vector<std::string>& header = rows.front();

    const std::size_t id_col = find_column(header, "id");
    std::array<std::size_t, kMetricNames.size()> metric_cols{};
    for (std::size_t m = 0; m < kMetricNames.size(); ++m)
        metric_cols[m] = find_column(header, kMetricNames[m]);

    JoinedTable table;
    std::array<std::size_t, 4> baseline_cols{};
    bool have_baseline = false;
    for (const std::string& column : header) {
        constexpr const char* kSuffix = "_in_deg";
        if (column.size() > 7 && column != "w_in_deg" &&
            column.compare(column.size() - 7, 7, kSuffix) == 0) {
            table.baseline_label = column.substr(0, column.size() - 7);
            baseline_cols = {find_column(header, table.baseline_label + "_in_deg"),
                             find_column(header, table.baseline_label + "_out_deg"),
                             find_column(header, table.baseline_label + "_eigen"),
                             find_column(header, table.baseline_label + "_between")};
            have_baseline = true;
            break;
        }
    }

    const std::map<std::string, bool> labels =
        parse_label_csv(read_text_file(artifact_path(config, "labels.csv")));

    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() == 1 && row[0].empty()) continue;
        const std::string where = "metrics artifact: row " + std::to_string(i + 1);
        if (row.size() != header.size())
            throw ParseError(where + ": expected " + std::to_string(header.size()) +
                             " fields, got " + std::to_string(row.size()));
        const std::string& id = row[id_col];
        auto label_it = labels.find(id);
        if (label_it == labels.end()) {
            table.warnings.push_back("no label for function '" + id + "'; row excluded");
            continue;
        }
        table.ids.push_back(id);
        table.flags.push_back(label_it->second);
        for (std::size_t m = 0; m < kMetricNames.size(); ++m)
            table.values[m].push_back(parse_number(
                row[metric_cols[m]], where + " column " + kMetricNames[m]));
        if (have_baseline)
            for (std::size_t b = 0; b < 4; ++b)
                table.baseline_values[b].push_back(parse_number(
                    row[baseline_cols[b]], where + " column " + header[baseline_cols[b]]));
    }
    return table;
}

/// Control metric for confounding analysis: size controls the option-count
/// metrics; the first baseline's matching centrality controls the weighted
/// centralities (no control when the table carries no baseline).
std::optional<std::pair<std::string, const std::vector<double>*>> control_for(
    const JoinedTable& table, std::size_t metric_index) {
    const std::string name = kMetricNames[metric_index];
    if (name == "internal_ifdefs" || name == "internal_options" ||
        name == "external_options")
        return std::make_pair(std::string("size_loc"), &table.values[0]);
    if (table.baseline_label.empty()) return std::nullopt;
    if (name == "w_in_deg")
        return std::make_pair(table.baseline_label + "_in_deg", &table.baseline_values[0]);
    if (name == "w_out_deg")
        return std::make_pair(table.baseline_label + "_out_deg",
                              &table.baseline_values[1]);
    if (name == "w_eigen")
        return std::make_pair(table.baseline_label + "_eigen", &table.baseline_values[2]);
    if (name == "w_between")
        return std::make_pair(table.baseline_label + "_between",
                              &table.baseline_values[3]);
    return std::nullopt;
}

std::string csv_double(double value) {
    if (std::isnan(value)) return "";
    return format_double(value);
}

}  // namespace

std::string cmd_stats(const PipelineConfig& config) {
    if (config.bootstrap_b < 100)
        throw StatsError("stats: bootstrap iteration count must be at least 100, got " +
                         std::to_string(config.bootstrap_b));
    const JoinedTable table = load_joined(config);
    const std::size_t n = table.flags.size();
    std::size_t n_vulnerable = 0;
    for (bool flag : table.flags) n_vulnerable += flag ? 1 : 0;

    ojson doc;
    doc["seed"] = config.seed;
    doc["bootstrap_b"] = config.bootstrap_b;
    doc["transform"] = transform_name(Transform::Log1p);
    doc["n_functions"] = n;
    doc["n_vulnerable"] = n_vulnerable;
    doc["n_non_vulnerable"] = n - n_vulnerable;
    doc["metrics"] = ojson::array();

    std::string csv =
        "metric,n_vulnerable,n_non_vulnerable,mean_vulnerable,sd_vulnerable,"
        "mean_non_vulnerable,sd_non_vulnerable,ratio_of_means,mean_diff,ci95_low,"
        "ci95_high,t,df,p,boot_b,boot_percentile,boot_seed,confound_control,"
        "or_per_sd_uni,or_per_sd_adj,pct_change,deviance_chi2,p_deviance,"
        "rank_deficient,error\n";

    std::size_t error_count = 0;
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
        const std::vector<double>& values = table.values[m];
        ojson entry;
        entry["metric"] = kMetricNames[m];
        std::vector<std::string> csv_fields(25, "");
        csv_fields[0] = kMetricNames[m];
        std::vector<std::string> errors;

        GroupComparison cmp;
        bool compared = false;
        try {
            cmp = group_compare(values, table.flags, {});
            compared = true;
        } catch (const StatsError& e) {
            entry["error"] = e.what();
            errors.emplace_back(e.what());
        }

        if (compared) {
            entry["vulnerable"] = {{"n", cmp.vulnerable.n},
                                   {"mean", json_number(cmp.vulnerable.mean)},
                                   {"sd", json_number(cmp.vulnerable.sd)}};
            entry["non_vulnerable"] = {{"n", cmp.non_vulnerable.n},
                                       {"mean", json_number(cmp.non_vulnerable.mean)},
                                       {"sd", json_number(cmp.non_vulnerable.sd)}};
            ojson test;
            test["t"] = json_number(cmp.test.t);
            test["df"] = json_number(cmp.test.df);
            test["p"] = json_number(cmp.test.p_two_sided);
            test["mean_diff"] = json_number(cmp.test.mean_diff);
            test["ci95_low"] = json_number(cmp.test.ci95_low);
            test["ci95_high"] = json_number(cmp.test.ci95_high);
            test["ratio_of_means"] =
                cmp.test.ratio_defined ? json_number(cmp.test.ratio_of_means) : nullptr;
            entry["test"] = std::move(test);

            csv_fields[1] = std::to_string(cmp.vulnerable.n);
            csv_fields[2] = std::to_string(cmp.non_vulnerable.n);
            csv_fields[3] = csv_double(cmp.vulnerable.mean);
            csv_fields[4] = csv_double(cmp.vulnerable.sd);
            csv_fields[5] = csv_double(cmp.non_vulnerable.mean);
            csv_fields[6] = csv_double(cmp.non_vulnerable.sd);
            csv_fields[7] = cmp.test.ratio_defined ? csv_double(cmp.test.ratio_of_means)
                                                   : std::string();
            csv_fields[8] = csv_double(cmp.test.mean_diff);
            csv_fields[9] = csv_double(cmp.test.ci95_low);
            csv_fields[10] = csv_double(cmp.test.ci95_high);
            csv_fields[11] = csv_double(cmp.test.t);
            csv_fields[12] = csv_double(cmp.test.df);
            csv_fields[13] = csv_double(cmp.test.p_two_sided);

            // Bootstrap: pool = non-vulnerable, observed = vulnerable, each
            // metric on its own derived sub-seed so metric order is immaterial.
            std::vector<double> pool, observed;
            for (std::size_t i = 0; i < n; ++i)
                (table.flags[i] ? observed : pool).push_back(values[i]);
            try {
                const BootstrapResult boot =
                    bootstrap_null(pool, observed, config.bootstrap_b, Transform::Log1p,
                                   derive_seed(config.seed, m));
                ojson jboot;
                jboot["b"] = boot.B;
                jboot["observed_t"] = json_number(boot.observed_t);
                jboot["percentile"] = json_number(boot.percentile_of_observed);
                jboot["transform"] = transform_name(boot.transform);
                jboot["seed"] = boot.seed;
                entry["bootstrap"] = std::move(jboot);
                csv_fields[14] = std::to_string(boot.B);
                csv_fields[15] = csv_double(boot.percentile_of_observed);
                csv_fields[16] = std::to_string(boot.seed);
            } catch (const StatsError& e) {
                entry["bootstrap_error"] = e.what();
                errors.emplace_back(e.what());
            }

            if (auto control = control_for(table, m)) {
                try {
                    const ConfoundReport rep =
                        confound_analysis(values, *control->second, table.flags);
                    ojson jconf;
                    jconf["control"] = control->first;
                    jconf["beta_uni"] = json_number(rep.beta_uni);
                    jconf["beta_adj"] = json_number(rep.beta_adj);
                    jconf["sd_metric"] = json_number(rep.sd_metric);
                    jconf["or_per_sd_uni"] = json_number(rep.or_per_sd_uni);
                    jconf["or_per_sd_adj"] = json_number(rep.or_per_sd_adj);
                    jconf["pct_change"] = json_number(rep.pct_change);
                    jconf["deviance_chi2"] = json_number(rep.deviance_chi2);
                    jconf["chi2_df"] = rep.chi2_df;
                    jconf["p_deviance"] = json_number(rep.p_deviance);
                    jconf["rank_deficient"] = rep.rank_deficient;
                    entry["confound"] = std::move(jconf);
                    csv_fields[17] = control->first;
                    csv_fields[18] = csv_double(rep.or_per_sd_uni);
                    csv_fields[19] = csv_double(rep.or_per_sd_adj);
                    csv_fields[20] = csv_double(rep.pct_change);
                    csv_fields[21] = csv_double(rep.deviance_chi2);
                    csv_fields[22] = csv_double(rep.p_deviance);
                    csv_fields[23] = rep.rank_deficient ? "1" : "0";
                } catch (const StatsError& e) {
                    entry["confound_error"] = e.what();
                    errors.emplace_back(e.what());
                }
            }
        }

        if (!errors.empty()) ++error_count;
        std::string joined_errors;
        for (const std::string& e : errors) {
            if (!joined_errors.empty()) joined_errors += "; ";
            joined_errors += e;
        }
        csv_fields[24] = joined_errors;

        for (std::size_t f = 0; f < csv_fields.size(); ++f)
            csv += (f ? "," : "") + csv_field(csv_fields[f]);
        csv += '\n';
        doc["metrics"].push_back(std::move(entry));
    }
    doc["warnings"] = table.warnings;

    write_text_file(artifact_path(config, "stats.json"), doc.dump(2) + "\n");
    write_text_file(artifact_path(config, "stats.csv"), csv);

    std::ostringstream summary;
    summary << "stats: " << kMetricNames.size() << " metrics, " << error_count
            << " with errors";
    for (const std::string& w : table.warnings) summary << "\nwarning: " << w;
    return summary.str();
}

// ---------------------------------------------------------------------------
// report

std::string cmd_report(const PipelineConfig& config) {
    const ojson stats = parse_json(read_text_file(artifact_path(config, "stats.json")),
                                   "stats artifact");
    const JoinedTable table = load_joined(config);

    auto num = [](const ojson& node, const char* key) -> std::string {
        if (!node.contains(key) || node.at(key).is_null()) return "undefined";
        return format_double(node.at(key).get<double>());
    };

    std::ostringstream report;
    report << "Configuration-complexity report\n"
           << "===============================\n\n";
    report << "Functions: " << stats.value("n_functions", 0)
           << " (" << stats.value("n_vulnerable", 0) << " vulnerable, "
           << stats.value("n_non_vulnerable", 0) << " non-vulnerable)\n";
    report << "Bootstrap: B=" << stats.value("bootstrap_b", 0)
           << ", transform=" << stats.value("transform", std::string("identity"))
           << ", seed=" << stats.value("seed", std::uint64_t{0}) << "\n";

    if (stats.contains("metrics")) {
        for (const ojson& entry : stats.at("metrics")) {
            const std::string name = entry.value("metric", std::string("?"));
            report << "\n-- " << name << " --\n";
            if (entry.contains("error")) {
                report << "  error: " << entry.at("error").get<std::string>() << "\n";
                continue;
            }
            const ojson& vul = entry.at("vulnerable");
            const ojson& non = entry.at("non_vulnerable");
            const ojson& test = entry.at("test");
            report << "  vulnerable:     n=" << vul.value("n", 0)
                   << " mean=" << num(vul, "mean") << " sd=" << num(vul, "sd") << "\n";
            report << "  non-vulnerable: n=" << non.value("n", 0)
                   << " mean=" << num(non, "mean") << " sd=" << num(non, "sd") << "\n";
            report << "  ratio of means: " << num(test, "ratio_of_means") << "\n";
            report << "  Welch t=" << num(test, "t") << " df=" << num(test, "df")
                   << " p=" << num(test, "p") << "\n";
            report << "  95% CI of difference: [" << num(test, "ci95_low") << ", "
                   << num(test, "ci95_high") << "]\n";
            if (entry.contains("bootstrap")) {
                const ojson& boot = entry.at("bootstrap");
                report << "  bootstrap percentile: " << num(boot, "percentile")
                       << " (B=" << boot.value("b", 0) << ")\n";
            } else if (entry.contains("bootstrap_error")) {
                report << "  bootstrap error: "
                       << entry.at("bootstrap_error").get<std::string>() << "\n";
            }
            if (entry.contains("confound")) {
                const ojson& conf = entry.at("confound");
                report << "  adjusted for " << conf.value("control", std::string("?"))
                       << ": OR/sd " << num(conf, "or_per_sd_uni") << " -> "
                       << num(conf, "or_per_sd_adj") << " (" << num(conf, "pct_change")
                       << "% change), deviance chi2=" << num(conf, "deviance_chi2")
                       << " p=" << num(conf, "p_deviance") << "\n";
                if (conf.value("rank_deficient", false))
                    report << "  note: adjusted model rank deficient; "
                              "adjusted fields undefined\n";
            } else if (entry.contains("confound_error")) {
                report << "  confounding error: "
                       << entry.at("confound_error").get<std::string>() << "\n";
            }
        }
    }

    // Density table: per metric and group, counts over left-closed bins of
    // width 0.1 in log10(1 + x); only occupied bins are emitted.
    std::string density = "metric,group,bin_low,bin_high,count\n";
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
        for (int group = 1; group >= 0; --group) {
            std::map<long long, long long> bins;
            for (std::size_t i = 0; i < table.flags.size(); ++i) {
                if (table.flags[i] != (group == 1)) continue;
                const double z = std::log10(1.0 + table.values[m][i]);
                bins[static_cast<long long>(std::floor(z * 10.0))] += 1;
            }
            const std::string group_name = group ? "vulnerable" : "non_vulnerable";
            for (const auto& [bin, count] : bins) {
                density += std::string(kMetricNames[m]) + ',' + group_name + ',' +
                           format_double(bin * 0.1) + ',' +
                           format_double((bin + 1) * 0.1) + ',' +
                           std::to_string(count) + '\n';
            }
        }
    }

    write_text_file(artifact_path(config, "report.txt"), report.str());
    write_text_file(artifact_path(config, "density.csv"), density);

    std::ostringstream summary;
    summary << "report: " << kMetricNames.size() << " metrics, " << table.flags.size()
            << " functions";
    return summary.str();
}

}  // namespace varcg
