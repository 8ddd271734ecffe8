#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "varcg/errors.hpp"
#include "varcg/graph.hpp"
#include "varcg/metrics.hpp"
#include "varcg/pc.hpp"
#include "varcg/scan.hpp"
#include "varcg/stats.hpp"
#include "varcg/vuln.hpp"

namespace py = pybind11;
using namespace varcg;

namespace {

// PcRef is shared_ptr<const Pc>, which pybind11 cannot use as a holder
// directly; a small value wrapper keeps the immutable sharing semantics.
struct PcHandle {
    PcRef ref;
};

struct GraphHandle {
    VariationalCallGraph graph;
};

/// (path, content, file_pc text) triples as scanned corpus input.
using FileTriple = std::tuple<std::string, std::string, std::string>;

ConfigAssignment make_config(const std::map<std::string, bool>& bindings,
                             bool default_for_unbound) {
    ConfigAssignment cfg;
    cfg.bindings = bindings;
    cfg.default_for_unbound = default_for_unbound;
    return cfg;
}

std::vector<ScannedFile> scan_triples(const std::vector<FileTriple>& files,
                                      const std::set<std::string>& stoplist) {
    ScanOptions options;
    options.extra_stoplist = stoplist;
    std::vector<ScannedFile> corpus;
    for (const auto& [path, content, pc_text] : files) {
        PcRef file_pc = parse_pc(pc_text);
        SourceFile source{path, content, file_pc};
        corpus.push_back({path, file_pc, extract_functions(source, options)});
    }
    return corpus;
}

py::dict record_dict(const FunctionRecord& fn) {
    py::list calls;
    for (const CallSite& call : fn.calls) {
        py::dict jc;
        jc["callee"] = call.callee;
        jc["line"] = call.line;
        jc["pc"] = render(call.local_pc);
        calls.append(jc);
    }
    py::dict out;
    out["name"] = fn.name;
    out["file"] = fn.file;
    out["begin_line"] = fn.begin_line;
    out["end_line"] = fn.end_line;
    out["def_pc"] = render(fn.def_pc);
    out["size_loc"] = fn.size_loc;
    out["internal_ifdefs"] = fn.internal_ifdefs;
    out["internal_options"] = fn.internal_options;
    out["calls"] = calls;
    return out;
}

BetweennessMode mode_of(const std::string& name) {
    if (name == "inverse") return BetweennessMode::Inverse;
    if (name == "direct") return BetweennessMode::Direct;
    throw Error("betweenness mode must be 'inverse' or 'direct', got '" + name + "'");
}

Transform transform_of(const std::string& name) {
    if (name == "identity") return Transform::Identity;
    if (name == "log1p") return Transform::Log1p;
    throw Error("transform must be 'identity' or 'log1p', got '" + name + "'");
}

py::dict summary_dict(const SampleSummary& summary) {
    py::dict out;
    out["n"] = summary.n;
    out["mean"] = summary.mean;
    out["sd"] = summary.sd;
    return out;
}

py::dict ttest_dict(const TTestResult& result) {
    py::dict out;
    out["t"] = result.t;
    out["df"] = result.df;
    out["p"] = result.p_two_sided;
    out["mean_diff"] = result.mean_diff;
    out["ci95_low"] = result.ci95_low;
    out["ci95_high"] = result.ci95_high;
    if (result.ratio_defined)
        out["ratio_of_means"] = result.ratio_of_means;
    else
        out["ratio_of_means"] = py::none();
    return out;
}

py::dict bootstrap_dict(const BootstrapResult& result) {
    py::dict out;
    out["b"] = result.B;
    out["null_t"] = result.null_t;
    out["observed_t"] = result.observed_t;
    out["percentile"] = result.percentile_of_observed;
    out["transform"] = result.transform == Transform::Log1p ? "log1p" : "identity";
    out["seed"] = result.seed;
    return out;
}

}  // namespace

PYBIND11_MODULE(_varcg, m) {
    m.doc() = "variability-aware call-graph analysis (C++ core)";

    py::register_exception<Error>(m, "VarcgError", PyExc_ValueError);

    // --- presence conditions -------------------------------------------------

    py::class_<PcHandle>(m, "Pc")
        .def("__str__", [](const PcHandle& pc) { return render(pc.ref); })
        .def("__repr__", [](const PcHandle& pc) { return "Pc(" + render(pc.ref) + ")"; })
        .def("options", [](const PcHandle& pc) { return options_of(pc.ref); })
        .def("option_count", [](const PcHandle& pc) { return option_count(pc.ref); })
        .def("satisfiable", [](const PcHandle& pc) { return is_satisfiable(pc.ref); })
        .def(
            "evaluate",
            [](const PcHandle& pc, const std::map<std::string, bool>& bindings,
               bool default_for_unbound) {
                return evaluate(pc.ref, make_config(bindings, default_for_unbound));
            },
            py::arg("bindings"), py::arg("default_for_unbound") = false);

    m.def("parse_pc",
          [](const std::string& text) { return PcHandle{parse_pc(text)}; },
          py::arg("text"));
    m.def("pc_atom", [](const std::string& name) { return PcHandle{pc_atom(name)}; });
    m.def("pc_true", [] { return PcHandle{pc_true()}; });
    m.def("pc_false", [] { return PcHandle{pc_false()}; });
    m.def("pc_and", [](const PcHandle& a, const PcHandle& b) {
        return PcHandle{pc_and(a.ref, b.ref)};
    });
    m.def("pc_or", [](const PcHandle& a, const PcHandle& b) {
        return PcHandle{pc_or(a.ref, b.ref)};
    });
    m.def("pc_not", [](const PcHandle& a) { return PcHandle{pc_not(a.ref)}; });

    // --- scanning -------------------------------------------------------------

    m.def(
        "scan_source",
        [](const std::string& path, const std::string& content,
           const std::string& file_pc, const std::set<std::string>& stoplist) {
            std::vector<ScannedFile> corpus =
                scan_triples({{path, content, file_pc}}, stoplist);
            py::list out;
            for (const FunctionRecord& fn : corpus[0].functions)
                out.append(record_dict(fn));
            return out;
        },
        py::arg("path"), py::arg("content"), py::arg("file_pc") = "1",
        py::arg("stoplist") = std::set<std::string>{},
        "Extract function records (spans, presence conditions, variability "
        "counts, call sites) from one translation unit.");

    // --- variational call graphs ----------------------------------------------

    py::class_<GraphHandle>(m, "Graph")
        .def_property_readonly(
            "node_count",
            [](const GraphHandle& g) { return g.graph.nodes.size(); })
        .def_property_readonly(
            "edge_count",
            [](const GraphHandle& g) { return g.graph.edges.size(); })
        .def("nodes",
             [](const GraphHandle& g) {
                 py::list out;
                 for (const VCGNode& node : g.graph.nodes) {
                     py::dict jn;
                     jn["id"] = node.id;
                     jn["name"] = node.name;
                     jn["file"] = node.file;
                     jn["pc"] = render(node.pc);
                     jn["size_loc"] = node.size_loc;
                     jn["internal_ifdefs"] = node.internal_ifdefs;
                     jn["internal_options"] = node.internal_options;
                     out.append(jn);
                 }
                 return out;
             })
        .def("edges",
             [](const GraphHandle& g) {
                 py::list out;
                 for (const VCGEdge& edge : g.graph.edges) {
                     py::dict je;
                     je["from"] = edge.from;
                     je["to"] = edge.to;
                     je["pc"] = render(edge.pc);
                     je["weight"] = edge.weight;
                     out.append(je);
                 }
                 return out;
             })
        .def("unresolved",
             [](const GraphHandle& g) {
                 py::list out;
                 for (const UnresolvedCall& call : g.graph.unresolved) {
                     py::dict jc;
                     jc["from"] = call.from;
                     jc["callee"] = call.callee;
                     jc["line"] = call.line;
                     out.append(jc);
                 }
                 return out;
             })
        .def("to_json", [](const GraphHandle& g) { return export_graph_json(g.graph); })
        .def("to_dot", [](const GraphHandle& g) { return export_graph_dot(g.graph); })
        .def(
            "project",
            [](const GraphHandle& g, const std::map<std::string, bool>& bindings,
               bool default_for_unbound) {
                ProjectedGraph projected =
                    project(g.graph, make_config(bindings, default_for_unbound));
                return py::make_tuple(projected.nodes, projected.edges);
            },
            py::arg("bindings"), py::arg("default_for_unbound") = false,
            "Plain (nodes, edges) visible under one configuration.");

    m.def(
        "build_graph",
        [](const std::vector<FileTriple>& files,
           const std::set<std::string>& stoplist) {
            return GraphHandle{build_graph(scan_triples(files, stoplist))};
        },
        py::arg("files"), py::arg("stoplist") = std::set<std::string>{},
        "Build the variational call graph from (path, content, file_pc) "
        "triples.");
    m.def("import_graph",
          [](const std::string& text) { return GraphHandle{import_graph_json(text)}; },
          py::arg("text"));

    // --- metrics ---------------------------------------------------------------

    m.def(
        "metric_table",
        [](const GraphHandle& g,
           const std::vector<std::tuple<std::string, std::map<std::string, bool>, bool>>&
               baselines,
           const std::map<std::string, bool>& labels, const std::string& mode) {
            std::vector<std::pair<std::string, ConfigAssignment>> resolved;
            for (const auto& [label, bindings, default_for_unbound] : baselines)
                resolved.emplace_back(label, make_config(bindings, default_for_unbound));
            MetricTable table = metric_table(g.graph, resolved, labels, mode_of(mode));
            py::list rows;
            for (const MetricRow& row : table.rows) {
                py::dict jr;
                jr["id"] = row.id;
                jr["file"] = row.file;
                jr["name"] = row.name;
                jr["size_loc"] = row.size_loc;
                jr["internal_ifdefs"] = row.internal_ifdefs;
                jr["internal_options"] = row.internal_options;
                jr["external_options"] = row.external_options;
                jr["w_in_deg"] = row.w_in_deg;
                jr["w_out_deg"] = row.w_out_deg;
                jr["w_eigen"] = row.w_eigen;
                jr["w_between"] = row.w_between;
                py::dict jb;
                for (const auto& [label, columns] : row.baselines) {
                    py::dict jc;
                    jc["in_deg"] = columns.in_deg;
                    jc["out_deg"] = columns.out_deg;
                    jc["eigen"] = columns.eigen;
                    jc["between"] = columns.between;
                    jb[py::str(label)] = jc;
                }
                jr["baselines"] = jb;
                if (row.vulnerable.has_value())
                    jr["vulnerable"] = *row.vulnerable;
                else
                    jr["vulnerable"] = py::none();
                rows.append(jr);
            }
            py::dict out;
            out["rows"] = rows;
            out["warnings"] = table.warnings;
            return out;
        },
        py::arg("graph"),
        py::arg("baselines") =
            std::vector<std::tuple<std::string, std::map<std::string, bool>, bool>>{},
        py::arg("labels") = std::map<std::string, bool>{},
        py::arg("mode") = "inverse",
        "Per-function complexity metrics with optional baseline projections "
        "(label, bindings, default_for_unbound) and vulnerability labels.");

    // --- vulnerability labeling -------------------------------------------------

    m.def("find_cve_ids", &find_cve_ids, py::arg("text"));
    m.def(
        "label_corpus",
        [](const std::vector<FileTriple>& files, const std::string& cve_manifest_json,
           const std::set<std::string>& stoplist) {
            LabelResult result = label_functions(scan_triples(files, stoplist),
                                                 parse_cve_manifest(cve_manifest_json));
            py::list labels;
            for (const VulnerabilityLabel& label : result.labels) {
                py::list evidence;
                for (const Evidence& item : label.evidence)
                    evidence.append(py::make_tuple(item.cve_id, item.commit_id));
                py::dict jl;
                jl["id"] = label.id;
                jl["vulnerable"] = label.vulnerable;
                jl["evidence"] = evidence;
                labels.append(jl);
            }
            py::dict out;
            out["labels"] = labels;
            out["warnings"] = result.warnings;
            return out;
        },
        py::arg("files"), py::arg("cve_manifest_json"),
        py::arg("stoplist") = std::set<std::string>{},
        "Label every corpus function from a CVE manifest of fix diffs.");

    // --- statistics ---------------------------------------------------------------

    m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("index"));
    m.def("t_cdf", &t_cdf, py::arg("t"), py::arg("df"));
    m.def("chisq_cdf", &chisq_cdf, py::arg("x"), py::arg("k"));
    m.def("t_quantile", &t_quantile, py::arg("p"), py::arg("df"));

    m.def(
        "welch_t_test",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            return ttest_dict(welch_t_test(x, y));
        },
        py::arg("x"), py::arg("y"));

    m.def(
        "bootstrap_null",
        [](const std::vector<double>& pool, const std::vector<double>& observed, int b,
           const std::string& transform, std::uint64_t seed) {
            return bootstrap_dict(
                bootstrap_null(pool, observed, b, transform_of(transform), seed));
        },
        py::arg("pool"), py::arg("observed"), py::arg("b") = 1000,
        py::arg("transform") = "identity", py::arg("seed") = 0);

    m.def(
        "logistic_fit",
        [](const std::vector<std::vector<double>>& design, const std::vector<bool>& y) {
            LogisticModel model = logistic_fit(design, y);
            py::dict out;
            out["coefficients"] = model.coefficients;
            out["deviance"] = model.deviance;
            out["iterations"] = model.iterations;
            out["converged"] = model.converged;
            out["diverging"] = model.diverging;
            return out;
        },
        py::arg("design"), py::arg("y"),
        "IRLS logistic fit; design rows start with the intercept 1.");

    m.def(
        "confound_analysis",
        [](const std::vector<double>& metric, const std::vector<double>& control,
           const std::vector<bool>& y) {
            ConfoundReport report = confound_analysis(metric, control, y);
            py::dict out;
            out["beta_uni"] = report.beta_uni;
            out["beta_adj"] = report.beta_adj;
            out["sd_metric"] = report.sd_metric;
            out["or_per_sd_uni"] = report.or_per_sd_uni;
            out["or_per_sd_adj"] = report.or_per_sd_adj;
            out["pct_change"] = report.pct_change;
            out["deviance_chi2"] = report.deviance_chi2;
            out["chi2_df"] = report.chi2_df;
            out["p_deviance"] = report.p_deviance;
            out["rank_deficient"] = report.rank_deficient;
            return out;
        },
        py::arg("metric"), py::arg("control"), py::arg("y"));

    m.def("percent_change", &percent_change, py::arg("or_uni"), py::arg("or_adj"));

    m.def(
        "group_compare",
        [](const std::vector<double>& values, const std::vector<bool>& vulnerable,
           bool with_bootstrap, int bootstrap_b, std::uint64_t seed,
           const std::string& transform) {
            GroupCompareOptions options;
            options.with_bootstrap = with_bootstrap;
            options.bootstrap_b = bootstrap_b;
            options.seed = seed;
            options.transform = transform_of(transform);
            GroupComparison cmp = group_compare(values, vulnerable, options);
            py::dict out;
            out["vulnerable"] = summary_dict(cmp.vulnerable);
            out["non_vulnerable"] = summary_dict(cmp.non_vulnerable);
            out["test"] = ttest_dict(cmp.test);
            if (cmp.bootstrap.has_value())
                out["bootstrap"] = bootstrap_dict(*cmp.bootstrap);
            else
                out["bootstrap"] = py::none();
            return out;
        },
        py::arg("values"), py::arg("vulnerable"), py::arg("with_bootstrap") = false,
        py::arg("bootstrap_b") = 1000, py::arg("seed") = 0,
        py::arg("transform") = "identity",
        "Welch comparison of the vulnerable vs non-vulnerable group, with an "
        "optional bootstrap null distribution.");
}
