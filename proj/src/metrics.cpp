#include "varcg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>

#include "varcg/errors.hpp"

namespace varcg {

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

Adjacency Adjacency::from_graph(const VariationalCallGraph& graph) {
    Adjacency adj;
    adj.ids.reserve(graph.nodes.size());
    for (const VCGNode& node : graph.nodes) adj.ids.push_back(node.id);  // already sorted
    adj.out.resize(adj.ids.size());
    auto index_of = [&](const std::string& id) {
        return static_cast<int>(std::lower_bound(adj.ids.begin(), adj.ids.end(), id) -
                                adj.ids.begin());
    };
    for (const VCGEdge& edge : graph.edges)
        adj.out[index_of(edge.from)].push_back(
            {index_of(edge.to), static_cast<double>(edge.weight)});
    return adj;
}

Adjacency Adjacency::from_projection(const ProjectedGraph& projected) {
    Adjacency adj;
    adj.ids.assign(projected.nodes.begin(), projected.nodes.end());
    adj.out.resize(adj.ids.size());
    auto index_of = [&](const std::string& id) {
        return static_cast<int>(std::lower_bound(adj.ids.begin(), adj.ids.end(), id) -
                                adj.ids.begin());
    };
    for (const auto& [from, to] : projected.edges)
        adj.out[index_of(from)].push_back({index_of(to), 1.0});
    return adj;
}

DegreeResult weighted_degrees(const Adjacency& adj) {
    std::vector<long long> in(adj.ids.size(), 0);
    std::vector<long long> out(adj.ids.size(), 0);
    for (std::size_t u = 0; u < adj.out.size(); ++u) {
        for (const auto& [v, w] : adj.out[u]) {
            long long weight = std::llround(w);
            out[u] += weight;
            in[static_cast<std::size_t>(v)] += weight;
        }
    }
    DegreeResult result;
    for (std::size_t i = 0; i < adj.ids.size(); ++i) {
        result.in[adj.ids[i]] = in[i];
        result.out[adj.ids[i]] = out[i];
    }
    return result;
}

EigenvectorResult eigenvector_centrality(const Adjacency& adj) {
    constexpr double kTol = 1e-12;
    constexpr int kMaxIterations = 10000;
    const std::size_t n = adj.ids.size();

    EigenvectorResult result;
    std::vector<double> x(n, 1.0);
    std::vector<double> y(n, 0.0);
    bool converged = false;
    int iterations = 0;
    while (iterations < kMaxIterations) {
        ++iterations;
        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t u = 0; u < n; ++u)
            for (const auto& [v, w] : adj.out[u]) y[static_cast<std::size_t>(v)] += w * x[u];
        double max = 0.0;
        for (double value : y) max = std::max(max, value);
        if (max == 0.0) {
            // the iteration collapsed: no cycle feeds strength back
            result.degenerate = true;
            std::fill(x.begin(), x.end(), 0.0);
            converged = true;
            break;
        }
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] /= max;
            delta = std::max(delta, std::abs(y[i] - x[i]));
        }
        x.swap(y);
        if (delta < kTol) {
            converged = true;
            break;
        }
    }
    result.converged = converged;
    result.iterations = iterations;
    for (std::size_t i = 0; i < n; ++i) result.scores[adj.ids[i]] = x[i];
    return result;
}

namespace {

// --- Brandes betweenness with pluggable distance arithmetic -----------------

template <typename Dist, typename Eq>
std::vector<double> brandes(const std::vector<std::vector<std::pair<int, Dist>>>& out,
                            std::size_t n, Dist infinity, Eq equal) {
    std::vector<double> centrality(n, 0.0);
    std::vector<Dist> dist(n);
    std::vector<double> sigma(n);
    std::vector<std::vector<int>> preds(n);
    std::vector<int> order;
    order.reserve(n);

    for (std::size_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), infinity);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        for (auto& p : preds) p.clear();
        order.clear();

        using Entry = std::pair<Dist, int>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
        dist[s] = Dist{};
        sigma[s] = 1.0;
        queue.push({Dist{}, static_cast<int>(s)});
        std::vector<char> settled(n, 0);

        while (!queue.empty()) {
            auto [d, u] = queue.top();
            queue.pop();
            if (settled[static_cast<std::size_t>(u)]) continue;
            settled[static_cast<std::size_t>(u)] = 1;
            order.push_back(u);
            for (const auto& [v, w] : out[static_cast<std::size_t>(u)]) {
                if (v == u) continue;  // self-loops play no role in paths
                Dist candidate = dist[static_cast<std::size_t>(u)] + w;
                Dist& dv = dist[static_cast<std::size_t>(v)];
                if (!settled[static_cast<std::size_t>(v)] && candidate < dv &&
                    !equal(candidate, dv)) {
                    dv = candidate;
                    sigma[static_cast<std::size_t>(v)] = sigma[static_cast<std::size_t>(u)];
                    preds[static_cast<std::size_t>(v)].assign(1, u);
                    queue.push({candidate, v});
                } else if (!settled[static_cast<std::size_t>(v)] && equal(candidate, dv)) {
                    sigma[static_cast<std::size_t>(v)] += sigma[static_cast<std::size_t>(u)];
                    preds[static_cast<std::size_t>(v)].push_back(u);
                }
            }
        }

        std::vector<double> delta(n, 0.0);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int w = *it;
            for (int v : preds[static_cast<std::size_t>(w)])
                delta[static_cast<std::size_t>(v)] +=
                    sigma[static_cast<std::size_t>(v)] / sigma[static_cast<std::size_t>(w)] *
                    (1.0 + delta[static_cast<std::size_t>(w)]);
            if (static_cast<std::size_t>(w) != s)
                centrality[static_cast<std::size_t>(w)] += delta[static_cast<std::size_t>(w)];
        }
    }
    return centrality;
}

long long checked_lcm(long long a, long long b, bool& overflow) {
    long long g = std::gcd(a, b);
    long long candidate = a / g;
    if (candidate > 1'000'000'000'000'000LL / b) {
        overflow = true;
        return 1;
    }
    return candidate * b;
}

}  // namespace

std::map<std::string, double> betweenness_centrality(const Adjacency& adj,
                                                     BetweennessMode mode) {
    const std::size_t n = adj.ids.size();

    // Exact integral distances when every weight is a positive integer and
    // the common scale fits comfortably in 64 bits.
    bool integral = true;
    bool overflow = false;
    long long scale = 1;
    for (const auto& edges : adj.out) {
        for (const auto& [v, w] : edges) {
            (void)v;
            if (w < 1.0 || w != std::floor(w)) {
                integral = false;
                break;
            }
            if (mode == BetweennessMode::Inverse)
                scale = checked_lcm(scale, static_cast<long long>(w), overflow);
        }
        if (!integral) break;
    }

    std::vector<double> centrality;
    if (integral && !overflow) {
        std::vector<std::vector<std::pair<int, long long>>> out(n);
        for (std::size_t u = 0; u < n; ++u)
            for (const auto& [v, w] : adj.out[u]) {
                long long weight = static_cast<long long>(w);
                out[u].push_back(
                    {v, mode == BetweennessMode::Inverse ? scale / weight : weight});
            }
        constexpr long long kInf = std::numeric_limits<long long>::max() / 4;
        centrality = brandes<long long>(out, n, kInf,
                                        [](long long a, long long b) { return a == b; });
    } else {
        std::vector<std::vector<std::pair<int, double>>> out(n);
        for (std::size_t u = 0; u < n; ++u)
            for (const auto& [v, w] : adj.out[u])
                out[u].push_back({v, mode == BetweennessMode::Inverse ? 1.0 / w : w});
        centrality = brandes<double>(
            out, n, std::numeric_limits<double>::infinity(), [](double a, double b) {
                return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
            });
    }

    std::map<std::string, double> result;
    for (std::size_t i = 0; i < n; ++i) result[adj.ids[i]] = centrality[i];
    return result;
}

MetricTable metric_table(
    const VariationalCallGraph& graph,
    const std::vector<std::pair<std::string, ConfigAssignment>>& baselines,
    const std::map<std::string, bool>& labels, BetweennessMode mode) {
    MetricTable table;

    Adjacency weighted = Adjacency::from_graph(graph);
    DegreeResult degrees = weighted_degrees(weighted);
    EigenvectorResult eigen = eigenvector_centrality(weighted);
    auto between = betweenness_centrality(weighted, mode);

    table.rows.reserve(graph.nodes.size());
    for (const VCGNode& node : graph.nodes) {
        MetricRow row;
        row.id = node.id;
        row.file = node.file;
        row.name = node.name;
        row.size_loc = node.size_loc;
        row.internal_ifdefs = node.internal_ifdefs;
        row.internal_options = node.internal_options;
        row.external_options = static_cast<int>(option_count(node.pc));
        row.w_in_deg = degrees.in.at(node.id);
        row.w_out_deg = degrees.out.at(node.id);
        row.w_eigen = eigen.scores.at(node.id);
        row.w_between = between.at(node.id);
        auto label = labels.find(node.id);
        if (label != labels.end()) row.vulnerable = label->second;
        table.rows.push_back(std::move(row));
    }

    for (const auto& [label, config] : baselines) {
        ProjectedGraph projected = project(graph, config);
        Adjacency adj = Adjacency::from_projection(projected);
        DegreeResult base_degrees = weighted_degrees(adj);
        EigenvectorResult base_eigen = eigenvector_centrality(adj);
        auto base_between = betweenness_centrality(adj, mode);
        for (MetricRow& row : table.rows) {
            BaselineColumns columns;
            if (projected.nodes.count(row.id)) {
                columns.in_deg = base_degrees.in.at(row.id);
                columns.out_deg = base_degrees.out.at(row.id);
                columns.eigen = base_eigen.scores.at(row.id);
                columns.between = base_between.at(row.id);
            }
            row.baselines.emplace_back(label, columns);
        }
    }

    for (const auto& [id, vulnerable] : labels) {
        (void)vulnerable;
        if (!graph.find_node(id))
            table.warnings.push_back("label for unknown function id '" + id + "'");
    }
    return table;
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string metric_csv(const MetricTable& table) {
    std::string out =
        "id,file,name,size_loc,internal_ifdefs,internal_options,external_options,"
        "w_in_deg,w_out_deg,w_eigen,w_between";
    if (!table.rows.empty()) {
        for (const auto& [label, columns] : table.rows.front().baselines) {
            (void)columns;
            out += "," + label + "_in_deg," + label + "_out_deg," + label + "_eigen," +
                   label + "_between";
        }
    }
    out += ",vulnerable\n";
    for (const MetricRow& row : table.rows) {
        out += csv_field(row.id) + "," + csv_field(row.file) + "," + csv_field(row.name) +
               "," + std::to_string(row.size_loc) + "," +
               std::to_string(row.internal_ifdefs) + "," +
               std::to_string(row.internal_options) + "," +
               std::to_string(row.external_options) + "," +
               std::to_string(row.w_in_deg) + "," + std::to_string(row.w_out_deg) + "," +
               format_double(row.w_eigen) + "," + format_double(row.w_between);
        for (const auto& [label, columns] : row.baselines) {
            (void)label;
            out += "," + std::to_string(columns.in_deg) + "," +
                   std::to_string(columns.out_deg) + "," + format_double(columns.eigen) +
                   "," + format_double(columns.between);
        }
        out += ",";
        if (row.vulnerable) out += *row.vulnerable ? "1" : "0";
        out += "\n";
    }
    return out;
}

}  // namespace varcg
