#include "nodelab/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "nodelab/errors.hpp"

namespace nodelab {

Graph::Graph(int n) : offsets_(static_cast<std::size_t>(std::max(n, 0)) + 1, 0) {
    if (n < 0) throw ParameterError("graph node count must be non-negative");
}

Graph Graph::from_edges(int n, std::span<const Edge> edges) {
    if (n < 0) throw ParameterError("graph node count must be non-negative");
    std::vector<std::vector<NodeId>> rows(static_cast<std::size_t>(n));
    for (const Edge& e : edges) {
        if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
            throw ParameterError("edge {" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                 "} has an endpoint outside [0," + std::to_string(n) + ")");
        if (e.u == e.v) throw ParameterError("self-loop at node " + std::to_string(e.u));
        rows[e.u].push_back(e.v);
        rows[e.v].push_back(e.u);
    }
    Graph g(n);
    for (int v = 0; v < n; ++v) {
        auto& row = rows[v];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        g.offsets_[v + 1] = g.offsets_[v] + row.size();
    }
    g.targets_.reserve(g.offsets_.back());
    for (auto& row : rows) g.targets_.insert(g.targets_.end(), row.begin(), row.end());
    return g;
}

int Graph::max_degree() const noexcept {
    int best = 0;
    for (int v = 0; v < node_count(); ++v) best = std::max(best, degree(v));
    return best;
}

double Graph::mean_degree() const noexcept {
    if (node_count() == 0) return 0.0;
    return static_cast<double>(targets_.size()) / node_count();
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    auto row = neighbors(u);
    return std::binary_search(row.begin(), row.end(), v);
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (int u = 0; u < node_count(); ++u)
        for (NodeId v : neighbors(u))
            if (u < v) out.push_back({u, v});
    return out;
}

std::optional<std::string> check_invariants(const Graph& g) {
    const int n = g.node_count();
    std::size_t degree_sum = 0;
    for (int v = 0; v < n; ++v) {
        auto row = g.neighbors(v);
        degree_sum += row.size();
        for (std::size_t i = 0; i < row.size(); ++i) {
            NodeId u = row[i];
            if (u < 0 || u >= n) return "node " + std::to_string(v) + " lists out-of-range neighbor";
            if (u == v) return "self-loop at node " + std::to_string(v);
            if (i > 0 && row[i - 1] >= u)
                return "adjacency of node " + std::to_string(v) + " not strictly sorted";
            if (!g.has_edge(u, v))
                return "edge {" + std::to_string(v) + "," + std::to_string(u) + "} not symmetric";
        }
    }
    if (degree_sum != 2 * g.edge_count()) return "degree sum differs from 2m";
    return std::nullopt;
}

std::vector<int> connected_components(const Graph& g, int* component_count) {
    const int n = g.node_count();
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    int count = 0;
    std::vector<NodeId> stack;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = count;
        stack.push_back(s);
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            for (NodeId u : g.neighbors(v))
                if (comp[u] < 0) {
                    comp[u] = count;
                    stack.push_back(u);
                }
        }
        ++count;
    }
    if (component_count) *component_count = count;
    return comp;
}

bool is_connected(const Graph& g) {
    int count = 0;
    connected_components(g, &count);
    return count <= 1;
}

Graph induced_subgraph(const Graph& g, std::span<const NodeId> keep) {
    std::vector<NodeId> new_id(static_cast<std::size_t>(g.node_count()), -1);
    for (std::size_t i = 0; i < keep.size(); ++i) new_id[keep[i]] = static_cast<NodeId>(i);
    std::vector<Edge> edges;
    for (NodeId v : keep)
        for (NodeId u : g.neighbors(v))
            if (v < u && new_id[u] >= 0) edges.push_back({new_id[v], new_id[u]});
    return Graph::from_edges(static_cast<int>(keep.size()), edges);
}

Graph largest_component(const Graph& g) {
    int count = 0;
    auto comp = connected_components(g, &count);
    if (count <= 1) return g;
    std::vector<int> sizes(static_cast<std::size_t>(count), 0);
    for (int c : comp) ++sizes[c];
    // max_element returns the first maximum, i.e. the component with the smallest id.
    const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    std::vector<NodeId> keep;
    for (int v = 0; v < g.node_count(); ++v)
        if (comp[v] == best) keep.push_back(v);
    return induced_subgraph(g, keep);
}

Graph relabel(const Graph& g, std::span<const NodeId> new_id) {
    const int n = g.node_count();
    if (static_cast<int>(new_id.size()) != n) throw UsageError("relabel: permutation size mismatch");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (NodeId id : new_id) {
        if (id < 0 || id >= n || seen[id]) throw UsageError("relabel: not a permutation");
        seen[id] = 1;
    }
    std::vector<Edge> edges;
    for (const Edge& e : g.edges()) edges.push_back({new_id[e.u], new_id[e.v]});
    return Graph::from_edges(n, edges);
}

GraphUnion disjoint_union(std::span<const Graph> parts) {
    GraphUnion out;
    out.offsets.push_back(0);
    std::vector<Edge> edges;
    for (const Graph& part : parts) {
        const int base = out.offsets.back();
        for (const Edge& e : part.edges()) edges.push_back({e.u + base, e.v + base});
        out.offsets.push_back(base + part.node_count());
    }
    out.graph = Graph::from_edges(out.offsets.back(), edges);
    return out;
}

int degeneracy(const Graph& g) {
    const int n = g.node_count();
    std::vector<int> deg(static_cast<std::size_t>(n));
    std::vector<char> removed(static_cast<std::size_t>(n), 0);
    using Entry = std::pair<int, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (int v = 0; v < n; ++v) {
        deg[v] = g.degree(v);
        heap.push({deg[v], v});
    }
    int best = 0;
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (removed[v] || d != deg[v]) continue;
        removed[v] = 1;
        best = std::max(best, d);
        for (NodeId u : g.neighbors(v))
            if (!removed[u]) heap.push({--deg[u], u});
    }
    return best;
}

}  // namespace nodelab
