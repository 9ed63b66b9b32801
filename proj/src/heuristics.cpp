#include "nodelab/heuristics.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

namespace nodelab {

namespace {

HeuristicResult finish(const ProblemDefinition& problem, const Graph& g, std::vector<Label> labels,
                       std::vector<NodeId> order) {
    Verification check = problem.verify(g, labels);
    return {std::move(labels), check.cost, std::move(order)};
}

}  // namespace

std::vector<Label> greedy_coloring(const Graph& g, const std::vector<NodeId>& order) {
    std::vector<Label> color(static_cast<std::size_t>(g.node_count()), kUnlabeled);
    std::vector<int> mark(static_cast<std::size_t>(g.node_count()) + 2, -1);
    for (NodeId v : order) {
        for (NodeId u : g.neighbors(v))
            if (color[u] != kUnlabeled) mark[color[u]] = v;
        Label c = 1;
        while (mark[c] == v) ++c;
        color[v] = c;
    }
    return color;
}

HeuristicResult largest_first(const Graph& g) {
    std::vector<NodeId> order(static_cast<std::size_t>(g.node_count()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
    auto labels = greedy_coloring(g, order);
    return finish(graph_coloring(), g, std::move(labels), std::move(order));
}

HeuristicResult smallest_last(const Graph& g) {
    const int n = g.node_count();
    std::vector<int> deg(static_cast<std::size_t>(n));
    std::set<std::pair<int, NodeId>> queue;
    for (int v = 0; v < n; ++v) {
        deg[v] = g.degree(v);
        queue.insert({deg[v], v});
    }
    std::vector<char> removed(static_cast<std::size_t>(n), 0);
    std::vector<NodeId> removal;
    removal.reserve(static_cast<std::size_t>(n));
    while (!queue.empty()) {
        auto [d, v] = *queue.begin();
        queue.erase(queue.begin());
        removed[v] = 1;
        removal.push_back(v);
        for (NodeId u : g.neighbors(v)) {
            if (removed[u]) continue;
            queue.erase({deg[u], u});
            queue.insert({--deg[u], u});
        }
    }
    std::vector<NodeId> order(removal.rbegin(), removal.rend());
    auto labels = greedy_coloring(g, order);
    return finish(graph_coloring(), g, std::move(labels), std::move(order));
}

HeuristicResult dsatur(const Graph& g) {
    const int n = g.node_count();
    std::vector<Label> color(static_cast<std::size_t>(n), kUnlabeled);
    std::vector<std::vector<Label>> seen(static_cast<std::size_t>(n));  // sorted neighbor colors
    // Key: (-saturation, -degree, id); begin() is the next node.
    using Key = std::tuple<int, int, NodeId>;
    std::set<Key> queue;
    for (int v = 0; v < n; ++v) queue.insert({0, -g.degree(v), v});
    std::vector<NodeId> order;
    order.reserve(static_cast<std::size_t>(n));
    std::vector<int> mark(static_cast<std::size_t>(n) + 2, -1);
    while (!queue.empty()) {
        const NodeId v = std::get<2>(*queue.begin());
        queue.erase(queue.begin());
        for (Label c : seen[v]) mark[c] = v;
        Label c = 1;
        while (mark[c] == v) ++c;
        color[v] = c;
        order.push_back(v);
        for (NodeId u : g.neighbors(v)) {
            if (color[u] != kUnlabeled) continue;
            auto& s = seen[u];
            auto it = std::lower_bound(s.begin(), s.end(), c);
            if (it != s.end() && *it == c) continue;
            queue.erase({-static_cast<int>(s.size()), -g.degree(u), u});
            s.insert(it, c);
            queue.insert({-static_cast<int>(s.size()), -g.degree(u), u});
        }
    }
    return finish(graph_coloring(), g, std::move(color), std::move(order));
}

HeuristicResult mvc_approx(const Graph& g, bool greedy) {
    const int n = g.node_count();
    std::vector<Edge> edges = g.edges();  // lexicographic
    if (greedy) {
        std::stable_sort(edges.begin(), edges.end(), [&](const Edge& a, const Edge& b) {
            return g.degree(a.u) + g.degree(a.v) > g.degree(b.u) + g.degree(b.v);
        });
    }
    std::vector<Label> labels(static_cast<std::size_t>(n), 0);
    std::vector<NodeId> order;
    for (const Edge& e : edges) {
        if (labels[e.u] == 1 || labels[e.v] == 1) continue;
        labels[e.u] = labels[e.v] = 1;
        order.push_back(e.u);
        order.push_back(e.v);
    }
    for (int v = 0; v < n; ++v)
        if (labels[v] == 0) order.push_back(v);
    return finish(min_vertex_cover(), g, std::move(labels), std::move(order));
}

}  // namespace nodelab
