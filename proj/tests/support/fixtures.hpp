#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "nodelab/graph.hpp"
#include "nodelab/rng.hpp"

namespace fixtures {

using nodelab::Edge;
using nodelab::Graph;

inline Graph complete(int n) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.push_back({i, j});
    return Graph::from_edges(n, e);
}

inline Graph cycle(int n) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
    return Graph::from_edges(n, e);
}

inline Graph path(int n) {
    std::vector<Edge> e;
    for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
    return Graph::from_edges(n, e);
}

// Center 0, leaves 1..leaves.
inline Graph star(int leaves) {
    std::vector<Edge> e;
    for (int i = 1; i <= leaves; ++i) e.push_back({0, i});
    return Graph::from_edges(leaves + 1, e);
}

inline Graph petersen() {
    std::vector<Edge> e;
    for (int i = 0; i < 5; ++i) {
        e.push_back({i, (i + 1) % 5});
        e.push_back({i, i + 5});
        e.push_back({5 + i, 5 + (i + 2) % 5});
    }
    return Graph::from_edges(10, e);
}

inline Graph random_graph(int n, double p, std::uint64_t seed) {
    nodelab::Rng rng(seed);
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < p) e.push_back({i, j});
    return Graph::from_edges(n, e);
}

// Random spanning tree plus extra edges; always connected.
inline Graph random_connected(int n, double extra_p, std::uint64_t seed) {
    nodelab::Rng rng(seed);
    std::vector<Edge> e;
    for (int v = 1; v < n; ++v) e.push_back({static_cast<int>(rng.below(v)), v});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < extra_p) e.push_back({i, j});
    return Graph::from_edges(n, e);
}

// Connected bipartite graph: sides alternate along a spanning tree, extra
// cross edges only.
inline Graph random_bipartite_connected(int n, double extra_p, std::uint64_t seed) {
    nodelab::Rng rng(seed);
    std::vector<int> side(n);
    std::vector<Edge> e;
    side[0] = 0;
    for (int v = 1; v < n; ++v) {
        int parent = static_cast<int>(rng.below(v));
        side[v] = 1 - side[parent];
        e.push_back({parent, v});
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (side[i] != side[j] && rng.uniform() < extra_p) e.push_back({i, j});
    return Graph::from_edges(n, e);
}

// Minimum vertex cover size by enumerating all 2^n subsets.
inline int brute_force_mvc(const Graph& g) {
    const int n = g.node_count();
    auto edges = g.edges();
    int best = n;
    for (std::uint32_t s = 0; s < (1u << n); ++s) {
        bool ok = std::all_of(edges.begin(), edges.end(),
                              [&](const Edge& x) { return (s >> x.u & 1) || (s >> x.v & 1); });
        if (ok) best = std::min(best, __builtin_popcount(s));
    }
    return best;
}

// Whether g has a proper coloring with k colors, by plain backtracking in id order.
inline bool brute_force_colorable(const Graph& g, int k) {
    const int n = g.node_count();
    std::vector<int> c(n, -1);
    auto rec = [&](auto&& self, int v) -> bool {
        if (v == n) return true;
        for (int col = 0; col < k; ++col) {
            bool ok = true;
            for (int u : g.neighbors(v))
                if (u < v && c[u] == col) ok = false;
            if (!ok) continue;
            c[v] = col;
            if (self(self, v + 1)) return true;
        }
        c[v] = -1;
        return false;
    };
    return rec(rec, 0);
}

inline int brute_force_chromatic(const Graph& g) {
    int k = g.node_count() == 0 ? 0 : 1;
    while (!brute_force_colorable(g, k)) ++k;
    return k;
}

inline std::vector<int> random_permutation(int n, std::uint64_t seed) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    nodelab::Rng rng(seed);
    rng.shuffle(p);
    return p;
}

}  // namespace fixtures
