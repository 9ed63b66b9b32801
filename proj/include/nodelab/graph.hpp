#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nodelab {

using NodeId = int;

struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    auto operator<=>(const Edge&) const = default;
};

/// Undirected simple graph in compressed adjacency form.
///
/// Node ids are 0..n-1, every adjacency row is sorted and free of duplicates
/// and self-loops, and u lists v iff v lists u. Values are immutable once
/// built, so a Graph can be shared freely between threads.
class Graph {
public:
    Graph() : offsets_{0} {}

    // n isolated nodes.
    explicit Graph(int n);

    // Duplicate edges (in either orientation) are merged. Self-loops and
    // endpoints outside [0, n) throw ParameterError.
    static Graph from_edges(int n, std::span<const Edge> edges);

    int node_count() const noexcept { return static_cast<int>(offsets_.size()) - 1; }
    std::size_t edge_count() const noexcept { return targets_.size() / 2; }

    std::span<const NodeId> neighbors(NodeId v) const {
        return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
    }
    int degree(NodeId v) const noexcept { return static_cast<int>(offsets_[v + 1] - offsets_[v]); }
    int max_degree() const noexcept;
    double mean_degree() const noexcept;

    bool has_edge(NodeId u, NodeId v) const;

    // All edges with u < v, in lexicographic order.
    std::vector<Edge> edges() const;

    bool operator==(const Graph&) const = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> targets_;
};

// Returns a description of the first violated structural invariant, if any.
std::optional<std::string> check_invariants(const Graph& g);

// component[v] = index of v's connected component; components are numbered
// in order of their smallest node id.
std::vector<int> connected_components(const Graph& g, int* component_count = nullptr);

bool is_connected(const Graph& g);

// Induced subgraph on `keep` (ascending ids), relabelled 0..|keep|-1 in that order.
Graph induced_subgraph(const Graph& g, std::span<const NodeId> keep);

// Largest connected component (ties: the one containing the smaller id),
// relabelled contiguously with relative order preserved.
Graph largest_component(const Graph& g);

// new_id[v] is the id of v in the result; must be a permutation of 0..n-1.
Graph relabel(const Graph& g, std::span<const NodeId> new_id);

struct GraphUnion {
    Graph graph;
    std::vector<int> offsets;  // node offset of each part, plus total at the end
};

// Disjoint union, parts laid out consecutively.
GraphUnion disjoint_union(std::span<const Graph> parts);

// Degeneracy: max over the min-degree removal sequence of the removed degree.
int degeneracy(const Graph& g);

}  // namespace nodelab
