#pragma once

#include <vector>

#include "nodelab/graph.hpp"
#include "nodelab/labeling.hpp"

namespace nodelab {

struct HeuristicResult {
    std::vector<Label> labeling;
    Cost cost = Cost::infeasible();
    std::vector<NodeId> order;  // sequence in which nodes were labeled

    bool operator==(const HeuristicResult&) const = default;
};

// Decreasing degree, ties by id; smallest feasible color.
HeuristicResult largest_first(const Graph& g);

// Reverse of the min-degree removal order (ties by id); smallest feasible
// color. Uses at most degeneracy(g) + 1 colors.
HeuristicResult smallest_last(const Graph& g);

// Maximum saturation, ties by original-graph degree then id.
HeuristicResult dsatur(const Graph& g);

// Maximal-matching 2-approximation for vertex cover. Picks uncovered edges in
// lexicographic order, or with `greedy` by decreasing degree(u) + degree(v)
// (static degrees, ties lexicographic), and puts both endpoints in the cover.
HeuristicResult mvc_approx(const Graph& g, bool greedy);

// Colors nodes in the given order with the smallest feasible color.
std::vector<Label> greedy_coloring(const Graph& g, const std::vector<NodeId>& order);

}  // namespace nodelab
