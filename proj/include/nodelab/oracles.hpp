#pragma once

#include <cstdint>
#include <vector>

#include "nodelab/graph.hpp"
#include "nodelab/labeling.hpp"

namespace nodelab {

inline constexpr int kOracleNodeLimit = 64;
inline constexpr long kDefaultNodeBudget = 50'000'000;

struct OracleResult {
    long optimum = 0;
    std::vector<Label> witness;
    long explored = 0;  // search-tree nodes visited
};

/// Chromatic number by DSATUR branch-and-bound: the incumbent starts at the
/// DSATUR heuristic, a greedy clique is pre-colored and serves as lower bound,
/// and branches using at least the incumbent's color count are cut.
/// Throws ParameterError above kOracleNodeLimit nodes and ResourceError
/// (carrying the best bounds) once `node_budget` search nodes are used.
OracleResult exact_chromatic(const Graph& g, long node_budget = kDefaultNodeBudget);

/// Minimum vertex cover: branch on a max-degree node (take it, or take all its
/// neighbors) with degree-0/1 reductions and a maximal-matching bound; the
/// incumbent starts at the greedy 2-approximation. Same limits as above.
OracleResult exact_mvc(const Graph& g, long node_budget = kDefaultNodeBudget);

// Maximum independent set as the complement of a minimum cover; optimum is
// the negated set size (the MIS cost convention).
OracleResult exact_mis(const Graph& g, long node_budget = kDefaultNodeBudget);

// Dispatch on the problem name.
OracleResult exact_optimum(const ProblemDefinition& problem, const Graph& g,
                           long node_budget = kDefaultNodeBudget);

struct OrderingSearch {
    enum class Mode { Exhaustive, Sampled };
    Mode mode = Mode::Exhaustive;
    int samples = 0;
    std::uint64_t seed = 0;

    static OrderingSearch exhaustive() { return {}; }
    static OrderingSearch sampled(int k, std::uint64_t seed) { return {Mode::Sampled, k, seed}; }
};

inline constexpr int kExhaustiveOrderingLimit = 9;

// Minimum label-rule rollout cost over all n! orderings, or over `samples`
// uniformly random ones. Exhaustive mode throws ParameterError for n > 9.
long best_ordering_cost(const ProblemDefinition& problem, const Graph& g, const OrderingSearch& search);

}  // namespace nodelab
