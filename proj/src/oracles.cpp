#include "nodelab/oracles.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

#include "nodelab/errors.hpp"
#include "nodelab/heuristics.hpp"
#include "nodelab/rng.hpp"

namespace nodelab {

namespace {

void check_size(const Graph& g, const char* who) {
    if (g.node_count() > kOracleNodeLimit)
        throw ParameterError(std::string(who) + ": " + std::to_string(g.node_count()) +
                             " nodes exceeds the oracle limit of " + std::to_string(kOracleNodeLimit));
}

// Clique grown greedily from each start node, candidates by degree; largest wins.
std::vector<NodeId> greedy_clique(const Graph& g) {
    const int n = g.node_count();
    std::vector<NodeId> by_degree(static_cast<std::size_t>(n));
    std::iota(by_degree.begin(), by_degree.end(), 0);
    std::stable_sort(by_degree.begin(), by_degree.end(),
                     [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
    std::vector<NodeId> best;
    for (NodeId start : by_degree) {
        if (g.degree(start) + 1 <= static_cast<int>(best.size())) continue;
        std::vector<NodeId> clique{start};
        for (NodeId v : by_degree) {
            if (v == start) continue;
            bool ok = std::all_of(clique.begin(), clique.end(), [&](NodeId u) { return g.has_edge(u, v); });
            if (ok) clique.push_back(v);
        }
        if (clique.size() > best.size()) best = std::move(clique);
    }
    return best;
}

class ColoringSearch {
public:
    ColoringSearch(const Graph& g, long budget)
        : g_(g), n_(g.node_count()), budget_(budget),
          color_(static_cast<std::size_t>(n_), kUnlabeled),
          conflicts_(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_ + 2), 0),
          saturation_(static_cast<std::size_t>(n_), 0) {}

    OracleResult run() {
        HeuristicResult start = dsatur(g_);
        best_ = static_cast<int>(start.cost.value());
        best_coloring_ = start.labeling;
        std::vector<NodeId> clique = greedy_clique(g_);
        lower_ = static_cast<int>(clique.size());
        if (lower_ < best_) {
            // Any optimal coloring can be renamed so the clique gets 1..|Q|.
            for (std::size_t i = 0; i < clique.size(); ++i) assign(clique[i], static_cast<Label>(i + 1));
            search(lower_, lower_);
        }
        return {best_, best_coloring_, explored_};
    }

private:
    int& conflict(NodeId v, Label c) { return conflicts_[static_cast<std::size_t>(v) * (n_ + 2) + c]; }

    void assign(NodeId v, Label c) {
        color_[v] = c;
        for (NodeId u : g_.neighbors(v))
            if (conflict(u, c)++ == 0) ++saturation_[u];
    }

    void unassign(NodeId v) {
        const Label c = color_[v];
        color_[v] = kUnlabeled;
        for (NodeId u : g_.neighbors(v))
            if (--conflict(u, c) == 0) --saturation_[u];
    }

    void search(int colored, int used) {
        if (++explored_ > budget_)
            throw ResourceError("exact_chromatic: node budget of " + std::to_string(budget_) + " exhausted",
                                lower_, best_);
        if (colored == n_) {
            best_ = used;
            best_coloring_ = color_;
            return;
        }
        NodeId v = -1;
        for (NodeId u = 0; u < n_; ++u) {
            if (color_[u] != kUnlabeled) continue;
            if (v < 0 || saturation_[u] > saturation_[v] ||
                (saturation_[u] == saturation_[v] && g_.degree(u) > g_.degree(v)))
                v = u;
        }
        for (Label c = 1; c <= std::min(used + 1, best_ - 1); ++c) {
            if (conflict(v, c) != 0) continue;
            assign(v, c);
            search(colored + 1, std::max(used, c));
            unassign(v);
            if (best_ <= lower_) return;
        }
    }

    const Graph& g_;
    int n_;
    long budget_;
    long explored_ = 0;
    std::vector<Label> color_;
    std::vector<int> conflicts_;
    std::vector<int> saturation_;
    int best_ = 0;
    int lower_ = 0;
    std::vector<Label> best_coloring_;
};

using Mask = std::uint64_t;

class CoverSearch {
public:
    CoverSearch(const Graph& g, long budget) : g_(g), n_(g.node_count()), budget_(budget) {
        adjacency_.assign(static_cast<std::size_t>(n_), 0);
        for (NodeId v = 0; v < n_; ++v)
            for (NodeId u : g.neighbors(v)) adjacency_[v] |= Mask{1} << u;
    }

    OracleResult run() {
        HeuristicResult start = mvc_approx(g_, true);
        best_ = static_cast<int>(start.cost.value());
        for (NodeId v = 0; v < n_; ++v)
            if (start.labeling[v] == 1) best_cover_ |= Mask{1} << v;
        Mask all = n_ == 64 ? ~Mask{0} : ((Mask{1} << n_) - 1);
        lower_ = matching_bound(all);
        if (lower_ < best_) search(all, 0, 0);
        std::vector<Label> witness(static_cast<std::size_t>(n_), 0);
        for (NodeId v = 0; v < n_; ++v)
            if (best_cover_ >> v & 1) witness[v] = 1;
        return {best_, std::move(witness), explored_};
    }

private:
    int degree_in(NodeId v, Mask live) const { return std::popcount(adjacency_[v] & live); }

    // Greedy maximal matching inside the live subgraph.
    int matching_bound(Mask live) const {
        int size = 0;
        while (live) {
            NodeId v = std::countr_zero(live);
            live &= ~(Mask{1} << v);
            Mask nb = adjacency_[v] & live;
            if (nb) {
                live &= ~(Mask{1} << std::countr_zero(nb));
                ++size;
            }
        }
        return size;
    }

    void search(Mask live, Mask cover, int size) {
        if (++explored_ > budget_)
            throw ResourceError("exact_mvc: node budget of " + std::to_string(budget_) + " exhausted", lower_,
                                best_);
        // Degree-0 nodes leave; a degree-1 node's neighbor joins the cover.
        bool changed = true;
        while (changed) {
            changed = false;
            for (Mask scan = live; scan;) {
                NodeId v = std::countr_zero(scan);
                scan &= scan - 1;
                if (!(live >> v & 1)) continue;
                Mask nb = adjacency_[v] & live;
                if (nb == 0) {
                    live &= ~(Mask{1} << v);
                    changed = true;
                } else if ((nb & (nb - 1)) == 0) {
                    NodeId u = std::countr_zero(nb);
                    cover |= Mask{1} << u;
                    ++size;
                    live &= ~((Mask{1} << u) | (Mask{1} << v));
                    changed = true;
                }
            }
        }
        if (size >= best_) return;
        if (live == 0) {
            best_ = size;
            best_cover_ = cover;
            return;
        }
        if (size + matching_bound(live) >= best_) return;

        NodeId pick = -1;
        int pick_degree = -1;
        for (Mask scan = live; scan; scan &= scan - 1) {
            NodeId v = std::countr_zero(scan);
            int d = degree_in(v, live);
            if (d > pick_degree) {
                pick = v;
                pick_degree = d;
            }
        }
        const Mask bit = Mask{1} << pick;
        search(live & ~bit, cover | bit, size + 1);
        const Mask nb = adjacency_[pick] & live;
        search(live & ~(bit | nb), cover | nb, size + pick_degree);
    }

    const Graph& g_;
    int n_;
    long budget_;
    long explored_ = 0;
    std::vector<Mask> adjacency_;
    int best_ = 0;
    int lower_ = 0;
    Mask best_cover_ = 0;
};

}  // namespace

OracleResult exact_chromatic(const Graph& g, long node_budget) {
    check_size(g, "exact_chromatic");
    if (g.node_count() == 0) return {};
    return ColoringSearch(g, node_budget).run();
}

OracleResult exact_mvc(const Graph& g, long node_budget) {
    check_size(g, "exact_mvc");
    if (g.node_count() == 0) return {};
    return CoverSearch(g, node_budget).run();
}

OracleResult exact_mis(const Graph& g, long node_budget) {
    OracleResult cover = exact_mvc(g, node_budget);
    OracleResult result;
    result.optimum = -(g.node_count() - cover.optimum);
    result.witness.resize(cover.witness.size());
    for (std::size_t v = 0; v < cover.witness.size(); ++v) result.witness[v] = 1 - cover.witness[v];
    result.explored = cover.explored;
    return result;
}

OracleResult exact_optimum(const ProblemDefinition& problem, const Graph& g, long node_budget) {
    if (problem.name() == "gc") return exact_chromatic(g, node_budget);
    if (problem.name() == "mvc") return exact_mvc(g, node_budget);
    if (problem.name() == "mis") return exact_mis(g, node_budget);
    throw ParameterError("no exact oracle for problem '" + std::string(problem.name()) + "'");
}

long best_ordering_cost(const ProblemDefinition& problem, const Graph& g, const OrderingSearch& search) {
    const int n = g.node_count();
    std::vector<NodeId> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto cost_of = [&](const std::vector<NodeId>& o) {
        return static_cast<long>(rollout_with_ordering(problem, g, o).terminal_cost.value());
    };
    if (search.mode == OrderingSearch::Mode::Exhaustive) {
        if (n > kExhaustiveOrderingLimit)
            throw ParameterError("exhaustive ordering search needs n <= " +
                                 std::to_string(kExhaustiveOrderingLimit) + ", got " + std::to_string(n));
        long best = cost_of(order);
        while (std::next_permutation(order.begin(), order.end())) best = std::min(best, cost_of(order));
        return best;
    }
    if (search.samples < 1) throw ParameterError("sampled ordering search needs at least one sample");
    Rng rng(search.seed);
    long best = 0;
    for (int i = 0; i < search.samples; ++i) {
        rng.shuffle(order);
        long c = cost_of(order);
        if (i == 0 || c < best) best = c;
    }
    return best;
}

}  // namespace nodelab
