#include "doctest.h"
#include "fixtures.hpp"
#include "nodelab/errors.hpp"
#include "nodelab/generators.hpp"
#include "nodelab/heuristics.hpp"
#include "nodelab/oracles.hpp"

using namespace nodelab;

namespace {

// Greedy maximal matching; any matching bounds the cover from below.
int matching_size(const Graph& g) {
    std::vector<char> used(g.node_count(), 0);
    int size = 0;
    for (const Edge& e : g.edges())
        if (!used[e.u] && !used[e.v]) {
            used[e.u] = used[e.v] = 1;
            ++size;
        }
    return size;
}

}  // namespace

TEST_SUITE("oracles") {

TEST_CASE("chromatic number examples") {
    CHECK(exact_chromatic(fixtures::complete(5)).optimum == 5);
    CHECK(exact_chromatic(fixtures::cycle(5)).optimum == 3);
    CHECK(exact_chromatic(fixtures::petersen()).optimum == 3);
    CHECK(fixtures::brute_force_chromatic(fixtures::petersen()) == 3);
    CHECK_FALSE(fixtures::brute_force_colorable(fixtures::petersen(), 2));
    CHECK(exact_chromatic(Graph(1)).optimum == 1);
}

TEST_CASE("vertex cover examples") {
    CHECK(exact_mvc(fixtures::path(2)).optimum == 1);
    CHECK(exact_mvc(fixtures::cycle(5)).optimum == 3);
    CHECK(fixtures::brute_force_mvc(fixtures::cycle(5)) == 3);
    CHECK(exact_mvc(fixtures::star(4)).optimum == 1);
    CHECK(exact_mis(fixtures::star(4)).optimum == -4);
    CHECK(exact_mvc(Graph(3)).optimum == 0);
}

TEST_CASE("oracles agree with brute force and their witnesses verify") {
    for (std::uint64_t seed = 0; seed < 120; ++seed) {
        int n = 4 + static_cast<int>(seed % 10);
        Graph g = fixtures::random_graph(n, 0.2 + 0.05 * static_cast<double>(seed % 8), seed);
        OracleResult chi = exact_chromatic(g);
        CHECK(chi.optimum == fixtures::brute_force_chromatic(g));
        CHECK(verify_and_cost(graph_coloring(), g, chi.witness).cost == Cost::finite(chi.optimum));
        OracleResult tau = exact_mvc(g);
        CHECK(tau.optimum == fixtures::brute_force_mvc(g));
        CHECK(verify_and_cost(min_vertex_cover(), g, tau.witness).cost == Cost::finite(tau.optimum));
        CHECK(tau.optimum >= matching_size(g));
        OracleResult mis = exact_mis(g);
        CHECK(verify_and_cost(max_independent_set(), g, mis.witness).cost == Cost::finite(mis.optimum));
    }
}

TEST_CASE("oracles are invariant under relabeling") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Graph g = generate_graph({.family = GraphFamily::ER, .n = 30, .p = 0.2, .seed = seed});
        Graph h = relabel(g, fixtures::random_permutation(g.node_count(), seed + 99));
        CHECK(exact_chromatic(g).optimum == exact_chromatic(h).optimum);
        CHECK(exact_mvc(g).optimum == exact_mvc(h).optimum);
    }
}

TEST_CASE("larger instances within budget") {
    Graph g = generate_graph({.family = GraphFamily::BA, .n = 60, .attach = 4, .seed = 3});
    OracleResult tau = exact_mvc(g);
    CHECK(verify_and_cost(min_vertex_cover(), g, tau.witness).feasible);
    CHECK(tau.optimum <= mvc_approx(g, true).cost.value());
    OracleResult chi = exact_chromatic(g);
    CHECK(chi.optimum <= dsatur(g).cost.value());
}

TEST_CASE("limits and budgets") {
    CHECK_THROWS_AS(exact_chromatic(Graph(65)), ParameterError);
    CHECK_THROWS_AS(exact_mvc(Graph(65)), ParameterError);
    Graph g = generate_graph({.family = GraphFamily::ER, .n = 60, .p = 0.5, .seed = 1});
    try {
        exact_chromatic(g, 10);
        FAIL("budget ignored");
    } catch (const ResourceError& e) {
        CHECK(e.lower_bound() <= e.upper_bound());
        CHECK(e.lower_bound() >= 1);
    }
    CHECK_THROWS_AS(exact_mvc(g, 5), ResourceError);
}

TEST_CASE("best ordering cost") {
    CHECK(best_ordering_cost(graph_coloring(), fixtures::complete(3), OrderingSearch::exhaustive()) == 3);
    CHECK_THROWS_AS(best_ordering_cost(graph_coloring(), Graph(10), OrderingSearch::exhaustive()),
                    ParameterError);
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        Graph g = fixtures::random_connected(7, 0.3, seed);
        CHECK(best_ordering_cost(graph_coloring(), g, OrderingSearch::exhaustive()) ==
              exact_chromatic(g).optimum);
        CHECK(best_ordering_cost(min_vertex_cover(), g, OrderingSearch::exhaustive()) == exact_mvc(g).optimum);
        long sampled = best_ordering_cost(graph_coloring(), g, OrderingSearch::sampled(20, seed));
        CHECK(sampled >= exact_chromatic(g).optimum);
    }
}

}  // TEST_SUITE
