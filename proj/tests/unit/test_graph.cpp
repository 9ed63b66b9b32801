#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "nodelab/errors.hpp"
#include "nodelab/features.hpp"
#include "nodelab/generators.hpp"
#include "nodelab/graph_io.hpp"

using namespace nodelab;

namespace {

// Preferential attachment written independently of the library: adjacency
// sets, start from a star on attach+1 nodes, each arriving node draws distinct
// targets with probability proportional to current degree.
std::size_t reference_ba_edge_count(int n, int attach, std::uint64_t seed) {
    std::vector<std::set<int>> adj(n);
    for (int i = 1; i <= attach; ++i) {
        adj[0].insert(i);
        adj[i].insert(0);
    }
    Rng rng(seed);
    for (int v = attach + 1; v < n; ++v) {
        std::set<int> targets;
        while (static_cast<int>(targets.size()) < attach) {
            long total = 0;
            for (int u = 0; u < v; ++u) total += static_cast<long>(adj[u].size());
            long r = static_cast<long>(rng.below(static_cast<std::uint64_t>(total)));
            int u = 0;
            while (r >= static_cast<long>(adj[u].size())) r -= static_cast<long>(adj[u++].size());
            targets.insert(u);
        }
        for (int u : targets) {
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    std::size_t twice = 0;
    for (auto& s : adj) twice += s.size();
    return twice / 2;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("graph construction merges duplicates and keeps invariants") {
    std::vector<Edge> e{{0, 1}, {1, 0}, {1, 2}, {2, 1}, {0, 2}};
    Graph g = Graph::from_edges(3, e);
    CHECK(g.edge_count() == 3);
    CHECK_FALSE(check_invariants(g).has_value());
    CHECK(g.has_edge(2, 0));
    CHECK(g.degree(1) == 2);
    std::vector<Edge> loop{{1, 1}};
    CHECK_THROWS_AS(Graph::from_edges(3, loop), ParameterError);
    std::vector<Edge> out{{0, 3}};
    CHECK_THROWS_AS(Graph::from_edges(3, out), ParameterError);
}

TEST_CASE("components, relabel, union, degeneracy") {
    std::vector<Edge> e{{0, 1}, {2, 3}, {3, 4}};
    Graph g = Graph::from_edges(6, e);
    int count = 0;
    auto comp = connected_components(g, &count);
    CHECK(count == 3);
    CHECK(comp[0] == 0);
    CHECK(comp[2] == 1);
    CHECK(comp[5] == 2);
    Graph big = largest_component(g);
    CHECK(big == fixtures::path(3));
    CHECK_FALSE(is_connected(g));

    Graph p = fixtures::petersen();
    auto perm = fixtures::random_permutation(10, 3);
    Graph q = relabel(p, perm);
    CHECK_FALSE(check_invariants(q).has_value());
    for (const Edge& x : p.edges()) CHECK(q.has_edge(perm[x.u], perm[x.v]));
    std::vector<int> bad{0, 0, 1, 2, 3, 4, 5, 6, 7, 8};
    CHECK_THROWS_AS(relabel(p, bad), UsageError);

    std::vector<Graph> parts{fixtures::complete(3), fixtures::path(2)};
    GraphUnion u = disjoint_union(parts);
    CHECK(u.graph.node_count() == 5);
    CHECK(u.graph.edge_count() == 4);
    CHECK(u.offsets == std::vector<int>{0, 3, 5});
    CHECK(u.graph.has_edge(3, 4));

    CHECK(degeneracy(fixtures::complete(5)) == 4);
    CHECK(degeneracy(fixtures::star(6)) == 1);
    CHECK(degeneracy(fixtures::petersen()) == 3);
}

TEST_CASE("sparse ER probability") {
    CHECK(sparse_er_probability(100, 7.5, 0.2) == doctest::Approx(0.075).epsilon(1e-15));
    CHECK(sparse_er_probability(10000, 7.5, 0.2) == doctest::Approx(1.2 * std::log(1e4) / 1e4).epsilon(1e-14));
    CHECK(sparse_er_probability(10000, 7.5, 0.2) == doctest::Approx(0.00110524).epsilon(1e-6));
    CHECK(sparse_er_probability(2, 7.5, 0.2) == 1.0);
    CHECK_THROWS_AS(sparse_er_probability(1, 7.5, 0.2), ParameterError);
    double prev = sparse_er_probability(3, 7.5, 0.2);
    for (int n = 4; n < 3000; ++n) {
        double p = sparse_er_probability(n, 7.5, 0.2);
        CHECK(p <= prev);
        CHECK(p > 0.0);
        prev = p;
    }
}

TEST_CASE("generator examples") {
    GeneratorSpec er{.family = GraphFamily::ER, .n = 4, .p = 1.0, .seed = 99};
    Graph k4 = generate_graph(er);
    CHECK(k4 == fixtures::complete(4));

    GeneratorSpec ws{.family = GraphFamily::WS, .n = 10, .k = 4, .q = 0.0, .seed = 5};
    Graph ring = generate_graph(ws);
    CHECK(ring.edge_count() == 20);
    for (int v = 0; v < 10; ++v) CHECK(ring.degree(v) == 4);

    GeneratorSpec ba{.family = GraphFamily::BA, .n = 100, .attach = 4, .seed = 7};
    Graph g = generate_graph(ba);
    CHECK(g.node_count() == 100);
    CHECK(g.edge_count() == 384);
    CHECK(reference_ba_edge_count(100, 4, 7) == 384);

    GeneratorSpec empty{.family = GraphFamily::ER, .n = 12, .p = 0.0, .seed = 1};
    CHECK(generate_graph(empty).node_count() == 1);
}

TEST_CASE("generators are deterministic, valid and connected") {
    for (GraphFamily f : {GraphFamily::BA, GraphFamily::ER, GraphFamily::SER, GraphFamily::WS}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            GeneratorSpec spec{.family = f, .n = 15 + static_cast<int>(seed) * 7, .seed = seed};
            Graph a = generate_graph(spec);
            Graph b = generate_graph(spec);
            CHECK(a == b);
            CHECK_FALSE(check_invariants(a).has_value());
            CHECK(is_connected(a));
        }
    }
    GeneratorSpec ws{.family = GraphFamily::WS, .n = 30, .seed = 1};
    GeneratorSpec ws2 = ws;
    ws2.seed = 2;
    CHECK_FALSE(generate_graph(ws) == generate_graph(ws2));
}

TEST_CASE("generator parameter errors") {
    CHECK_THROWS_AS(generate_graph({.family = GraphFamily::BA, .n = 4, .attach = 4}), ParameterError);
    CHECK_THROWS_AS(generate_graph({.family = GraphFamily::WS, .n = 5, .k = 5}), ParameterError);
    CHECK_THROWS_AS(generate_graph({.family = GraphFamily::ER, .n = 5, .p = 1.5}), ParameterError);
    CHECK_THROWS_AS(generate_graph({.family = GraphFamily::WS, .n = 10, .k = 1}), ParameterError);
    CHECK_THROWS_AS(generate_graph({.family = GraphFamily::WS, .n = 10, .q = -0.1}), ParameterError);
    CHECK_THROWS_AS(parse_family("XY"), ParameterError);
    CHECK(parse_family("S-ER") == GraphFamily::SER);
}

TEST_CASE("generator spec json round trip") {
    GeneratorSpec spec{.family = GraphFamily::WS, .n = 25, .k = 6, .q = 0.3, .seed = 11};
    nlohmann::json j = spec;
    CHECK(j.get<GeneratorSpec>() == spec);
}

TEST_CASE("DIMACS and edge-list parsing") {
    Graph tri = parse_graph("p edge 3 3\ne 1 2\ne 2 3\ne 1 3\n", GraphFormat::DimacsCol);
    CHECK(tri == fixtures::complete(3));
    Graph one = parse_graph("c dup\np edge 2 2\ne 1 2\ne 2 1\n", GraphFormat::DimacsCol);
    CHECK(one.edge_count() == 1);
    CHECK_THROWS_AS(parse_graph("e 1 2\n", GraphFormat::DimacsCol), ParseError);
    try {
        parse_graph("p edge 3 2\ne 1 2\ne 2 2\n", GraphFormat::DimacsCol);
        FAIL("self-loop accepted");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    try {
        parse_graph("c x\np edge 3 1\ne 1 4\n", GraphFormat::DimacsCol);
        FAIL("out of range accepted");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    Graph el = parse_graph("# a path\n0 1\n1 2\n", GraphFormat::EdgeList);
    CHECK(el == fixtures::path(3));
    Graph padded = parse_graph("# nodes 5\n0 1\n", GraphFormat::EdgeList);
    CHECK(padded.node_count() == 5);
    CHECK_THROWS_AS(parse_graph("0 0\n", GraphFormat::EdgeList), ParseError);
}

TEST_CASE("parse and serialize round trip") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Graph g = fixtures::random_graph(12, 0.3, seed);
        for (GraphFormat f : {GraphFormat::DimacsCol, GraphFormat::EdgeList}) {
            Graph back = parse_graph(serialize_graph(g, f), f);
            CHECK(back == g);
            CHECK(parse_graph(serialize_graph(back, f), f) == g);
        }
    }
}

TEST_CASE("degree features") {
    Graph g = fixtures::star(4);
    Graph lone(1);
    FeatureMatrix x0 = degree_features(lone, 8, false);
    for (int c = 0; c < 8; ++c) CHECK(x0.at(0, c) == (c % 2 == 0 ? 0.0 : 1.0));

    FeatureMatrix x = degree_features(g, 16, false);
    CHECK(x.rows == 5);
    CHECK(x.cols == 16);
    for (double v : x.values) CHECK(std::abs(v) <= 1.0);
    for (int c = 0; c < 16; ++c) CHECK(x.at(1, c) == x.at(4, c));
    CHECK(x.at(0, 0) == std::sin(4.0));
    CHECK(x.at(0, 3) == doctest::Approx(std::cos(4.0 / std::pow(10000.0, 2.0 / 16.0))));

    FeatureMatrix centered = degree_features(g, 4, true);
    CHECK(centered.at(1, 0) == doctest::Approx(std::sin(1.0 - 1.6)));
    CHECK_THROWS_AS(degree_features(g, 7, false), ParameterError);
}

}  // TEST_SUITE
