#include "doctest.h"
#include "fixtures.hpp"
#include "nodelab/errors.hpp"
#include "nodelab/generators.hpp"
#include "nodelab/labeling.hpp"

using namespace nodelab;

namespace {

MdpState state_with(const ProblemDefinition& p, const Graph& g, std::vector<Action> actions) {
    MdpState s(g);
    for (auto a : actions) s.apply(p, a.node, a.label);
    return s;
}

// Random node, random legal label, until terminal.
std::vector<Label> random_legal_episode(const ProblemDefinition& p, const Graph& g, Rng& rng) {
    MdpState s(g);
    while (!s.terminal()) {
        std::vector<NodeId> open;
        for (NodeId v = 0; v < g.node_count(); ++v)
            if (!s.labeling().is_labeled(v)) open.push_back(v);
        NodeId v = open[rng.below(open.size())];
        std::vector<Label> legal;
        for (Label l : p.candidate_labels(s.labeling()))
            if (p.extensible(s.labeling(), v, l)) legal.push_back(l);
        REQUIRE_FALSE(legal.empty());
        s.apply(p, v, legal[rng.below(legal.size())]);
    }
    return {s.labeling().assignment().begin(), s.labeling().assignment().end()};
}

}  // namespace

TEST_SUITE("labeling") {

TEST_CASE("cost sentinel ordering and json") {
    Cost a = Cost::finite(3), inf = Cost::infeasible();
    CHECK(a < inf);
    CHECK(Cost::finite(1e18) < inf);
    CHECK(inf == Cost::infeasible());
    CHECK_THROWS_AS(inf.value(), UsageError);
    CHECK(inf.to_json() == "inf");
    CHECK(a.to_json() == 3);
    CHECK(inf.to_string() == "inf");
}

TEST_CASE("graph coloring extensibility") {
    const auto& gc = graph_coloring();
    Graph tri = fixtures::complete(3);
    MdpState s = state_with(gc, tri, {{0, 1}, {1, 2}});
    CHECK(extensibility_test(gc, s.labeling(), 2, 3));
    CHECK_FALSE(extensibility_test(gc, s.labeling(), 2, 1));
    CHECK_FALSE(extensibility_test(gc, s.labeling(), 2, 4));
    CHECK_THROWS_AS(extensibility_test(gc, s.labeling(), 0, 3), UsageError);

    MdpState empty(tri);
    CHECK(extensibility_test(gc, empty.labeling(), 1, 1));
    CHECK_FALSE(extensibility_test(gc, empty.labeling(), 1, 2));
}

TEST_CASE("vertex cover and independent set extensibility") {
    const auto& mvc = min_vertex_cover();
    Graph edge = fixtures::path(2);
    MdpState s = state_with(mvc, edge, {{0, 0}});
    CHECK_FALSE(extensibility_test(mvc, s.labeling(), 1, 0));
    CHECK(extensibility_test(mvc, s.labeling(), 1, 1));
    CHECK_FALSE(extensibility_test(mvc, s.labeling(), 1, 2));

    const auto& mis = max_independent_set();
    MdpState t = state_with(mis, edge, {{0, 1}});
    CHECK_FALSE(extensibility_test(mis, t.labeling(), 1, 1));
    CHECK(extensibility_test(mis, t.labeling(), 1, 0));
}

TEST_CASE("label rules") {
    const auto& gc = graph_coloring();
    Graph p = fixtures::path(3);
    CHECK(label_rule(gc, MdpState(fixtures::star(3)), 0) == 1);
    MdpState s = state_with(gc, p, {{0, 1}, {2, 2}});
    CHECK(label_rule(gc, s, 1) == 3);
    MdpState first = state_with(gc, p, {{0, 1}});
    CHECK(label_rule(gc, first, 1) == 2);
    CHECK(label_rule(gc, first, 2) == 1);

    const auto& mvc = min_vertex_cover();
    MdpState m = state_with(mvc, p, {{1, 1}});
    CHECK(label_rule(mvc, m, 0) == 0);
    MdpState m0(p);
    CHECK(label_rule(mvc, m0, 0) == 1);

    const auto& mis = max_independent_set();
    MdpState i = state_with(mis, p, {{1, 1}});
    CHECK(label_rule(mis, i, 0) == 0);
    CHECK(label_rule(mis, MdpState(p), 0) == 1);

    MdpState done = state_with(gc, fixtures::path(1), {{0, 1}});
    CHECK_THROWS_AS(label_rule(gc, done, 0), UsageError);
}

TEST_CASE("neighbor colors {1,2} give 3, neighbor colors {2} give 1") {
    const auto& gc = graph_coloring();
    // Node 0 adjacent to 1 and 2; 3 is an isolated helper carrying color 1.
    std::vector<Edge> e{{0, 1}, {0, 2}};
    Graph g = Graph::from_edges(4, e);
    MdpState s = state_with(gc, g, {{1, 1}, {2, 2}});
    CHECK(label_rule(gc, s, 0) == 3);
    MdpState t = state_with(gc, g, {{3, 1}, {1, 2}});
    CHECK(label_rule(gc, t, 0) == 1);
}

TEST_CASE("apply action bookkeeping") {
    const auto& gc = graph_coloring();
    Graph g = fixtures::petersen();
    MdpState s(g);
    CHECK_FALSE(s.last_action().has_value());
    MdpState s1 = apply_action(gc, s, 4, 1);
    CHECK(s.step() == 0);
    CHECK(s1.step() == 1);
    CHECK(s1.labeling().distinct_label_count() == 1);
    CHECK(s1.last_action() == Action{4, 1});
    CHECK_THROWS_AS(apply_action(gc, s1, 0, 1), IllegalActionError);
    CHECK_THROWS_AS(apply_action(gc, s1, 4, 2), UsageError);
}

TEST_CASE("incremental bookkeeping equals rebuild") {
    Rng rng(17);
    for (const ProblemDefinition* p : {&graph_coloring(), &min_vertex_cover(), &max_independent_set()}) {
        for (int trial = 0; trial < 30; ++trial) {
            Graph g = fixtures::random_graph(12, 0.3, 100 + trial);
            MdpState s(g);
            std::vector<NodeId> order = fixtures::random_permutation(12, trial);
            for (NodeId v : order) {
                s.apply(*p, v, label_rule(*p, s, v));
                auto rebuilt = PartialLabeling::from_assignment(g, s.labeling().assignment());
                REQUIRE(rebuilt == s.labeling());
                CHECK(s.step() == s.labeling().labeled_count());
            }
        }
    }
}

TEST_CASE("rollout with ordering") {
    const auto& gc = graph_coloring();
    Graph k3 = fixtures::complete(3);
    std::vector<NodeId> order{2, 0, 1};
    Trajectory t = rollout_with_ordering(gc, k3, order);
    CHECK(t.terminal_cost == Cost::finite(3));
    CHECK(t.episode_return == -3.0);

    std::vector<NodeId> center_first{0, 1, 2, 3, 4};
    CHECK(rollout_with_ordering(gc, fixtures::star(4), center_first).terminal_cost == Cost::finite(2));

    const auto& mvc = min_vertex_cover();
    std::vector<NodeId> c5order{0, 2, 4, 1, 3};
    Trajectory m = rollout_with_ordering(mvc, fixtures::cycle(5), c5order);
    CHECK(m.terminal_cost == Cost::finite(3));
    auto labels = m.labels(5);
    CHECK(labels == std::vector<Label>{1, 0, 1, 0, 1});
    CHECK(m.policy_steps == 3);
    CHECK(m.steps.size() == 5);
    CHECK(m.steps[3].node == 1);
    CHECK(m.steps[4].node == 3);

    std::vector<NodeId> bad{0, 0, 1};
    CHECK_THROWS_AS(rollout_with_ordering(gc, k3, bad), UsageError);
    std::vector<NodeId> short_order{0, 1};
    CHECK_THROWS_AS(rollout_with_ordering(gc, k3, short_order), UsageError);
}

TEST_CASE("verify and cost") {
    const auto& gc = graph_coloring();
    const auto& mvc = min_vertex_cover();
    std::vector<Label> alt{1, 2, 1, 2};
    auto v = verify_and_cost(gc, fixtures::cycle(4), alt);
    CHECK(v.feasible);
    CHECK(v.cost == Cost::finite(2));
    std::vector<Label> mono{1, 1};
    auto w = verify_and_cost(gc, fixtures::path(2), mono);
    CHECK_FALSE(w.feasible);
    CHECK(w.cost == Cost::infeasible());
    std::vector<Label> center{1, 0, 0, 0, 0};
    CHECK(verify_and_cost(mvc, fixtures::star(4), center).cost == Cost::finite(1));
    std::vector<Label> partial{1, kUnlabeled};
    CHECK_THROWS_AS(verify_and_cost(gc, fixtures::path(2), partial), UsageError);
    std::vector<Label> leaves{0, 1, 1, 1, 1};
    CHECK(verify_and_cost(max_independent_set(), fixtures::star(4), leaves).cost == Cost::finite(-4));
}

TEST_CASE("random legal episodes end feasible with return = -cost") {
    Rng rng(2024);
    const GraphFamily families[] = {GraphFamily::BA, GraphFamily::ER, GraphFamily::SER, GraphFamily::WS};
    for (int i = 0; i < 200; ++i) {
        GeneratorSpec spec{.family = families[i % 4], .n = 8 + i % 22, .seed = static_cast<std::uint64_t>(i)};
        Graph g = generate_graph(spec);
        for (const ProblemDefinition* p : {&graph_coloring(), &min_vertex_cover(), &max_independent_set()}) {
            auto labels = random_legal_episode(*p, g, rng);
            CHECK(p->verify(g, labels).feasible);
            auto order = fixtures::random_permutation(g.node_count(), i);
            Trajectory t = rollout_with_ordering(*p, g, order);
            auto check = verify_and_cost(*p, g, t.labels(g.node_count()));
            CHECK(check.feasible);
            CHECK(t.episode_return == -check.cost.value());
        }
    }
}

TEST_CASE("coloring rollouts stay within max degree + 1") {
    for (int i = 0; i < 50; ++i) {
        Graph g = fixtures::random_graph(20, 0.25, i);
        auto order = fixtures::random_permutation(20, 1000 + i);
        Trajectory t = rollout_with_ordering(graph_coloring(), g, order);
        CHECK(t.terminal_cost.value() <= g.max_degree() + 1);
    }
}

TEST_CASE("labeling json") {
    std::vector<Label> l{1, 2};
    auto j = labeling_to_json("gc", l, Cost::finite(2));
    CHECK(j["problem"] == "gc");
    CHECK(j["labels"] == nlohmann::json::array({1, 2}));
    CHECK(j["cost"] == 2);
    CHECK(labeling_to_json("gc", l, Cost::infeasible())["cost"] == "inf");
}

TEST_CASE("problem lookup") {
    CHECK(problem_by_name("gc").name() == "gc");
    CHECK(problem_by_name("mvc").name() == "mvc");
    CHECK(problem_by_name("mis").name() == "mis");
    CHECK_THROWS_AS(problem_by_name("tsp"), ParameterError);
}

}  // TEST_SUITE
