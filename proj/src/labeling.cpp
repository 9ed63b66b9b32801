#include "nodelab/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nodelab/errors.hpp"

namespace nodelab {

// ---- Cost -------------------------------------------------------------------

double Cost::value() const {
    if (infinite_) throw UsageError("value() of an infeasible (infinite) cost");
    return value_;
}

std::partial_ordering Cost::operator<=>(const Cost& other) const noexcept {
    if (infinite_ || other.infinite_) {
        if (infinite_ && other.infinite_) return std::partial_ordering::equivalent;
        return infinite_ ? std::partial_ordering::greater : std::partial_ordering::less;
    }
    return value_ <=> other.value_;
}

std::string Cost::to_string() const {
    if (infinite_) return "inf";
    std::ostringstream out;
    out << value_;
    return out.str();
}

nlohmann::json Cost::to_json() const {
    if (infinite_) return "inf";
    if (value_ == std::floor(value_) && std::abs(value_) < 1e15) return static_cast<long long>(value_);
    return value_;
}

// ---- PartialLabeling --------------------------------------------------------

PartialLabeling::PartialLabeling(const Graph& g)
    : graph_(&g),
      assignment_(static_cast<std::size_t>(g.node_count()), kUnlabeled),
      classes_(static_cast<std::size_t>(g.node_count()) + 1),
      labeled_neighbors_(static_cast<std::size_t>(g.node_count()), 0),
      ones_neighbors_(static_cast<std::size_t>(g.node_count()), 0) {}

PartialLabeling PartialLabeling::from_assignment(const Graph& g, std::span<const Label> assignment) {
    if (static_cast<int>(assignment.size()) != g.node_count())
        throw UsageError("assignment length differs from node count");
    PartialLabeling out(g);
    const int n = g.node_count();
    for (int v = 0; v < n; ++v) {
        const Label l = assignment[v];
        if (l == kUnlabeled) continue;
        if (l < 0 || l > n) throw UsageError("label outside {0..n}");
        out.assignment_[v] = l;
        ++out.labeled_count_;
        out.classes_[l].push_back(v);  // v ascending keeps classes sorted
    }
    for (const auto& cls : out.classes_)
        if (!cls.empty()) ++out.distinct_;
    for (int v = 0; v < n; ++v)
        for (NodeId u : g.neighbors(v)) {
            if (out.is_labeled(u)) ++out.labeled_neighbors_[v];
            if (out.assignment_[u] == 1) ++out.ones_neighbors_[v];
        }
    for (const Edge& e : g.edges()) {
        const Label a = out.assignment_[e.u];
        const Label b = out.assignment_[e.v];
        if (a == 1 || b == 1) ++out.covered_edges_;
        if (a == 0 && b == 0) ++out.zero_zero_edges_;
        if (a == 1 && b == 1) ++out.one_one_edges_;
    }
    return out;
}

std::vector<NodeId> PartialLabeling::labeled_nodes() const {
    std::vector<NodeId> out;
    out.reserve(static_cast<std::size_t>(labeled_count_));
    for (int v = 0; v < node_count(); ++v)
        if (is_labeled(v)) out.push_back(v);
    return out;
}

void PartialLabeling::assign(NodeId v, Label l) {
    if (v < 0 || v >= node_count()) throw UsageError("node id out of range");
    if (is_labeled(v)) throw UsageError("node " + std::to_string(v) + " is already labeled");
    if (l < 0 || l > node_count()) throw UsageError("label " + std::to_string(l) + " outside {0..n}");
    assignment_[v] = l;
    ++labeled_count_;
    auto& cls = classes_[l];
    if (cls.empty()) ++distinct_;
    cls.insert(std::lower_bound(cls.begin(), cls.end(), v), v);

    const int zero_nbrs = labeled_neighbors_[v] - ones_neighbors_[v];
    if (l == 1) {
        covered_edges_ += static_cast<std::size_t>(graph_->degree(v) - ones_neighbors_[v]);
        one_one_edges_ += static_cast<std::size_t>(ones_neighbors_[v]);
    } else if (l == 0) {
        zero_zero_edges_ += static_cast<std::size_t>(zero_nbrs);
    }
    for (NodeId u : graph_->neighbors(v)) {
        ++labeled_neighbors_[u];
        if (l == 1) ++ones_neighbors_[u];
    }
}

bool PartialLabeling::operator==(const PartialLabeling& other) const {
    return graph_ == other.graph_ && assignment_ == other.assignment_ &&
           labeled_count_ == other.labeled_count_ && classes_ == other.classes_ &&
           distinct_ == other.distinct_ && labeled_neighbors_ == other.labeled_neighbors_ &&
           ones_neighbors_ == other.ones_neighbors_ && covered_edges_ == other.covered_edges_ &&
           zero_zero_edges_ == other.zero_zero_edges_ && one_one_edges_ == other.one_one_edges_;
}

// ---- MdpState ---------------------------------------------------------------

void MdpState::apply(const ProblemDefinition& problem, NodeId v, Label l) {
    if (!extensibility_test(problem, labeling_, v, l))
        throw IllegalActionError("action (" + std::to_string(v) + ", " + std::to_string(l) +
                                 ") fails the " + std::string(problem.name()) + " extensibility test");
    labeling_.assign(v, l);
    history_.push_back({v, l});
}

// ---- problems ---------------------------------------------------------------

namespace {

void require_complete(const Graph& g, std::span<const Label> labels) {
    if (static_cast<int>(labels.size()) != g.node_count())
        throw UsageError("labeling length differs from node count");
    for (Label l : labels)
        if (l == kUnlabeled) throw UsageError("labeling is incomplete");
}

class GraphColoring final : public ProblemDefinition {
public:
    std::string_view name() const override { return "gc"; }

    // Colors are 1-based; a new color may only be the next one (l <= k + 1).
    bool extensible(const PartialLabeling& labeling, NodeId v, Label l) const override {
        if (l < 1 || l > labeling.node_count()) return false;
        if (l > labeling.distinct_label_count() + 1) return false;
        for (NodeId u : labeling.graph().neighbors(v))
            if (labeling.label_of(u) == l) return false;
        return true;
    }

    // Smallest color not used by a labeled neighbor.
    Label label_rule(const MdpState& state, NodeId v) const override {
        const PartialLabeling& labeling = state.labeling();
        auto nbrs = labeling.graph().neighbors(v);
        std::vector<char> used(nbrs.size() + 2, 0);
        for (NodeId u : nbrs) {
            Label c = labeling.label_of(u);
            if (c >= 1 && c <= static_cast<Label>(nbrs.size())) used[c] = 1;
        }
        Label l = 1;
        while (used[l]) ++l;
        return l;
    }

    Verification verify(const Graph& g, std::span<const Label> labels) const override {
        require_complete(g, labels);
        for (Label l : labels)
            if (l < 1 || l > g.node_count()) return {};
        for (const Edge& e : g.edges())
            if (labels[e.u] == labels[e.v]) return {};
        std::vector<Label> distinct(labels.begin(), labels.end());
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        return {true, Cost::finite(static_cast<double>(distinct.size()))};
    }

    std::vector<Label> candidate_labels(const PartialLabeling& labeling) const override {
        std::vector<Label> out;
        const int top = std::min(labeling.distinct_label_count() + 1, labeling.node_count());
        for (Label l = 1; l <= top; ++l) out.push_back(l);
        return out;
    }
};

class BinaryProblem : public ProblemDefinition {
public:
    std::vector<Label> candidate_labels(const PartialLabeling&) const override { return {0, 1}; }

protected:
    static std::size_t count_ones(std::span<const Label> labels) {
        return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    }
    static bool binary(std::span<const Label> labels) {
        return std::all_of(labels.begin(), labels.end(), [](Label l) { return l == 0 || l == 1; });
    }
};

class MinVertexCover final : public BinaryProblem {
public:
    std::string_view name() const override { return "mvc"; }

    // The label-1 nodes must cover every edge of G[V' + v].
    bool extensible(const PartialLabeling& labeling, NodeId v, Label l) const override {
        if (l != 0 && l != 1) return false;
        if (labeling.zero_zero_edges() != 0) return false;
        if (l == 1) return true;
        return labeling.labeled_neighbor_count(v) == labeling.ones_neighbor_count(v);
    }

    // 1 until the label-1 set covers all of G.
    Label label_rule(const MdpState& state, NodeId) const override {
        return state.labeling().covers_all_edges() ? 0 : 1;
    }

    Verification verify(const Graph& g, std::span<const Label> labels) const override {
        require_complete(g, labels);
        if (!binary(labels)) return {};
        for (const Edge& e : g.edges())
            if (labels[e.u] != 1 && labels[e.v] != 1) return {};
        return {true, Cost::finite(static_cast<double>(count_ones(labels)))};
    }

    std::optional<Label> completion_label(const MdpState& state) const override {
        if (state.labeling().covers_all_edges()) return 0;
        return std::nullopt;
    }
};

class MaxIndependentSet final : public BinaryProblem {
public:
    std::string_view name() const override { return "mis"; }

    // The label-1 nodes must stay independent.
    bool extensible(const PartialLabeling& labeling, NodeId v, Label l) const override {
        if (l != 0 && l != 1) return false;
        if (labeling.one_one_edges() != 0) return false;
        if (l == 0) return true;
        return labeling.ones_neighbor_count(v) == 0;
    }

    Label label_rule(const MdpState& state, NodeId v) const override {
        return state.labeling().ones_neighbor_count(v) == 0 ? 1 : 0;
    }

    // Cost is the negated set size so that all problems minimize.
    Verification verify(const Graph& g, std::span<const Label> labels) const override {
        require_complete(g, labels);
        if (!binary(labels)) return {};
        for (const Edge& e : g.edges())
            if (labels[e.u] == 1 && labels[e.v] == 1) return {};
        return {true, Cost::finite(-static_cast<double>(count_ones(labels)))};
    }
};

}  // namespace

const ProblemDefinition& graph_coloring() {
    static const GraphColoring instance;
    return instance;
}

const ProblemDefinition& min_vertex_cover() {
    static const MinVertexCover instance;
    return instance;
}

const ProblemDefinition& max_independent_set() {
    static const MaxIndependentSet instance;
    return instance;
}

const ProblemDefinition& problem_by_name(std::string_view name) {
    if (name == "gc" || name == "coloring" || name == "graph-coloring") return graph_coloring();
    if (name == "mvc" || name == "vertex-cover" || name == "min-vertex-cover") return min_vertex_cover();
    if (name == "mis" || name == "independent-set" || name == "max-independent-set")
        return max_independent_set();
    throw ParameterError("unknown problem '" + std::string(name) + "'");
}

bool extensibility_test(const ProblemDefinition& problem, const PartialLabeling& labeling, NodeId v,
                        Label l) {
    if (v < 0 || v >= labeling.node_count()) throw UsageError("node id out of range");
    if (labeling.is_labeled(v)) throw UsageError("node " + std::to_string(v) + " is already labeled");
    return problem.extensible(labeling, v, l);
}

Label label_rule(const ProblemDefinition& problem, const MdpState& state, NodeId v) {
    if (state.terminal()) throw UsageError("label_rule on a terminal state");
    if (state.labeling().is_labeled(v)) throw UsageError("label_rule on a labeled node");
    return problem.label_rule(state, v);
}

MdpState apply_action(const ProblemDefinition& problem, const MdpState& state, NodeId v, Label l) {
    MdpState next = state;
    next.apply(problem, v, l);
    return next;
}

// ---- trajectories -----------------------------------------------------------

std::vector<Label> Trajectory::labels(int node_count) const {
    std::vector<Label> out(static_cast<std::size_t>(node_count), kUnlabeled);
    for (const auto& s : steps) out[s.node] = s.label;
    return out;
}

double Trajectory::total_log_probability() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < policy_steps; ++i) sum += steps[i].log_probability;
    return sum;
}

bool apply_completion(const ProblemDefinition& problem, MdpState& state, Trajectory& trajectory) {
    if (state.terminal()) return true;
    auto fill = problem.completion_label(state);
    if (!fill) return false;
    const int n = state.graph().node_count();
    for (NodeId v = 0; v < n; ++v) {
        if (state.labeling().is_labeled(v)) continue;
        state.apply(problem, v, *fill);
        trajectory.steps.push_back({v, *fill, 0.0});
    }
    return true;
}

void close_episode(const ProblemDefinition& problem, const MdpState& state, Trajectory& trajectory) {
    if (!state.terminal()) throw UsageError("close_episode on a non-terminal state");
    trajectory.terminal_cost = problem.verify(state.graph(), state.labeling().assignment()).cost;
    trajectory.episode_return = -trajectory.terminal_cost.value();
}

Trajectory rollout_with_ordering(const ProblemDefinition& problem, const Graph& g,
                                 std::span<const NodeId> order) {
    const int n = g.node_count();
    if (static_cast<int>(order.size()) != n) throw UsageError("ordering is not a permutation");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (NodeId v : order) {
        if (v < 0 || v >= n || seen[v]) throw UsageError("ordering is not a permutation");
        seen[v] = 1;
    }
    MdpState state(g);
    Trajectory traj;
    for (NodeId v : order) {
        if (apply_completion(problem, state, traj)) break;
        const Label l = problem.label_rule(state, v);
        state.apply(problem, v, l);
        traj.steps.push_back({v, l, 0.0});
        ++traj.policy_steps;
    }
    apply_completion(problem, state, traj);
    close_episode(problem, state, traj);
    return traj;
}

Verification verify_and_cost(const ProblemDefinition& problem, const Graph& g,
                             std::span<const Label> labels) {
    return problem.verify(g, labels);
}

nlohmann::json labeling_to_json(std::string_view problem, std::span<const Label> labels, const Cost& cost) {
    return nlohmann::json{{"problem", std::string(problem)},
                          {"labels", std::vector<Label>(labels.begin(), labels.end())},
                          {"cost", cost.to_json()}};
}

}  // namespace nodelab
