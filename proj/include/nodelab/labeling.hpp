#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nodelab/graph.hpp"

namespace nodelab {

using Label = int;
inline constexpr Label kUnlabeled = -1;

/// Cost of a labeling. Infeasible labelings carry a distinguished infinite
/// sentinel that orders after every finite cost and never enters arithmetic.
class Cost {
public:
    static Cost finite(double value) { return Cost(value, false); }
    static Cost infeasible() { return Cost(0.0, true); }

    bool is_finite() const noexcept { return !infinite_; }
    // Throws UsageError on the infinite sentinel.
    double value() const;

    std::partial_ordering operator<=>(const Cost& other) const noexcept;
    bool operator==(const Cost& other) const noexcept {
        return infinite_ == other.infinite_ && (infinite_ || value_ == other.value_);
    }

    std::string to_string() const;
    nlohmann::json to_json() const;  // number, or the string "inf"

private:
    Cost(double value, bool infinite) : value_(value), infinite_(infinite) {}
    double value_;
    bool infinite_;
};

/// Partial node labeling c': V' -> {0..n} plus the incremental bookkeeping the
/// extensibility tests and label rules need (inverse image, per-node counts of
/// labeled and label-1 neighbors, edge coverage counters). Every update costs
/// O(degree(v)) plus the sorted insertion into the label class.
class PartialLabeling {
public:
    explicit PartialLabeling(const Graph& g);

    // Rebuilds all bookkeeping from scratch; kUnlabeled marks unlabeled nodes.
    static PartialLabeling from_assignment(const Graph& g, std::span<const Label> assignment);

    const Graph& graph() const noexcept { return *graph_; }
    int node_count() const noexcept { return graph_->node_count(); }

    Label label_of(NodeId v) const { return assignment_[v]; }
    bool is_labeled(NodeId v) const { return assignment_[v] != kUnlabeled; }
    std::span<const Label> assignment() const noexcept { return assignment_; }
    int labeled_count() const noexcept { return labeled_count_; }
    bool complete() const noexcept { return labeled_count_ == node_count(); }
    std::vector<NodeId> labeled_nodes() const;

    // Nodes carrying label l, ascending.
    std::span<const NodeId> label_class(Label l) const { return classes_[l]; }
    int distinct_label_count() const noexcept { return distinct_; }

    int labeled_neighbor_count(NodeId v) const { return labeled_neighbors_[v]; }
    int ones_neighbor_count(NodeId v) const { return ones_neighbors_[v]; }
    // Edges of G with at least one endpoint labeled 1.
    std::size_t covered_edge_count() const noexcept { return covered_edges_; }
    bool covers_all_edges() const noexcept { return covered_edges_ == graph_->edge_count(); }
    // Edges inside V' whose endpoints are both 0, resp. both 1.
    std::size_t zero_zero_edges() const noexcept { return zero_zero_edges_; }
    std::size_t one_one_edges() const noexcept { return one_one_edges_; }

    // Records c'(v) = l without any feasibility check. Throws UsageError when v
    // is already labeled or l lies outside {0..n}.
    void assign(NodeId v, Label l);

    bool operator==(const PartialLabeling& other) const;

private:
    const Graph* graph_;
    std::vector<Label> assignment_;
    int labeled_count_ = 0;
    std::vector<std::vector<NodeId>> classes_;
    int distinct_ = 0;
    std::vector<int> labeled_neighbors_;
    std::vector<int> ones_neighbors_;
    std::size_t covered_edges_ = 0;
    std::size_t zero_zero_edges_ = 0;
    std::size_t one_one_edges_ = 0;
};

struct Action {
    NodeId node = 0;
    Label label = 0;

    bool operator==(const Action&) const = default;
};

class ProblemDefinition;

/// Decision-process state: a partial labeling plus the ordered action history
/// (step = history length, last action = its back). Holds a non-owning
/// reference to the graph, which must outlive the state.
class MdpState {
public:
    explicit MdpState(const Graph& g) : labeling_(g) {}

    const Graph& graph() const noexcept { return labeling_.graph(); }
    const PartialLabeling& labeling() const noexcept { return labeling_; }
    const std::vector<Action>& history() const noexcept { return history_; }
    int step() const noexcept { return static_cast<int>(history_.size()); }
    std::optional<Action> last_action() const {
        if (history_.empty()) return std::nullopt;
        return history_.back();
    }
    bool terminal() const noexcept { return labeling_.complete(); }

    // In-place transition. Throws UsageError if v is already labeled and
    // IllegalActionError if (v, l) fails the problem's extensibility test.
    void apply(const ProblemDefinition& problem, NodeId v, Label l);

private:
    PartialLabeling labeling_;
    std::vector<Action> history_;
};

struct Verification {
    bool feasible = false;
    Cost cost = Cost::infeasible();
};

/// One combinatorial node-labeling problem: an extensibility test, a label
/// rule, and a cost function over complete labelings.
class ProblemDefinition {
public:
    virtual ~ProblemDefinition() = default;

    virtual std::string_view name() const = 0;

    // Extensibility test for an unlabeled v.
    virtual bool extensible(const PartialLabeling& labeling, NodeId v, Label l) const = 0;

    // Label the rule assigns to unlabeled v; always passes the test.
    virtual Label label_rule(const MdpState& state, NodeId v) const = 0;

    // Feasibility and cost of a complete labeling; infeasible -> Cost::infeasible().
    virtual Verification verify(const Graph& g, std::span<const Label> labels) const = 0;

    // Labels worth trying for an unlabeled node (a superset of the legal ones).
    virtual std::vector<Label> candidate_labels(const PartialLabeling& labeling) const = 0;

    // When set, every remaining node may be given this label in one bulk step
    // because the order of the rest no longer matters.
    virtual std::optional<Label> completion_label(const MdpState&) const { return std::nullopt; }
};

const ProblemDefinition& graph_coloring();
const ProblemDefinition& min_vertex_cover();
const ProblemDefinition& max_independent_set();

// "gc", "mvc", "mis" (also the long names). Throws ParameterError.
const ProblemDefinition& problem_by_name(std::string_view name);

// Throws UsageError when v is already labeled.
bool extensibility_test(const ProblemDefinition& problem, const PartialLabeling& labeling, NodeId v,
                        Label l);

Label label_rule(const ProblemDefinition& problem, const MdpState& state, NodeId v);

MdpState apply_action(const ProblemDefinition& problem, const MdpState& state, NodeId v, Label l);

struct TrajectoryStep {
    NodeId node = 0;
    Label label = 0;
    double log_probability = 0.0;

    bool operator==(const TrajectoryStep&) const = default;
};

/// One episode. The first `policy_steps` entries were chosen by the ordering
/// (or policy); any further entries are the bulk completion, ascending by id,
/// with log-probability 0.
struct Trajectory {
    std::vector<TrajectoryStep> steps;
    std::size_t policy_steps = 0;
    Cost terminal_cost = Cost::infeasible();
    double episode_return = 0.0;

    std::vector<Label> labels(int node_count) const;
    double total_log_probability() const;

    bool operator==(const Trajectory&) const = default;
};

// If the problem offers a completion label for `state`, labels every
// remaining node with it (ascending ids) and records the steps. Returns
// whether the state is terminal afterwards.
bool apply_completion(const ProblemDefinition& problem, MdpState& state, Trajectory& trajectory);

// Fills in terminal cost and return; `state` must be terminal.
void close_episode(const ProblemDefinition& problem, const MdpState& state, Trajectory& trajectory);

// Applies the label rule along `order`. Throws UsageError unless `order` is a
// permutation of 0..n-1.
Trajectory rollout_with_ordering(const ProblemDefinition& problem, const Graph& g,
                                 std::span<const NodeId> order);

// Throws UsageError when some node is unlabeled.
Verification verify_and_cost(const ProblemDefinition& problem, const Graph& g,
                             std::span<const Label> labels);

// {"problem": name, "labels": [...], "cost": number | "inf"}
nlohmann::json labeling_to_json(std::string_view problem, std::span<const Label> labels, const Cost& cost);

}  // namespace nodelab
