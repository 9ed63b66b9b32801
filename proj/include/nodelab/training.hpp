#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nodelab/generators.hpp"
#include "nodelab/labeling.hpp"
#include "nodelab/policy.hpp"

namespace nodelab {

struct TrainConfig {
    std::string problem = "gc";
    PolicyHyper hyper;
    int epochs = 200;
    int batch_size = 64;  // graphs per node count per batch
    std::vector<int> node_counts{20, 40, 50, 70, 100};
    int dataset_size = 20000;  // fixed for the run, split evenly over node counts
    int challenge_size = 256;
    double learning_rate = 1e-4;
    double grad_clip = 1.0;
    double t_test_alpha = 0.05;
    // Graph i of each node count uses template i mod size; n and seed are overwritten.
    std::vector<GeneratorSpec> families{{.family = GraphFamily::SER}, {.family = GraphFamily::WS},
                                        {.family = GraphFamily::BA}};
    std::uint64_t seed = 0;

    int effective_batch() const { return batch_size * static_cast<int>(node_counts.size()); }
    // Throws ParameterError.
    void validate() const;
};
void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

// Training mixes offered by name: "gc" (SER + WS + BA), "mvc-er", "mvc-ba",
// "mvc-er-ba"; throws ParameterError otherwise.
std::vector<GeneratorSpec> family_preset(std::string_view name);

/// Adam with bias correction.
struct OptimizerState {
    std::vector<Tensor> first, second;  // same shapes as the trainable tensors
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static OptimizerState for_parameters(const ModelParameters& params);
};

double global_norm(std::span<const Tensor> grads);
// Rescales to norm `max_norm` when above it; returns the norm before clipping.
double clip_gradients(std::span<Tensor> grads, double max_norm);
// Throws ShapeError when shapes disagree with the optimizer state.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, OptimizerState& opt,
               double learning_rate);

// P(T <= t) for Student's t with `dof` degrees of freedom, through the
// regularized incomplete beta function evaluated by continued fraction.
double student_t_cdf(double t, double dof);
double regularized_incomplete_beta(double a, double b, double x);

/// One-sided paired t-test for mean(candidate - baseline) < 0. Returns 0.5
/// when every difference is zero. Throws UsageError on unequal lengths or
/// fewer than two pairs.
double paired_t_test(std::span<const double> candidate, std::span<const double> baseline);

struct BatchReport {
    double mean_cost = 0.0;           // sampled rollouts under theta
    double mean_baseline_cost = 0.0;  // greedy rollouts under theta_BL
    double loss = 0.0;
    double grad_norm = 0.0;           // before clipping
    std::size_t graphs = 0;
};

/// One REINFORCE step over a batch grouped by node count. Each group is
/// encoded as one disjoint union, so batch statistics span the group.
/// Gradients of all groups are accumulated before a single clipped Adam step.
/// Throws NumericError on a non-finite loss or gradient.
BatchReport reinforce_batch_update(ModelParameters& params, const ModelParameters& baseline,
                                   const ProblemDefinition& problem, std::span<const std::vector<Graph>> groups,
                                   OptimizerState& opt, const TrainConfig& cfg, Rng& rng);

struct EpochRecord {
    int epoch = 0;
    double train_cost = 0.0;
    double challenge_cost = 0.0;
    double baseline_cost = 0.0;
    double p_value = 0.5;
    bool swapped = false;

    bool operator==(const EpochRecord&) const = default;
};
void to_json(nlohmann::json& j, const EpochRecord& r);

struct TrainResult {
    ModelParameters params;
    ModelParameters baseline;
    std::vector<EpochRecord> log;
};

using EpochCallback = std::function<void(const EpochRecord&, const ModelParameters&)>;

/// Full run: fixed training set, per-epoch batches, challenge test and
/// baseline replacement. Writes one JSON line per epoch to `log` if given.
TrainResult train(const TrainConfig& cfg, std::ostream* log = nullptr, const EpochCallback& on_epoch = {});
TrainResult train(const TrainConfig& cfg, ModelParameters initial, std::ostream* log = nullptr,
                  const EpochCallback& on_epoch = {});

// Graphs of one node count drawn like the training set; `stream` separates
// training, challenge and validation draws.
std::vector<Graph> sample_graphs(const TrainConfig& cfg, int n, int count, std::uint64_t stream);

// Greedy costs under `params` (eval mode), one per graph.
std::vector<double> greedy_costs(const ProblemDefinition& problem, std::span<const Graph> graphs,
                                 const ModelParameters& params);

}  // namespace nodelab
