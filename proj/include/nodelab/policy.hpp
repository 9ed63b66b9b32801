#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nodelab/autodiff.hpp"
#include "nodelab/features.hpp"
#include "nodelab/graph.hpp"
#include "nodelab/labeling.hpp"
#include "nodelab/rng.hpp"
#include "nodelab/tensor.hpp"

namespace nodelab {

enum class DecodeMode {
    Local,   // refresh only the unlabeled neighbors of the last labeled node
    Static,  // weights computed once at t = 0
    Global,  // refresh every unlabeled node at every step
};
std::string_view decode_mode_name(DecodeMode mode);
DecodeMode parse_decode_mode(std::string_view name);

enum class EncoderMode { Train, Eval };

inline constexpr int kEncoderLayers = 3;
inline constexpr int kAttentionHeads = 4;

struct PolicyHyper {
    int d = 64;
    int d_in = 32;
    int context_size = 1;  // K: number of past (node, label) pairs in the context
    double clip = 10.0;    // C in C * tanh(.)
    DecodeMode decode_mode = DecodeMode::Local;
    bool subtract_mean_degree = false;

    // Throws ParameterError (d must be a positive multiple of 4, d_in even...).
    void validate() const;
    bool operator==(const PolicyHyper&) const = default;
};
void to_json(nlohmann::json& j, const PolicyHyper& h);
void from_json(const nlohmann::json& j, PolicyHyper& h);

struct EncoderLayer {
    std::vector<Tensor> head_weight;     // d x d/4 per head
    std::vector<Tensor> head_attention;  // 1 x d/2 per head
    Tensor gamma, beta;                  // 1 x d
    Tensor running_mean, running_var;    // 1 x d, not trained by gradient

    bool operator==(const EncoderLayer&) const = default;
};

/// Every tensor of the model. Shapes: input_weight d_in x d, input_bias 1 x d,
/// theta1 d x (2K+1)d, theta2 d x d, h0 1 x 2Kd.
struct ModelParameters {
    PolicyHyper hyper;
    Tensor input_weight, input_bias;
    std::vector<EncoderLayer> layers;
    Tensor theta1, theta2, h0;

    // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per tensor; batch-norm
    // scale 1, shift 0, running mean 0, running variance 1.
    static ModelParameters initialize(const PolicyHyper& hyper, std::uint64_t seed);

    // Fixed order and names, shared by checkpoints and the optimizer.
    std::vector<std::pair<std::string, Tensor*>> tensors(bool include_running_stats = true);
    std::vector<std::pair<std::string, const Tensor*>> tensors(bool include_running_stats = true) const;
    std::vector<Tensor*> trainable() { return strip(tensors(false)); }

    bool operator==(const ModelParameters&) const = default;

private:
    static std::vector<Tensor*> strip(const std::vector<std::pair<std::string, Tensor*>>& named);
};

Tensor to_tensor(const FeatureMatrix& x);
// Degree features as configured by the hyperparameters.
Tensor policy_features(const Graph& g, const PolicyHyper& hyper);
// Per-graph features stacked in union order.
Tensor batch_features(std::span<const Graph> graphs, const PolicyHyper& hyper);

/// Three-layer multi-head graph attention encoder:
///   h = x W_in + b;  per layer  h <- BN(h + concat_heads(GAT(h W_k, a_k)))
/// with leaky ReLU between layers. Train mode normalizes with batch
/// statistics (returned through `stats`, one per layer); eval mode with the
/// running statistics.
Tensor encode(const Graph& g, const Tensor& x, const ModelParameters& params, EncoderMode mode,
              std::vector<BatchStatistics>* stats = nullptr);
Tensor encode(const Graph& g, const ModelParameters& params, EncoderMode mode = EncoderMode::Eval);
void update_running_statistics(ModelParameters& params, const std::vector<BatchStatistics>& stats,
                               std::size_t batch_rows);

/// g_t = [h_G | h_v, h_l for each of the last K actions, most recent first];
/// h_G is the max over all rows, h_l the max over the nodes currently holding
/// label l, and missing slots (t < K) come from the matching part of h0.
Tensor context_embedding(const MdpState& state, const Tensor& embeddings, const ModelParameters& params);

struct DecoderState {
    std::vector<double> attention;     // per node; entries of masked nodes are stale
    std::vector<std::uint8_t> masked;  // 1 once the node is labeled
    std::vector<double> probabilities; // masked softmax of attention, when computed
    std::vector<NodeId> refreshed;     // nodes whose weight the last step recomputed
    bool started = false;
};

struct DecodeOptions {
    bool refresh_all = false;         // local mode only: refresh every unlabeled node
    bool compute_probabilities = true;
};

// Nodes whose weights a step at `state` recomputes, ascending.
std::vector<NodeId> refresh_set(const MdpState& state, DecodeMode mode, bool refresh_all);

/// One decoder step: a_v = C tanh((Theta1 g)^T (Theta2 h_v) / sqrt(d)) for the
/// refresh set, previous values for everything else, labeled nodes masked.
/// Throws UsageError on a terminal state or an inconsistent `prev`.
DecoderState decode_step(const MdpState& state, const Tensor& embeddings, const Tensor& context,
                         const DecoderState& prev, const ModelParameters& params, DecodeMode mode,
                         const DecodeOptions& options = {});
void advance_decoder(DecoderState& decoder, const MdpState& state, const Tensor& embeddings,
                     const Tensor& context, const ModelParameters& params, DecodeMode mode,
                     const DecodeOptions& options = {});

struct RolloutOptions {
    std::optional<DecodeMode> mode;  // defaults to hyper.decode_mode
    bool track_log_probabilities = true;
    bool refresh_all = false;
};

// Highest attention weight (equivalently probability), ties to the lowest id.
Trajectory greedy_rollout(const ProblemDefinition& problem, const Graph& g, const ModelParameters& params,
                          const RolloutOptions& options = {});
Trajectory greedy_rollout(const ProblemDefinition& problem, const Graph& g, const Tensor& embeddings,
                          const ModelParameters& params, const RolloutOptions& options = {});
// One episode drawing each node with its probability.
Trajectory sample_episode(const ProblemDefinition& problem, const Graph& g, const Tensor& embeddings,
                          const ModelParameters& params, Rng& rng, const RolloutOptions& options = {});

int default_sample_count(const ProblemDefinition& problem);  // 100 for coloring, 10 otherwise

// Greedy episode plus k sampled ones; the cheapest wins, ties to the earliest.
Trajectory sample_rollout(const ProblemDefinition& problem, const Graph& g, const ModelParameters& params,
                          int k, std::uint64_t seed, const RolloutOptions& options = {});

/// Parameters placed on a tape; `trainable` follows ModelParameters::trainable().
struct BoundParameters {
    const ModelParameters* source = nullptr;
    Var input_weight, input_bias;
    struct Layer {
        std::vector<Var> head_weight, head_attention;
        Var gamma, beta;
    };
    std::vector<Layer> layers;
    Var theta1, theta2, h0;
    std::vector<Var> trainable;
};
BoundParameters bind_parameters(Tape& tape, const ModelParameters& params);
// Wraps existing variables, given in ModelParameters::trainable() order.
BoundParameters bind_parameters(const ModelParameters& params, std::span<const Var> trainable);

Var encode(Tape& tape, const BoundParameters& params, const Graph& g, const Tensor& x, EncoderMode mode);

/// Sum of log-probabilities of the policy steps of `trajectory`, recomputed on
/// the tape with the actions held fixed. `embeddings` holds the rows of g.
Var trajectory_log_probability(Tape& tape, const BoundParameters& params, const ProblemDefinition& problem,
                               const Graph& g, Var embeddings, const Trajectory& trajectory,
                               DecodeMode mode, bool refresh_all = false);

inline constexpr int kCheckpointVersion = 1;

// {"format_version": 1, "hyper": {...}, "tensors": {name: {"shape": [r, c], "data": [...]}}}
nlohmann::json checkpoint_to_json(const ModelParameters& params);
// Throws LoadError naming the offending tensor or field.
ModelParameters checkpoint_from_json(const nlohmann::json& doc);
std::string save_checkpoint(const ModelParameters& params);
ModelParameters load_checkpoint(std::string_view text);
void save_checkpoint_file(const std::filesystem::path& path, const ModelParameters& params);
ModelParameters load_checkpoint_file(const std::filesystem::path& path);

}  // namespace nodelab
