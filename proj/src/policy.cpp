#include "nodelab/policy.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "nodelab/errors.hpp"

namespace nodelab {

namespace {

std::vector<std::size_t> as_rows(std::span<const NodeId> nodes) {
    return {nodes.begin(), nodes.end()};
}

Tensor broadcast_rows(const Tensor& row, std::size_t n) {
    std::vector<std::size_t> zeros(n, 0);
    return gather_rows(row, zeros);
}

Var broadcast_rows(Var row, std::size_t n) {
    std::vector<std::size_t> zeros(n, 0);
    return gather_rows(row, zeros);
}

Tensor uniform_tensor(std::size_t rows, std::size_t cols, double fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(fan_in);
    Tensor t(rows, cols);
    for (double& v : t.values()) v = -bound + 2.0 * bound * rng.uniform();
    return t;
}

void check_features(const Tensor& x, const Graph& g, const PolicyHyper& hyper) {
    if (x.rows() != static_cast<std::size_t>(g.node_count()) || x.cols() != static_cast<std::size_t>(hyper.d_in))
        throw ShapeError("features of shape " + x.shape_string() + " for a " + std::to_string(g.node_count()) +
                         "-node graph with d_in = " + std::to_string(hyper.d_in));
}

// Running per-label maxima so each context costs O(K d).
class ContextBuilder {
public:
    ContextBuilder(const Tensor& embeddings, const ModelParameters& params)
        : h_(embeddings), params_(params), graph_max_(max_rows(embeddings)),
          label_max_(static_cast<std::size_t>(embeddings.rows()) + 1) {}

    void add(NodeId v, Label l) {
        Tensor& m = label_max_[static_cast<std::size_t>(l)];
        auto row = h_.row_span(static_cast<std::size_t>(v));
        if (m.empty()) {
            m = Tensor::row({row.begin(), row.end()});
            return;
        }
        for (std::size_t j = 0; j < m.size(); ++j)
            if (row[j] > m[j]) m[j] = row[j];
        count_comparisons(m.size());
    }

    Tensor build(const MdpState& state) const {
        const std::size_t d = static_cast<std::size_t>(params_.hyper.d);
        std::vector<Tensor> parts{graph_max_};
        const auto& history = state.history();
        for (int i = 0; i < params_.hyper.context_size; ++i) {
            const int idx = state.step() - 1 - i;
            if (idx >= 0) {
                const Action a = history[static_cast<std::size_t>(idx)];
                const std::size_t row = static_cast<std::size_t>(a.node);
                parts.push_back(gather_rows(h_, std::span<const std::size_t>(&row, 1)));
                parts.push_back(label_max_[static_cast<std::size_t>(a.label)]);
            } else {
                const std::size_t at = 2 * d * static_cast<std::size_t>(i);
                parts.push_back(slice_cols(params_.h0, at, at + 2 * d));
            }
        }
        return concat_cols(parts);
    }

private:
    const Tensor& h_;
    const ModelParameters& params_;
    Tensor graph_max_;
    std::vector<Tensor> label_max_;
};

NodeId argmax_unmasked(const DecoderState& dec) {
    NodeId best = -1;
    std::uint64_t compared = 0;
    for (std::size_t v = 0; v < dec.attention.size(); ++v) {
        if (dec.masked[v]) continue;
        if (best < 0) {
            best = static_cast<NodeId>(v);
            continue;
        }
        ++compared;
        if (dec.attention[v] > dec.attention[static_cast<std::size_t>(best)]) best = static_cast<NodeId>(v);
    }
    count_comparisons(compared);
    return best;
}

NodeId draw_unmasked(const DecoderState& dec, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    NodeId last = -1;
    for (std::size_t v = 0; v < dec.probabilities.size(); ++v) {
        if (dec.masked[v]) continue;
        acc += dec.probabilities[v];
        last = static_cast<NodeId>(v);
        if (u < acc) return last;
    }
    return last;
}

Trajectory run_episode(const ProblemDefinition& problem, const Graph& g, const Tensor& embeddings,
                       const ModelParameters& params, const RolloutOptions& options, Rng* rng) {
    if (embeddings.rows() != static_cast<std::size_t>(g.node_count()) ||
        embeddings.cols() != static_cast<std::size_t>(params.hyper.d))
        throw ShapeError("embeddings of shape " + embeddings.shape_string() + " for a " +
                         std::to_string(g.node_count()) + "-node graph");
    const DecodeMode mode = options.mode.value_or(params.hyper.decode_mode);
    const bool need_probabilities = rng != nullptr || options.track_log_probabilities;
    MdpState state(g);
    Trajectory traj;
    DecoderState decoder;
    ContextBuilder context(embeddings, params);
    while (!apply_completion(problem, state, traj)) {
        advance_decoder(decoder, state, embeddings, context.build(state), params, mode,
                        {options.refresh_all, need_probabilities});
        const NodeId v = rng ? draw_unmasked(decoder, *rng) : argmax_unmasked(decoder);
        const double log_p = need_probabilities ? std::log(decoder.probabilities[static_cast<std::size_t>(v)]) : 0.0;
        const Label l = problem.label_rule(state, v);
        state.apply(problem, v, l);
        traj.steps.push_back({v, l, log_p});
        ++traj.policy_steps;
        context.add(v, l);
    }
    close_episode(problem, state, traj);
    return traj;
}

template <typename T>
std::vector<std::pair<std::string, T*>> collect(T& input_weight, T& input_bias, auto& layers, T& theta1, T& theta2,
                                                T& h0, bool running) {
    std::vector<std::pair<std::string, T*>> out{{"input.weight", &input_weight}, {"input.bias", &input_bias}};
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& layer = layers[l];
        const std::string prefix = "layer" + std::to_string(l) + ".";
        for (std::size_t h = 0; h < layer.head_weight.size(); ++h) {
            out.push_back({prefix + "head" + std::to_string(h) + ".weight", &layer.head_weight[h]});
            out.push_back({prefix + "head" + std::to_string(h) + ".attention", &layer.head_attention[h]});
        }
        out.push_back({prefix + "norm.gamma", &layer.gamma});
        out.push_back({prefix + "norm.beta", &layer.beta});
        if (running) {
            out.push_back({prefix + "norm.running_mean", &layer.running_mean});
            out.push_back({prefix + "norm.running_var", &layer.running_var});
        }
    }
    out.push_back({"theta1", &theta1});
    out.push_back({"theta2", &theta2});
    out.push_back({"h0", &h0});
    return out;
}

}  // namespace

std::string_view decode_mode_name(DecodeMode mode) {
    switch (mode) {
        case DecodeMode::Local: return "local";
        case DecodeMode::Static: return "static";
        case DecodeMode::Global: return "global";
    }
    return "local";
}

DecodeMode parse_decode_mode(std::string_view name) {
    if (name == "local") return DecodeMode::Local;
    if (name == "static") return DecodeMode::Static;
    if (name == "global") return DecodeMode::Global;
    throw ParameterError("unknown decode mode '" + std::string(name) + "'");
}

void PolicyHyper::validate() const {
    if (d <= 0 || d % kAttentionHeads != 0)
        throw ParameterError("embedding width d must be a positive multiple of " + std::to_string(kAttentionHeads));
    if (d_in < 2 || d_in % 2 != 0) throw ParameterError("feature width d_in must be even and >= 2");
    if (context_size < 1) throw ParameterError("context size K must be >= 1");
    if (!(clip > 0.0)) throw ParameterError("clip C must be positive");
}

void to_json(nlohmann::json& j, const PolicyHyper& h) {
    j = {{"d", h.d},
         {"d_in", h.d_in},
         {"context_size", h.context_size},
         {"clip", h.clip},
         {"decode_mode", std::string(decode_mode_name(h.decode_mode))},
         {"subtract_mean_degree", h.subtract_mean_degree}};
}

void from_json(const nlohmann::json& j, PolicyHyper& h) {
    PolicyHyper out;
    out.d = j.value("d", out.d);
    out.d_in = j.value("d_in", out.d_in);
    out.context_size = j.value("context_size", out.context_size);
    out.clip = j.value("clip", out.clip);
    if (j.contains("decode_mode")) out.decode_mode = parse_decode_mode(j.at("decode_mode").get<std::string>());
    out.subtract_mean_degree = j.value("subtract_mean_degree", out.subtract_mean_degree);
    out.validate();
    h = out;
}

ModelParameters ModelParameters::initialize(const PolicyHyper& hyper, std::uint64_t seed) {
    hyper.validate();
    const std::size_t d = static_cast<std::size_t>(hyper.d), d_in = static_cast<std::size_t>(hyper.d_in);
    const std::size_t head = d / kAttentionHeads, k = static_cast<std::size_t>(hyper.context_size);
    Rng rng(seed);
    ModelParameters p;
    p.hyper = hyper;
    p.input_weight = uniform_tensor(d_in, d, static_cast<double>(d_in), rng);
    p.input_bias = uniform_tensor(1, d, static_cast<double>(d_in), rng);
    for (int l = 0; l < kEncoderLayers; ++l) {
        EncoderLayer layer;
        for (int h = 0; h < kAttentionHeads; ++h) {
            layer.head_weight.push_back(uniform_tensor(d, head, static_cast<double>(d), rng));
            layer.head_attention.push_back(uniform_tensor(1, 2 * head, static_cast<double>(2 * head), rng));
        }
        layer.gamma = Tensor(1, d, 1.0);
        layer.beta = Tensor(1, d, 0.0);
        layer.running_mean = Tensor(1, d, 0.0);
        layer.running_var = Tensor(1, d, 1.0);
        p.layers.push_back(std::move(layer));
    }
    p.theta1 = uniform_tensor(d, (2 * k + 1) * d, static_cast<double>((2 * k + 1) * d), rng);
    p.theta2 = uniform_tensor(d, d, static_cast<double>(d), rng);
    p.h0 = uniform_tensor(1, 2 * k * d, static_cast<double>(d), rng);
    return p;
}

std::vector<std::pair<std::string, Tensor*>> ModelParameters::tensors(bool include_running_stats) {
    return collect<Tensor>(input_weight, input_bias, layers, theta1, theta2, h0, include_running_stats);
}

std::vector<std::pair<std::string, const Tensor*>> ModelParameters::tensors(bool include_running_stats) const {
    return collect<const Tensor>(input_weight, input_bias, layers, theta1, theta2, h0, include_running_stats);
}

std::vector<Tensor*> ModelParameters::strip(const std::vector<std::pair<std::string, Tensor*>>& named) {
    std::vector<Tensor*> out;
    for (const auto& [name, t] : named) out.push_back(t);
    return out;
}

Tensor to_tensor(const FeatureMatrix& x) { return Tensor(x.rows, x.cols, x.values); }

Tensor policy_features(const Graph& g, const PolicyHyper& hyper) {
    return to_tensor(degree_features(g, hyper.d_in, hyper.subtract_mean_degree));
}

Tensor batch_features(std::span<const Graph> graphs, const PolicyHyper& hyper) {
    std::vector<double> values;
    std::size_t rows = 0;
    for (const Graph& g : graphs) {
        FeatureMatrix x = degree_features(g, hyper.d_in, hyper.subtract_mean_degree);
        values.insert(values.end(), x.values.begin(), x.values.end());
        rows += x.rows;
    }
    return Tensor(rows, static_cast<std::size_t>(hyper.d_in), std::move(values));
}

Tensor encode(const Graph& g, const Tensor& x, const ModelParameters& params, EncoderMode mode,
              std::vector<BatchStatistics>* stats) {
    check_features(x, g, params.hyper);
    const std::size_t n = x.rows();
    if (stats) stats->clear();
    Tensor h = add(matmul(x, params.input_weight), broadcast_rows(params.input_bias, n));
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const EncoderLayer& layer = params.layers[l];
        std::vector<Tensor> heads;
        for (std::size_t k = 0; k < layer.head_weight.size(); ++k)
            heads.push_back(graph_attention(matmul(h, layer.head_weight[k]), layer.head_attention[k], g));
        Tensor pre = add(h, concat_cols(heads));
        if (mode == EncoderMode::Train) {
            BatchStatistics s;
            h = batch_norm_train(pre, layer.gamma, layer.beta, &s);
            if (stats) stats->push_back(std::move(s));
        } else {
            h = batch_norm_eval(pre, layer.gamma, layer.beta, layer.running_mean, layer.running_var);
        }
        if (l + 1 < params.layers.size()) h = leaky_relu(h);
    }
    return h;
}

Tensor encode(const Graph& g, const ModelParameters& params, EncoderMode mode) {
    return encode(g, policy_features(g, params.hyper), params, mode);
}

void update_running_statistics(ModelParameters& params, const std::vector<BatchStatistics>& stats,
                               std::size_t batch_rows) {
    if (stats.size() != params.layers.size()) throw UsageError("one batch statistic per encoder layer expected");
    for (std::size_t l = 0; l < stats.size(); ++l)
        update_running_statistics(params.layers[l].running_mean, params.layers[l].running_var, stats[l], batch_rows);
}

Tensor context_embedding(const MdpState& state, const Tensor& embeddings, const ModelParameters& params) {
    const std::size_t d = static_cast<std::size_t>(params.hyper.d);
    std::vector<Tensor> parts{max_rows(embeddings)};
    for (int i = 0; i < params.hyper.context_size; ++i) {
        const int idx = state.step() - 1 - i;
        if (idx >= 0) {
            const Action a = state.history()[static_cast<std::size_t>(idx)];
            const std::size_t row = static_cast<std::size_t>(a.node);
            parts.push_back(gather_rows(embeddings, std::span<const std::size_t>(&row, 1)));
            parts.push_back(max_rows(gather_rows(embeddings, as_rows(state.labeling().label_class(a.label)))));
        } else {
            const std::size_t at = 2 * d * static_cast<std::size_t>(i);
            parts.push_back(slice_cols(params.h0, at, at + 2 * d));
        }
    }
    return concat_cols(parts);
}

std::vector<NodeId> refresh_set(const MdpState& state, DecodeMode mode, bool refresh_all) {
    const auto& labeling = state.labeling();
    std::vector<NodeId> out;
    const bool everything = state.step() == 0 || mode == DecodeMode::Global || (mode == DecodeMode::Local && refresh_all);
    if (everything) {
        for (NodeId v = 0; v < labeling.node_count(); ++v)
            if (!labeling.is_labeled(v)) out.push_back(v);
        return out;
    }
    if (mode == DecodeMode::Static) return out;
    for (NodeId u : state.graph().neighbors(state.last_action()->node))
        if (!labeling.is_labeled(u)) out.push_back(u);
    return out;
}

void advance_decoder(DecoderState& decoder, const MdpState& state, const Tensor& embeddings,
                     const Tensor& context, const ModelParameters& params, DecodeMode mode,
                     const DecodeOptions& options) {
    if (state.terminal()) throw UsageError("decode_step on a terminal state");
    const std::size_t n = static_cast<std::size_t>(state.graph().node_count());
    if (state.step() == 0) {
        decoder.attention.assign(n, 0.0);
        decoder.masked.assign(n, 0);
        decoder.started = true;
    } else if (!decoder.started || decoder.attention.size() != n) {
        throw UsageError("decoder state does not belong to this episode");
    }
    for (NodeId v : state.labeling().labeled_nodes()) decoder.masked[static_cast<std::size_t>(v)] = 1;

    decoder.refreshed = refresh_set(state, mode, options.refresh_all);
    if (!decoder.refreshed.empty()) {
        const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(params.hyper.d));
        Tensor query = matmul_nt(context, params.theta1);
        Tensor keys = matmul_nt(gather_rows(embeddings, as_rows(decoder.refreshed)), params.theta2);
        Tensor w = scale(tanh(scale(matmul_nt(keys, query), inv_sqrt_d)), params.hyper.clip);
        for (std::size_t i = 0; i < decoder.refreshed.size(); ++i)
            decoder.attention[static_cast<std::size_t>(decoder.refreshed[i])] = w[i];
    }
    if (options.compute_probabilities) {
        Tensor p = masked_softmax(Tensor(1, n, decoder.attention), decoder.masked);
        decoder.probabilities = std::move(p.values());
    } else {
        decoder.probabilities.clear();
    }
}

DecoderState decode_step(const MdpState& state, const Tensor& embeddings, const Tensor& context,
                         const DecoderState& prev, const ModelParameters& params, DecodeMode mode,
                         const DecodeOptions& options) {
    DecoderState next = prev;
    advance_decoder(next, state, embeddings, context, params, mode, options);
    return next;
}

Trajectory greedy_rollout(const ProblemDefinition& problem, const Graph& g, const ModelParameters& params,
                          const RolloutOptions& options) {
    return run_episode(problem, g, encode(g, params, EncoderMode::Eval), params, options, nullptr);
}

Trajectory greedy_rollout(const ProblemDefinition& problem, const Graph& g, const Tensor& embeddings,
                          const ModelParameters& params, const RolloutOptions& options) {
    return run_episode(problem, g, embeddings, params, options, nullptr);
}

Trajectory sample_episode(const ProblemDefinition& problem, const Graph& g, const Tensor& embeddings,
                          const ModelParameters& params, Rng& rng, const RolloutOptions& options) {
    return run_episode(problem, g, embeddings, params, options, &rng);
}

int default_sample_count(const ProblemDefinition& problem) { return problem.name() == "gc" ? 100 : 10; }

Trajectory sample_rollout(const ProblemDefinition& problem, const Graph& g, const ModelParameters& params,
                          int k, std::uint64_t seed, const RolloutOptions& options) {
    if (k < 0) throw ParameterError("sample count must be >= 0");
    Tensor h = encode(g, params, EncoderMode::Eval);
    Trajectory best = run_episode(problem, g, h, params, options, nullptr);
    Rng rng(seed);
    for (int i = 0; i < k; ++i) {
        Trajectory t = run_episode(problem, g, h, params, options, &rng);
        if (t.terminal_cost < best.terminal_cost) best = std::move(t);
    }
    return best;
}

BoundParameters bind_parameters(Tape& tape, const ModelParameters& params) {
    BoundParameters b;
    b.source = &params;
    auto bind = [&](const Tensor& t) {
        Var v = tape.variable(t);
        b.trainable.push_back(v);
        return v;
    };
    // Same order as ModelParameters::tensors(false).
    b.input_weight = bind(params.input_weight);
    b.input_bias = bind(params.input_bias);
    for (const EncoderLayer& layer : params.layers) {
        BoundParameters::Layer bl;
        for (std::size_t h = 0; h < layer.head_weight.size(); ++h) {
            bl.head_weight.push_back(bind(layer.head_weight[h]));
            bl.head_attention.push_back(bind(layer.head_attention[h]));
        }
        bl.gamma = bind(layer.gamma);
        bl.beta = bind(layer.beta);
        b.layers.push_back(std::move(bl));
    }
    b.theta1 = bind(params.theta1);
    b.theta2 = bind(params.theta2);
    b.h0 = bind(params.h0);
    return b;
}

BoundParameters bind_parameters(const ModelParameters& params, std::span<const Var> trainable) {
    std::size_t next = 0;
    const std::size_t expected = const_cast<ModelParameters&>(params).trainable().size();
    if (trainable.size() != expected)
        throw UsageError("expected " + std::to_string(expected) + " trainable variables, got " +
                         std::to_string(trainable.size()));
    BoundParameters b;
    b.source = &params;
    b.trainable.assign(trainable.begin(), trainable.end());
    auto take = [&] { return trainable[next++]; };
    b.input_weight = take();
    b.input_bias = take();
    for (const EncoderLayer& layer : params.layers) {
        BoundParameters::Layer bl;
        for (std::size_t h = 0; h < layer.head_weight.size(); ++h) {
            bl.head_weight.push_back(take());
            bl.head_attention.push_back(take());
        }
        bl.gamma = take();
        bl.beta = take();
        b.layers.push_back(std::move(bl));
    }
    b.theta1 = take();
    b.theta2 = take();
    b.h0 = take();
    return b;
}

Var encode(Tape& tape, const BoundParameters& params, const Graph& g, const Tensor& x, EncoderMode mode) {
    check_features(x, g, params.source->hyper);
    const std::size_t n = x.rows();
    Var h = add(matmul(tape.constant(x), params.input_weight), broadcast_rows(params.input_bias, n));
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        std::vector<Var> heads;
        for (std::size_t k = 0; k < layer.head_weight.size(); ++k)
            heads.push_back(graph_attention(matmul(h, layer.head_weight[k]), layer.head_attention[k], g));
        Var pre = add(h, concat_cols(heads));
        if (mode == EncoderMode::Train) {
            h = batch_norm_train(pre, layer.gamma, layer.beta);
        } else {
            const EncoderLayer& src = params.source->layers[l];
            h = batch_norm_eval(pre, layer.gamma, layer.beta, src.running_mean, src.running_var);
        }
        if (l + 1 < params.layers.size()) h = leaky_relu(h);
    }
    return h;
}

Var trajectory_log_probability(Tape& tape, const BoundParameters& params, const ProblemDefinition& problem,
                               const Graph& g, Var embeddings, const Trajectory& trajectory, DecodeMode mode,
                               bool refresh_all) {
    const ModelParameters& src = *params.source;
    const std::size_t n = static_cast<std::size_t>(g.node_count());
    const std::size_t d = static_cast<std::size_t>(src.hyper.d);
    if (embeddings.rows() != n || embeddings.cols() != d)
        throw ShapeError("embeddings of shape " + embeddings.value().shape_string() + " for a " +
                         std::to_string(n) + "-node graph");
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    MdpState state(g);
    Var graph_max = max_rows(embeddings);
    std::vector<std::optional<EntryRef>> current(n);
    std::vector<std::uint8_t> masked(n, 0);
    std::optional<Var> total;
    for (std::size_t i = 0; i < trajectory.policy_steps; ++i) {
        const TrajectoryStep& step = trajectory.steps[i];
        std::vector<NodeId> refresh = refresh_set(state, mode, refresh_all);
        if (!refresh.empty()) {
            std::vector<Var> parts{graph_max};
            for (int k = 0; k < src.hyper.context_size; ++k) {
                const int idx = state.step() - 1 - k;
                if (idx >= 0) {
                    const Action a = state.history()[static_cast<std::size_t>(idx)];
                    const std::size_t row = static_cast<std::size_t>(a.node);
                    parts.push_back(gather_rows(embeddings, std::span<const std::size_t>(&row, 1)));
                    parts.push_back(max_rows(gather_rows(embeddings, as_rows(state.labeling().label_class(a.label)))));
                } else {
                    const std::size_t at = 2 * d * static_cast<std::size_t>(k);
                    parts.push_back(slice_cols(params.h0, at, at + 2 * d));
                }
            }
            Var query = matmul_nt(concat_cols(parts), params.theta1);
            Var keys = matmul_nt(gather_rows(embeddings, as_rows(refresh)), params.theta2);
            Var w = scale(tanh(scale(matmul_nt(keys, query), inv_sqrt_d)), src.hyper.clip);
            for (std::size_t j = 0; j < refresh.size(); ++j)
                current[static_cast<std::size_t>(refresh[j])] = EntryRef{w, j, 0};
        }
        std::vector<std::optional<EntryRef>> entries(n);
        for (std::size_t v = 0; v < n; ++v) {
            masked[v] = state.labeling().is_labeled(static_cast<NodeId>(v)) ? 1 : 0;
            if (!masked[v]) entries[v] = current[v];
        }
        Var probabilities = masked_softmax(stitch(tape, entries), masked);
        Var log_p = log(element(probabilities, 0, static_cast<std::size_t>(step.node)));
        total = total ? add(*total, log_p) : log_p;
        state.apply(problem, step.node, step.label);
    }
    return total ? *total : tape.constant(Tensor::scalar(0.0));
}

nlohmann::json checkpoint_to_json(const ModelParameters& params) {
    nlohmann::json tensors = nlohmann::json::object();
    for (const auto& [name, t] : params.tensors()) {
        tensors[name] = {{"shape", {t->rows(), t->cols()}}, {"data", t->values()}};
    }
    return {{"format_version", kCheckpointVersion}, {"hyper", params.hyper}, {"tensors", tensors}};
}

ModelParameters checkpoint_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("format_version")) throw LoadError("checkpoint: missing format_version");
    if (doc.at("format_version") != kCheckpointVersion)
        throw LoadError("checkpoint: unsupported format_version " + doc.at("format_version").dump());
    PolicyHyper hyper;
    try {
        hyper = doc.at("hyper").get<PolicyHyper>();
    } catch (const std::exception& e) {
        throw LoadError(std::string("checkpoint: bad hyper block: ") + e.what());
    }
    ModelParameters params = ModelParameters::initialize(hyper, 0);
    if (!doc.contains("tensors") || !doc.at("tensors").is_object()) throw LoadError("checkpoint: missing tensors");
    const auto& stored = doc.at("tensors");
    auto named = params.tensors();
    for (auto& [name, t] : named) {
        if (!stored.contains(name)) throw LoadError("checkpoint: missing tensor '" + name + "'");
        const auto& entry = stored.at(name);
        try {
            auto shape = entry.at("shape").get<std::vector<std::size_t>>();
            if (shape.size() != 2 || shape[0] != t->rows() || shape[1] != t->cols())
                throw LoadError("checkpoint: tensor '" + name + "' has shape " + entry.at("shape").dump() +
                                ", expected [" + std::to_string(t->rows()) + "," + std::to_string(t->cols()) + "]");
            auto data = entry.at("data").get<std::vector<double>>();
            if (data.size() != t->size())
                throw LoadError("checkpoint: tensor '" + name + "' holds " + std::to_string(data.size()) +
                                " values, expected " + std::to_string(t->size()));
            t->values() = std::move(data);
        } catch (const LoadError&) {
            throw;
        } catch (const std::exception& e) {
            throw LoadError("checkpoint: tensor '" + name + "': " + e.what());
        }
    }
    if (stored.size() != named.size()) {
        for (const auto& [key, value] : stored.items()) {
            bool known = false;
            for (const auto& [name, t] : named) known = known || name == key;
            if (!known) throw LoadError("checkpoint: unexpected tensor '" + key + "'");
        }
    }
    return params;
}

std::string save_checkpoint(const ModelParameters& params) { return checkpoint_to_json(params).dump() + "\n"; }

ModelParameters load_checkpoint(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw LoadError(std::string("checkpoint: ") + e.what());
    }
    return checkpoint_from_json(doc);
}

void save_checkpoint_file(const std::filesystem::path& path, const ModelParameters& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write checkpoint " + path.string());
    out << save_checkpoint(params);
}

ModelParameters load_checkpoint_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot read checkpoint " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return load_checkpoint(buffer.str());
}

}  // namespace nodelab
