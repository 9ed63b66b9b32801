#include "nodelab/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nodelab/errors.hpp"

namespace nodelab {

namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kChallengeStream = 2;
constexpr std::uint64_t kShuffleStream = 3;

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::vector<Graph> challenge_set(const TrainConfig& cfg, std::uint64_t draw) {
    const int per_n = std::max(1, cfg.challenge_size / static_cast<int>(cfg.node_counts.size()));
    std::vector<Graph> out;
    for (int n : cfg.node_counts) {
        auto part = sample_graphs(cfg, n, per_n, derive_seed(kChallengeStream, draw));
        for (Graph& g : part) out.push_back(std::move(g));
    }
    return out;
}

bool all_finite(std::span<const Tensor> ts) {
    return std::all_of(ts.begin(), ts.end(), [](const Tensor& t) { return t.all_finite(); });
}

}  // namespace

void TrainConfig::validate() const {
    problem_by_name(problem);
    hyper.validate();
    if (epochs < 0) throw ParameterError("epochs must be >= 0");
    if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
    if (node_counts.empty()) throw ParameterError("node_counts must not be empty");
    for (int n : node_counts)
        if (n < 2) throw ParameterError("node counts must be >= 2");
    if (dataset_size < static_cast<int>(node_counts.size()))
        throw ParameterError("dataset_size must give every node count at least one graph");
    if (challenge_size < 2) throw ParameterError("challenge_size must be >= 2");
    if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
    if (!(grad_clip > 0.0)) throw ParameterError("grad_clip must be positive");
    if (!(t_test_alpha > 0.0 && t_test_alpha < 1.0)) throw ParameterError("t_test_alpha must lie in (0, 1)");
    if (families.empty()) throw ParameterError("families must not be empty");
}

std::vector<GeneratorSpec> family_preset(std::string_view name) {
    if (name == "gc")
        return {{.family = GraphFamily::SER}, {.family = GraphFamily::WS}, {.family = GraphFamily::BA}};
    if (name == "mvc-er") return {{.family = GraphFamily::ER}};
    if (name == "mvc-ba") return {{.family = GraphFamily::BA}};
    if (name == "mvc-er-ba") return {{.family = GraphFamily::ER}, {.family = GraphFamily::BA}};
    throw ParameterError("unknown family preset '" + std::string(name) + "'");
}

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
    j = {{"problem", cfg.problem},
         {"hyper", cfg.hyper},
         {"epochs", cfg.epochs},
         {"batch_size", cfg.batch_size},
         {"node_counts", cfg.node_counts},
         {"dataset_size", cfg.dataset_size},
         {"challenge_size", cfg.challenge_size},
         {"learning_rate", cfg.learning_rate},
         {"grad_clip", cfg.grad_clip},
         {"t_test_alpha", cfg.t_test_alpha},
         {"families", cfg.families},
         {"seed", cfg.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
    TrainConfig out;
    out.problem = j.value("problem", out.problem);
    if (j.contains("hyper")) out.hyper = j.at("hyper").get<PolicyHyper>();
    out.epochs = j.value("epochs", out.epochs);
    out.batch_size = j.value("batch_size", out.batch_size);
    out.node_counts = j.value("node_counts", out.node_counts);
    out.dataset_size = j.value("dataset_size", out.dataset_size);
    out.challenge_size = j.value("challenge_size", out.challenge_size);
    out.learning_rate = j.value("learning_rate", out.learning_rate);
    out.grad_clip = j.value("grad_clip", out.grad_clip);
    out.t_test_alpha = j.value("t_test_alpha", out.t_test_alpha);
    if (j.contains("families")) {
        const auto& f = j.at("families");
        out.families = f.is_string() ? family_preset(f.get<std::string>()) : f.get<std::vector<GeneratorSpec>>();
    }
    out.seed = j.value("seed", out.seed);
    out.validate();
    cfg = out;
}

OptimizerState OptimizerState::for_parameters(const ModelParameters& params) {
    OptimizerState opt;
    for (const auto& [name, t] : params.tensors(false)) {
        opt.first.emplace_back(t->rows(), t->cols());
        opt.second.emplace_back(t->rows(), t->cols());
    }
    return opt;
}

double global_norm(std::span<const Tensor> grads) {
    double total = 0.0;
    for (const Tensor& g : grads)
        for (double v : g.values()) total += v * v;
    return std::sqrt(total);
}

double clip_gradients(std::span<Tensor> grads, double max_norm) {
    const double norm = global_norm(grads);
    if (norm > max_norm) {
        const double factor = max_norm / norm;
        for (Tensor& g : grads)
            for (double& v : g.values()) v *= factor;
    }
    return norm;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, OptimizerState& opt,
               double learning_rate) {
    if (params.size() != grads.size() || params.size() != opt.first.size())
        throw ShapeError("optimizer holds " + std::to_string(opt.first.size()) + " tensors, got " +
                         std::to_string(params.size()) + " parameters and " + std::to_string(grads.size()) +
                         " gradients");
    for (std::size_t k = 0; k < params.size(); ++k)
        if (!params[k]->same_shape(grads[k]) || !params[k]->same_shape(opt.first[k]))
            throw ShapeError("optimizer tensor " + std::to_string(k) + ": parameter " + params[k]->shape_string() +
                             ", gradient " + grads[k].shape_string());
    ++opt.step;
    const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
    const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = params[k]->values();
        auto& m = opt.first[k].values();
        auto& v = opt.second[k].values();
        const auto& g = grads[k].values();
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
            v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
            p[i] -= learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + opt.epsilon);
        }
    }
}

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 500;
    constexpr double kTiny = 1e-300;
    constexpr double kTolerance = 1e-16;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kTolerance) return h;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("incomplete beta needs a, b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta needs 0 <= x <= 1");
    if (x == 0.0 || x == 1.0) return x;
    const double front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) throw DomainError("degrees of freedom must be positive");
    if (std::isnan(t)) throw DomainError("t statistic is NaN");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
    return t < 0.0 ? tail : 1.0 - tail;
}

double paired_t_test(std::span<const double> candidate, std::span<const double> baseline) {
    if (candidate.size() != baseline.size())
        throw UsageError("paired t-test on samples of sizes " + std::to_string(candidate.size()) + " and " +
                         std::to_string(baseline.size()));
    const std::size_t n = candidate.size();
    if (n < 2) throw UsageError("paired t-test needs at least two pairs");
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = candidate[i] - baseline[i];
    const double m = mean(diff);
    double ss = 0.0;
    for (double d : diff) ss += (d - m) * (d - m);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) return m == 0.0 ? 0.5 : (m < 0.0 ? 0.0 : 1.0);
    const double t = m / (sd / std::sqrt(static_cast<double>(n)));
    return student_t_cdf(t, static_cast<double>(n - 1));
}

BatchReport reinforce_batch_update(ModelParameters& params, const ModelParameters& baseline,
                                   const ProblemDefinition& problem, std::span<const std::vector<Graph>> groups,
                                   OptimizerState& opt, const TrainConfig& cfg, Rng& rng) {
    std::size_t total = 0;
    for (const auto& group : groups) total += group.size();
    if (total == 0) throw UsageError("empty training batch");
    const double inv_batch = 1.0 / static_cast<double>(total);
    const DecodeMode mode = params.hyper.decode_mode;

    std::vector<Tensor*> trainable = params.trainable();
    std::vector<Tensor> grads;
    for (Tensor* t : trainable) grads.emplace_back(t->rows(), t->cols());

    BatchReport report;
    report.graphs = total;
    for (const auto& group : groups) {
        if (group.empty()) continue;
        GraphUnion u = disjoint_union(group);
        Tensor x = batch_features(group, params.hyper);
        std::vector<BatchStatistics> stats;
        Tensor h = encode(u.graph, x, params, EncoderMode::Train, &stats);
        Tensor hb = encode(u.graph, x, baseline, EncoderMode::Eval);

        std::vector<Trajectory> sampled;
        std::vector<double> advantage;
        std::vector<std::vector<std::size_t>> rows;
        for (std::size_t i = 0; i < group.size(); ++i) {
            std::vector<std::size_t> r(static_cast<std::size_t>(u.offsets[i + 1] - u.offsets[i]));
            std::iota(r.begin(), r.end(), static_cast<std::size_t>(u.offsets[i]));
            Trajectory t = sample_episode(problem, group[i], gather_rows(h, r), params, rng);
            Trajectory b = greedy_rollout(problem, group[i], gather_rows(hb, r), baseline,
                                          {.track_log_probabilities = false});
            const double cost = t.terminal_cost.value(), base = b.terminal_cost.value();
            report.mean_cost += cost * inv_batch;
            report.mean_baseline_cost += base * inv_batch;
            advantage.push_back(cost - base);
            sampled.push_back(std::move(t));
            rows.push_back(std::move(r));
        }

        Tape tape;
        BoundParameters bound = bind_parameters(tape, params);
        Var th = encode(tape, bound, u.graph, x, EncoderMode::Train);
        std::optional<Var> loss;
        for (std::size_t i = 0; i < group.size(); ++i) {
            if (advantage[i] == 0.0) continue;  // contributes nothing to the loss or its gradient
            Var lp = trajectory_log_probability(tape, bound, problem, group[i], gather_rows(th, rows[i]), sampled[i],
                                                mode);
            Var term = scale(lp, advantage[i] * inv_batch);
            loss = loss ? add(*loss, term) : term;
        }
        if (loss) {
            const double value = loss->value().item();
            if (!std::isfinite(value)) throw NumericError("non-finite loss " + std::to_string(value));
            report.loss += value;
            tape.backward(*loss);
            for (std::size_t k = 0; k < grads.size(); ++k) grads[k] = add(grads[k], tape.gradient(bound.trainable[k]));
        }
        update_running_statistics(params, stats, static_cast<std::size_t>(u.graph.node_count()));
    }
    if (!all_finite(grads)) throw NumericError("non-finite gradient");
    report.grad_norm = clip_gradients(grads, cfg.grad_clip);
    adam_step(trainable, grads, opt, cfg.learning_rate);
    return report;
}

void to_json(nlohmann::json& j, const EpochRecord& r) {
    j = {{"epoch", r.epoch},
         {"train_cost", r.train_cost},
         {"challenge_cost", r.challenge_cost},
         {"baseline_cost", r.baseline_cost},
         {"p_value", r.p_value},
         {"swapped", r.swapped}};
}

std::vector<Graph> sample_graphs(const TrainConfig& cfg, int n, int count, std::uint64_t stream) {
    std::vector<Graph> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int i = 0; i < count; ++i) {
        GeneratorSpec spec = cfg.families[static_cast<std::size_t>(i) % cfg.families.size()];
        spec.n = n;
        spec.seed = derive_seed(cfg.seed, stream, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(i));
        out.push_back(generate_graph(spec));
    }
    return out;
}

std::vector<double> greedy_costs(const ProblemDefinition& problem, std::span<const Graph> graphs,
                                 const ModelParameters& params) {
    std::vector<double> out;
    out.reserve(graphs.size());
    for (const Graph& g : graphs)
        out.push_back(greedy_rollout(problem, g, params, {.track_log_probabilities = false}).terminal_cost.value());
    return out;
}

TrainResult train(const TrainConfig& cfg, std::ostream* log, const EpochCallback& on_epoch) {
    cfg.validate();
    return train(cfg, ModelParameters::initialize(cfg.hyper, derive_seed(cfg.seed, 0)), log, on_epoch);
}

TrainResult train(const TrainConfig& cfg, ModelParameters initial, std::ostream* log,
                  const EpochCallback& on_epoch) {
    cfg.validate();
    if (!(initial.hyper == cfg.hyper)) throw ParameterError("initial parameters do not match the configured model");
    const ProblemDefinition& problem = problem_by_name(cfg.problem);
    TrainResult result{initial, initial, {}};
    if (cfg.epochs == 0) return result;

    const int per_n = cfg.dataset_size / static_cast<int>(cfg.node_counts.size());
    std::vector<std::vector<Graph>> dataset;
    for (int n : cfg.node_counts) dataset.push_back(sample_graphs(cfg, n, per_n, kTrainStream));
    std::uint64_t challenge_draw = 0;
    std::vector<Graph> challenge = challenge_set(cfg, challenge_draw);

    OptimizerState opt = OptimizerState::for_parameters(result.params);
    Rng rollout_rng(derive_seed(cfg.seed, kTrainStream, 0xbeef));
    Rng shuffle_rng(derive_seed(cfg.seed, kShuffleStream));
    const int batches = (per_n + cfg.batch_size - 1) / cfg.batch_size;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::vector<std::vector<std::size_t>> order(dataset.size());
        for (std::size_t k = 0; k < dataset.size(); ++k) {
            order[k].resize(dataset[k].size());
            std::iota(order[k].begin(), order[k].end(), 0);
            shuffle_rng.shuffle(order[k]);
        }
        double cost_sum = 0.0;
        std::size_t cost_count = 0;
        for (int b = 0; b < batches; ++b) {
            std::vector<std::vector<Graph>> groups(dataset.size());
            for (std::size_t k = 0; k < dataset.size(); ++k) {
                const std::size_t lo = static_cast<std::size_t>(b) * static_cast<std::size_t>(cfg.batch_size);
                const std::size_t hi = std::min(order[k].size(), lo + static_cast<std::size_t>(cfg.batch_size));
                for (std::size_t i = lo; i < hi; ++i) groups[k].push_back(dataset[k][order[k][i]]);
            }
            BatchReport report;
            try {
                report = reinforce_batch_update(result.params, result.baseline, problem, groups, opt, cfg, rollout_rng);
            } catch (const NumericError& e) {
                throw NumericError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(b) + ": " +
                                   e.what());
            }
            cost_sum += report.mean_cost * static_cast<double>(report.graphs);
            cost_count += report.graphs;
        }

        std::vector<double> candidate = greedy_costs(problem, challenge, result.params);
        std::vector<double> base = greedy_costs(problem, challenge, result.baseline);
        EpochRecord record;
        record.epoch = epoch;
        record.train_cost = cost_sum / static_cast<double>(cost_count);
        record.challenge_cost = mean(candidate);
        record.baseline_cost = mean(base);
        record.p_value = paired_t_test(candidate, base);
        record.swapped = record.p_value < cfg.t_test_alpha && record.challenge_cost < record.baseline_cost;
        if (record.swapped) {
            result.baseline = result.params;
            challenge = challenge_set(cfg, ++challenge_draw);
        }
        result.log.push_back(record);
        if (log) *log << nlohmann::json(record).dump() << '\n' << std::flush;
        if (on_epoch) on_epoch(record, result.params);
    }
    return result;
}

}  // namespace nodelab
