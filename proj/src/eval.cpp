#include "nodelab/eval.hpp"

#include <glob.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "nodelab/errors.hpp"
#include "nodelab/graph_io.hpp"
#include "nodelab/heuristics.hpp"

namespace nodelab {

namespace {

bool is_policy_algorithm(const std::string& name, std::string* mode, std::string* checkpoint) {
    const auto colon = name.find(':');
    if (colon == std::string::npos) return false;
    if (mode) *mode = name.substr(0, colon);
    if (checkpoint) *checkpoint = name.substr(colon + 1);
    return true;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
    glob_t matches{};
    const int status = ::glob(pattern.c_str(), 0, nullptr, &matches);
    std::vector<std::string> out;
    if (status == 0)
        for (std::size_t i = 0; i < matches.gl_pathc; ++i) out.emplace_back(matches.gl_pathv[i]);
    globfree(&matches);
    if (status != 0 && status != GLOB_NOMATCH) throw LoadError("cannot expand dataset glob '" + pattern + "'");
    std::sort(out.begin(), out.end());
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string format_number(double v) {
    nlohmann::json j = v;
    return j.dump();
}

nlohmann::json optional_number(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

void to_json(nlohmann::json& j, const GeneratedSet& s) { j = {{"spec", s.spec}, {"count", s.count}}; }

void from_json(const nlohmann::json& j, GeneratedSet& s) {
    s.spec = j.at("spec").get<GeneratorSpec>();
    s.count = j.value("count", 1);
    if (s.count < 0) throw ParameterError("generated set count must be >= 0");
}

void ExperimentConfig::validate() const {
    const ProblemDefinition& p = problem_by_name(problem);
    if (algorithms.empty()) throw ParameterError("no algorithms to evaluate");
    for (const std::string& a : algorithms) {
        std::string mode, name;
        if (is_policy_algorithm(a, &mode, &name)) {
            if (mode != "greedy" && mode != "sample") throw ParameterError("unknown policy mode in '" + a + "'");
            if (!checkpoints.count(name)) throw ParameterError("algorithm '" + a + "' names an unknown checkpoint");
            continue;
        }
        const bool coloring = a == "dsatur" || a == "largest-first" || a == "smallest-last";
        const bool cover = a == "mvc-approx" || a == "mvc-greedy";
        if (a == "oracle") continue;
        if (!coloring && !cover) throw ParameterError("unknown algorithm '" + a + "'");
        if ((coloring && p.name() != "gc") || (cover && p.name() != "mvc"))
            throw ParameterError("algorithm '" + a + "' does not solve " + std::string(p.name()));
    }
    if (oracle_limit < 0) throw ParameterError("oracle_limit must be >= 0");
    if (oracle_budget < 1) throw ParameterError("oracle_budget must be >= 1");
}

void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
    j = {{"problem", cfg.problem},
         {"generated", cfg.generated},
         {"dataset_glob", cfg.dataset_glob},
         {"algorithms", cfg.algorithms},
         {"checkpoints", cfg.checkpoints},
         {"samples", cfg.samples},
         {"seed", cfg.seed},
         {"oracle_limit", cfg.oracle_limit},
         {"oracle_budget", cfg.oracle_budget}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
    ExperimentConfig out;
    out.problem = j.value("problem", out.problem);
    if (j.contains("generated")) out.generated = j.at("generated").get<std::vector<GeneratedSet>>();
    out.dataset_glob = j.value("dataset_glob", out.dataset_glob);
    out.algorithms = j.value("algorithms", out.algorithms);
    out.checkpoints = j.value("checkpoints", out.checkpoints);
    out.samples = j.value("samples", out.samples);
    out.seed = j.value("seed", out.seed);
    out.oracle_limit = j.value("oracle_limit", out.oracle_limit);
    out.oracle_budget = j.value("oracle_budget", out.oracle_budget);
    out.validate();
    cfg = out;
}

std::vector<Instance> load_instances(const ExperimentConfig& cfg) {
    std::vector<Instance> out;
    for (const GeneratedSet& set : cfg.generated) {
        for (int i = 0; i < set.count; ++i) {
            GeneratorSpec spec = set.spec;
            spec.seed = derive_seed(set.spec.seed, static_cast<std::uint64_t>(i));
            out.push_back({std::string(family_name(spec.family)) + "-n" + std::to_string(spec.n) + "-s" +
                               std::to_string(set.spec.seed) + "-" + std::to_string(i),
                           generate_graph(spec)});
        }
    }
    if (!cfg.dataset_glob.empty())
        for (const std::string& path : expand_glob(cfg.dataset_glob))
            out.push_back({std::filesystem::path(path).filename().string(), read_graph_file(path)});
    if (out.empty()) throw UsageError("the dataset is empty (no generated sets and no files matching the glob)");
    return out;
}

std::optional<double> approximation_ratio(double cost, double reference) {
    if (cost == 0.0 && reference == 0.0) return 1.0;
    if (cost > 0.0 && reference > 0.0) return cost / reference;
    if (cost < 0.0 && reference < 0.0) return reference / cost;
    return std::nullopt;
}

EvaluationReport evaluate(const ExperimentConfig& cfg) {
    cfg.validate();
    return evaluate(cfg, load_instances(cfg));
}

EvaluationReport evaluate(const ExperimentConfig& cfg, const std::vector<Instance>& instances) {
    cfg.validate();
    const ProblemDefinition& problem = problem_by_name(cfg.problem);
    // Checkpoints load before any instance is touched.
    std::map<std::string, ModelParameters> models;
    for (const auto& [name, path] : cfg.checkpoints) models.emplace(name, load_checkpoint_file(path));
    const int k = cfg.samples >= 0 ? cfg.samples : default_sample_count(problem);

    EvaluationReport report;
    report.problem = std::string(problem.name());
    for (std::size_t idx = 0; idx < instances.size(); ++idx) {
        const Instance& inst = instances[idx];
        const Graph& g = inst.graph;
        std::optional<OracleResult> exact;
        std::string oracle_error;
        if (g.node_count() <= cfg.oracle_limit) {
            try {
                exact = exact_optimum(problem, g, cfg.oracle_budget);
            } catch (const std::exception& e) {
                oracle_error = e.what();
            }
        } else {
            oracle_error = "instance above the oracle limit";
        }
        for (const std::string& algorithm : cfg.algorithms) {
            InstanceRecord rec;
            rec.instance = inst.id;
            rec.nodes = g.node_count();
            rec.algorithm = algorithm;
            const auto start = std::chrono::steady_clock::now();
            try {
                std::vector<Label> labels;
                std::string mode, name;
                if (is_policy_algorithm(algorithm, &mode, &name)) {
                    const ModelParameters& params = models.at(name);
                    Trajectory t = mode == "greedy"
                                       ? greedy_rollout(problem, g, params, {.track_log_probabilities = false})
                                       : sample_rollout(problem, g, params, k, derive_seed(cfg.seed, idx));
                    labels = t.labels(g.node_count());
                } else if (algorithm == "oracle") {
                    if (!exact) throw ResourceError(oracle_error, 0, 0);
                    labels = exact->witness;
                } else if (algorithm == "dsatur") {
                    labels = dsatur(g).labeling;
                } else if (algorithm == "largest-first") {
                    labels = largest_first(g).labeling;
                } else if (algorithm == "smallest-last") {
                    labels = smallest_last(g).labeling;
                } else {
                    labels = mvc_approx(g, algorithm == "mvc-greedy").labeling;
                }
                rec.wall_time = seconds_since(start);
                Verification v = verify_and_cost(problem, g, labels);
                rec.feasible = v.feasible;
                if (v.feasible) rec.cost = v.cost.value();
                else rec.error = "infeasible labeling";
                rec.labels = std::move(labels);
            } catch (const std::exception& e) {
                rec.wall_time = seconds_since(start);
                rec.error = e.what();
            }
            if (exact) {
                rec.reference = static_cast<double>(exact->optimum);
                rec.reference_exact = true;
            }
            report.records.push_back(std::move(rec));
        }
    }
    finalize_report(report);
    return report;
}

void finalize_report(EvaluationReport& report) {
    // Best-known references for instances without an exact one.
    std::map<std::string, double> best;
    for (const auto& rec : report.records)
        if (rec.cost) {
            auto [it, fresh] = best.emplace(rec.instance, *rec.cost);
            if (!fresh) it->second = std::min(it->second, *rec.cost);
        }
    std::vector<std::string> order;
    std::map<std::string, AlgorithmSummary> by_algorithm;
    std::map<std::string, std::pair<double, int>> cost_sums, ratio_sums, optimal_counts;
    std::map<std::string, int> wins;
    for (auto& rec : report.records) {
        if (!by_algorithm.count(rec.algorithm)) {
            order.push_back(rec.algorithm);
            by_algorithm[rec.algorithm].algorithm = rec.algorithm;
        }
        if (!rec.reference_exact) {
            auto it = best.find(rec.instance);
            rec.reference = it == best.end() ? std::nullopt : std::optional<double>(it->second);
        }
        rec.ratio = rec.cost && rec.reference ? approximation_ratio(*rec.cost, *rec.reference) : std::nullopt;

        AlgorithmSummary& s = by_algorithm[rec.algorithm];
        ++s.instances;
        if (rec.cost) {
            ++s.feasible;
            cost_sums[rec.algorithm].first += *rec.cost;
            ++cost_sums[rec.algorithm].second;
            if (*rec.cost == best[rec.instance]) ++wins[rec.algorithm];
        }
        if (rec.ratio) {
            ratio_sums[rec.algorithm].first += *rec.ratio;
            ++ratio_sums[rec.algorithm].second;
        }
        if (rec.reference_exact) {
            ++optimal_counts[rec.algorithm].second;
            if (rec.cost && *rec.cost == *rec.reference) optimal_counts[rec.algorithm].first += 1;
        }
    }
    report.summary.clear();
    for (const std::string& a : order) {
        AlgorithmSummary s = by_algorithm[a];
        if (cost_sums[a].second) s.mean_cost = cost_sums[a].first / cost_sums[a].second;
        if (ratio_sums[a].second) s.mean_ratio = ratio_sums[a].first / ratio_sums[a].second;
        s.wins = s.instances ? 100.0 * wins[a] / s.instances : 0.0;
        if (optimal_counts[a].second) s.optimal = 100.0 * optimal_counts[a].first / optimal_counts[a].second;
        report.summary.push_back(s);
    }
}

nlohmann::json EvaluationReport::to_json(bool include_wall_time) const {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json j = {{"instance", r.instance},
                            {"nodes", r.nodes},
                            {"algorithm", r.algorithm},
                            {"cost", optional_number(r.cost)},
                            {"feasible", r.feasible},
                            {"reference", optional_number(r.reference)},
                            {"reference_kind", r.reference ? (r.reference_exact ? "exact" : "best-known") : "none"},
                            {"ratio", optional_number(r.ratio)},
                            {"labels", r.labels}};
        if (include_wall_time) j["wall_time"] = r.wall_time;
        if (!r.error.empty()) j["error"] = r.error;
        recs.push_back(std::move(j));
    }
    nlohmann::json sums = nlohmann::json::array();
    for (const auto& s : summary)
        sums.push_back({{"algorithm", s.algorithm},
                        {"instances", s.instances},
                        {"feasible", s.feasible},
                        {"mean_cost", s.mean_cost},
                        {"mean_ratio", optional_number(s.mean_ratio)},
                        {"wins", s.wins},
                        {"optimal", optional_number(s.optimal)}});
    return {{"format", "nodelab-report"},
            {"version", kReportVersion},
            {"problem", problem},
            {"records", recs},
            {"summary", sums}};
}

void EvaluationReport::write_csv(std::ostream& out) const {
    out << "# nodelab-report v" << kReportVersion << "\n";
    out << "instance,nodes,algorithm,cost,feasible,reference,reference_kind,ratio,wall_time,error\n";
    for (const auto& r : records) {
        std::string error = r.error;
        std::replace(error.begin(), error.end(), ',', ';');
        std::replace(error.begin(), error.end(), '\n', ' ');
        out << r.instance << ',' << r.nodes << ',' << r.algorithm << ',' << (r.cost ? format_number(*r.cost) : "")
            << ',' << (r.feasible ? 1 : 0) << ',' << (r.reference ? format_number(*r.reference) : "") << ','
            << (r.reference ? (r.reference_exact ? "exact" : "best-known") : "none") << ','
            << (r.ratio ? format_number(*r.ratio) : "") << ',' << format_number(r.wall_time) << ',' << error << "\n";
    }
}

void EvaluationReport::write_summary_csv(std::ostream& out) const {
    out << "# nodelab-summary v" << kReportVersion << "\n";
    out << "algorithm,instances,feasible,mean_cost,mean_ratio,wins,optimal\n";
    for (const auto& s : summary)
        out << s.algorithm << ',' << s.instances << ',' << s.feasible << ',' << format_number(s.mean_cost) << ','
            << (s.mean_ratio ? format_number(*s.mean_ratio) : "") << ',' << format_number(s.wins) << ','
            << (s.optimal ? format_number(*s.optimal) : "") << "\n";
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw UsageError("slope fit needs at least two paired points");
    double mx = 0, my = 0;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0 && y[i] > 0)) throw DomainError("log-log fit needs positive values");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
        mx += lx.back();
        my += ly.back();
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0) throw DomainError("slope fit needs at least two distinct sizes");
    return sxy / sxx;
}

BenchTable bench_runtime(const ProblemDefinition& problem, const ModelParameters& params,
                         const std::vector<int>& sizes, const std::vector<DecodeMode>& modes, int repeats,
                         std::uint64_t seed) {
    if (repeats < 1) throw ParameterError("repeats must be >= 1");
    if (sizes.empty() || !std::is_sorted(sizes.begin(), sizes.end()))
        throw ParameterError("bench sizes must be non-empty and ascending");
    BenchTable table;
    std::vector<Graph> graphs;
    for (int n : sizes) {
        GeneratorSpec spec{.family = GraphFamily::SER, .n = n};
        spec.seed = derive_seed(seed, static_cast<std::uint64_t>(n));
        graphs.push_back(generate_graph(spec));
    }
    for (DecodeMode mode : modes) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            const Graph& g = graphs[i];
            BenchRow row;
            row.mode = mode;
            row.n = g.node_count();
            row.edges = g.edge_count();
            double total = 0.0;
            for (int r = 0; r < repeats; ++r) {
                reset_operation_counts();
                const auto start = std::chrono::steady_clock::now();
                greedy_rollout(problem, g, params, {.mode = mode, .track_log_probabilities = false});
                total += seconds_since(start);
                const OperationCounts counts = operation_counts();
                if (r == 0) {
                    row.arithmetic = counts.arithmetic;
                    row.comparisons = counts.comparisons;
                }
            }
            row.mean_seconds = total / repeats;
            xs.push_back(row.n);
            ys.push_back(static_cast<double>(row.arithmetic));
            table.rows.push_back(row);
        }
        if (xs.size() >= 2) table.slope[mode] = fit_loglog_slope(xs, ys);
    }
    return table;
}

void BenchTable::write_csv(std::ostream& out) const {
    out << "# nodelab-bench v" << kReportVersion << "\n";
    out << "mode,n,edges,mean_seconds,arithmetic,comparisons\n";
    for (const auto& r : rows)
        out << decode_mode_name(r.mode) << ',' << r.n << ',' << r.edges << ',' << format_number(r.mean_seconds) << ','
            << r.arithmetic << ',' << r.comparisons << "\n";
    for (const auto& [mode, s] : slope) out << "# slope," << decode_mode_name(mode) << ',' << format_number(s) << "\n";
}

}  // namespace nodelab
