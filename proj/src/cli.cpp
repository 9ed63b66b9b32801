#include "nodelab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nodelab/errors.hpp"
#include "nodelab/eval.hpp"
#include "nodelab/generators.hpp"
#include "nodelab/graph_io.hpp"
#include "nodelab/heuristics.hpp"
#include "nodelab/oracles.hpp"
#include "nodelab/policy.hpp"
#include "nodelab/training.hpp"

namespace nodelab {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string output;
    std::string format = "json";
};

nlohmann::json read_config(const std::string& path) {
    if (path.empty()) throw UsageError("--config <file> is required");
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError("config " + path + ": " + e.what());
    }
}

template <typename T>
T config_as(const nlohmann::json& j, const std::string& path) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError("config " + path + ": " + e.what());
    }
}

fs::path output_dir(const GlobalOptions& g) {
    if (g.output.empty()) throw UsageError("--output <dir> is required");
    fs::create_directories(g.output);
    return g.output;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + path.string());
    out << text;
}

std::vector<Label> solve_with(const std::string& algorithm, const ProblemDefinition& problem, const Graph& g,
                              const std::string& checkpoint, int samples, std::uint64_t seed) {
    if (algorithm == "greedy" || algorithm == "sample") {
        if (checkpoint.empty()) throw UsageError("algorithm '" + algorithm + "' needs --checkpoint");
        ModelParameters params = load_checkpoint_file(checkpoint);
        const int k = samples >= 0 ? samples : default_sample_count(problem);
        Trajectory t = algorithm == "greedy" ? greedy_rollout(problem, g, params)
                                             : sample_rollout(problem, g, params, k, seed);
        return t.labels(g.node_count());
    }
    if (algorithm == "oracle") return exact_optimum(problem, g).witness;
    const bool coloring = algorithm == "dsatur" || algorithm == "largest-first" || algorithm == "smallest-last";
    const bool cover = algorithm == "mvc-approx" || algorithm == "mvc-greedy";
    if (!coloring && !cover) throw UsageError("unknown algorithm '" + algorithm + "'");
    if ((coloring && problem.name() != "gc") || (cover && problem.name() != "mvc"))
        throw UsageError("algorithm '" + algorithm + "' does not solve " + std::string(problem.name()));
    if (algorithm == "dsatur") return dsatur(g).labeling;
    if (algorithm == "largest-first") return largest_first(g).labeling;
    if (algorithm == "smallest-last") return smallest_last(g).labeling;
    return mvc_approx(g, algorithm == "mvc-greedy").labeling;
}

std::string fixed(double v, int digits = 3) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"nodelab: node-labeling heuristics, exact oracles and learned attention policies"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    GlobalOptions global;
    app.add_option("--seed", global.seed, "Random seed (overrides the config)");
    app.add_option("--config", global.config, "JSON configuration file");
    app.add_option("--output", global.output, "Directory for machine-readable output");
    app.add_option("--format", global.format, "Report format")->check(CLI::IsMember({"json", "csv"}));

    // generate
    auto* generate = app.add_subcommand("generate", "Write synthetic graphs to disk");
    std::string family = "er", graph_format = "edgelist";
    GeneratorSpec spec;
    int count = 1;
    generate->add_option("--family", family, "er | ba | ser | ws")->check(CLI::IsMember({"er", "ba", "ser", "ws"}));
    generate->add_option("-n,--nodes", spec.n, "Node count");
    generate->add_option("--count", count, "Number of graphs");
    generate->add_option("--p", spec.p, "ER edge probability");
    generate->add_option("--attach", spec.attach, "BA edges per new node");
    generate->add_option("--avg-degree", spec.avg_degree, "Sparse-ER target average degree");
    generate->add_option("--k", spec.k, "WS ring neighbors");
    generate->add_option("--q", spec.q, "WS rewiring probability");
    generate->add_option("--graph-format", graph_format, "col | edgelist")->check(CLI::IsMember({"col", "edgelist"}));

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a policy from a training config (--config)");
    std::optional<int> epochs;
    train_cmd->add_option("--epochs", epochs, "Override the number of epochs");

    // solve
    auto* solve = app.add_subcommand("solve", "Solve one instance with one algorithm");
    std::string problem_name = "gc", algorithm = "dsatur", input, checkpoint;
    int samples = -1;
    solve->add_option("--problem", problem_name, "gc | mvc | mis");
    solve->add_option("--algorithm", algorithm,
                      "dsatur | largest-first | smallest-last | mvc-approx | mvc-greedy | oracle | greedy | sample");
    solve->add_option("--input", input, "Graph file (.col DIMACS or edge list)")->required();
    solve->add_option("--checkpoint", checkpoint, "Model checkpoint for greedy/sample");
    solve->add_option("--samples", samples, "Sampled rollouts for 'sample'");

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Run an experiment config (--config)");
    std::optional<std::string> dataset_glob;
    evaluate_cmd->add_option("--dataset-glob", dataset_glob, "Override the dataset glob");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "Exact optimum of one instance");
    long budget = kDefaultNodeBudget;
    oracle->add_option("--problem", problem_name, "gc | mvc | mis");
    oracle->add_option("--input", input, "Graph file")->required();
    oracle->add_option("--budget", budget, "Search-node budget");

    // bench
    auto* bench = app.add_subcommand("bench", "Operation counts and wall time of greedy rollouts");
    std::vector<int> sizes{320, 640, 1280, 2560, 5120};
    std::vector<std::string> modes{"local", "global"};
    int repeats = 1, width = 32;
    bench->add_option("--problem", problem_name, "gc | mvc | mis");
    bench->add_option("--checkpoint", checkpoint, "Model checkpoint (default: fresh initialization)");
    bench->add_option("--d", width, "Embedding width without a checkpoint");
    bench->add_option("--sizes", sizes, "Ascending node counts");
    bench->add_option("--modes", modes, "Decode modes")->check(CLI::IsMember({"local", "global", "static"}));
    bench->add_option("--repeats", repeats, "Rollouts per size");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const std::uint64_t seed = global.seed.value_or(0);
        if (generate->parsed()) {
            spec.family = parse_family(family);
            spec.validate();
            if (count < 1) throw UsageError("--count must be >= 1");
            const fs::path dir = output_dir(global);
            const GraphFormat fmt = parse_graph_format(graph_format);
            for (int i = 0; i < count; ++i) {
                GeneratorSpec s = spec;
                s.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
                Graph g = generate_graph(s);
                const std::string name = family + "-n" + std::to_string(spec.n) + "-" + std::to_string(i) +
                                         (fmt == GraphFormat::DimacsCol ? ".col" : ".edgelist");
                write_graph_file(dir / name, g, fmt);
            }
            out << "wrote " << count << " " << family << " graph(s) to " << dir.string() << "\n";
        } else if (train_cmd->parsed()) {
            TrainConfig cfg = config_as<TrainConfig>(read_config(global.config), global.config);
            if (global.seed) cfg.seed = *global.seed;
            if (epochs) cfg.epochs = *epochs;
            cfg.validate();
            const fs::path dir = output_dir(global);
            std::ofstream log(dir / "train_log.jsonl");
            TrainResult result = train(cfg, &log, [&](const EpochRecord& r, const ModelParameters&) {
                out << "epoch " << r.epoch << "  train " << fixed(r.train_cost) << "  challenge "
                    << fixed(r.challenge_cost) << "  baseline " << fixed(r.baseline_cost) << "  p "
                    << fixed(r.p_value, 4) << (r.swapped ? "  baseline replaced" : "") << "\n";
            });
            save_checkpoint_file(dir / "model.json", result.params);
            save_checkpoint_file(dir / "baseline.json", result.baseline);
            out << "saved " << (dir / "model.json").string() << "\n";
        } else if (solve->parsed()) {
            const ProblemDefinition& problem = problem_by_name(problem_name);
            Graph g = read_graph_file(input);
            std::vector<Label> labels = solve_with(algorithm, problem, g, checkpoint, samples, seed);
            Verification v = verify_and_cost(problem, g, labels);
            nlohmann::json doc = labeling_to_json(problem.name(), labels, v.cost);
            doc["algorithm"] = algorithm;
            doc["feasible"] = v.feasible;
            if (!global.output.empty()) write_text(output_dir(global) / "solution.json", doc.dump(2) + "\n");
            out << "cost " << v.cost.to_string() << "\n";
            out << "labels " << nlohmann::json(labels).dump() << "\n";
            if (!v.feasible) return kExitRuntime;
        } else if (evaluate_cmd->parsed()) {
            ExperimentConfig cfg = config_as<ExperimentConfig>(read_config(global.config), global.config);
            if (dataset_glob) cfg.dataset_glob = *dataset_glob;
            if (global.seed) cfg.seed = *global.seed;
            EvaluationReport report = evaluate(cfg);
            if (!global.output.empty()) {
                const fs::path dir = output_dir(global);
                if (global.format == "csv") {
                    std::ostringstream records, summary;
                    report.write_csv(records);
                    report.write_summary_csv(summary);
                    write_text(dir / "report.csv", records.str());
                    write_text(dir / "summary.csv", summary.str());
                } else {
                    write_text(dir / "report.json", report.to_json().dump(2) + "\n");
                }
            }
            out << std::left << std::setw(24) << "algorithm" << std::setw(12) << "mean cost" << std::setw(12)
                << "ratio" << std::setw(10) << "wins %" << "optimal %\n";
            for (const auto& s : report.summary)
                out << std::left << std::setw(24) << s.algorithm << std::setw(12) << fixed(s.mean_cost)
                    << std::setw(12) << (s.mean_ratio ? fixed(*s.mean_ratio) : "-") << std::setw(10)
                    << fixed(s.wins, 1) << (s.optimal ? fixed(*s.optimal, 1) : "-") << "\n";
        } else if (oracle->parsed()) {
            const ProblemDefinition& problem = problem_by_name(problem_name);
            OracleResult r = exact_optimum(problem, read_graph_file(input), budget);
            nlohmann::json doc = {{"problem", std::string(problem.name())},
                                  {"optimum", r.optimum},
                                  {"witness", r.witness},
                                  {"explored", r.explored}};
            if (!global.output.empty()) write_text(output_dir(global) / "oracle.json", doc.dump(2) + "\n");
            out << doc.dump() << "\n";
        } else if (bench->parsed()) {
            const ProblemDefinition& problem = problem_by_name(problem_name);
            ModelParameters params;
            if (checkpoint.empty()) {
                PolicyHyper hyper;
                hyper.d = width;
                params = ModelParameters::initialize(hyper, seed);
            } else {
                params = load_checkpoint_file(checkpoint);
            }
            std::vector<DecodeMode> parsed_modes;
            for (const auto& m : modes) parsed_modes.push_back(parse_decode_mode(m));
            BenchTable table = bench_runtime(problem, params, sizes, parsed_modes, repeats, seed);
            std::ostringstream csv;
            table.write_csv(csv);
            if (!global.output.empty()) {
                const fs::path dir = output_dir(global);
                if (global.format == "csv") {
                    write_text(dir / "bench.csv", csv.str());
                } else {
                    nlohmann::json rows = nlohmann::json::array();
                    for (const auto& r : table.rows)
                        rows.push_back({{"mode", std::string(decode_mode_name(r.mode))},
                                        {"n", r.n},
                                        {"edges", r.edges},
                                        {"mean_seconds", r.mean_seconds},
                                        {"arithmetic", r.arithmetic},
                                        {"comparisons", r.comparisons}});
                    nlohmann::json slopes = nlohmann::json::object();
                    for (const auto& [m, s] : table.slope) slopes[std::string(decode_mode_name(m))] = s;
                    write_text(dir / "bench.json", nlohmann::json{{"rows", rows}, {"slope", slopes}}.dump(2) + "\n");
                }
            } else {
                out << csv.str();
            }
            for (const auto& [m, s] : table.slope)
                out << "slope " << decode_mode_name(m) << " " << fixed(s) << "\n";
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const ParameterError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace nodelab
