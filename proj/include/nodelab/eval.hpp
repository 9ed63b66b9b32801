#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nodelab/generators.hpp"
#include "nodelab/labeling.hpp"
#include "nodelab/oracles.hpp"
#include "nodelab/policy.hpp"

namespace nodelab {

struct Instance {
    std::string id;
    Graph graph;
};

struct GeneratedSet {
    GeneratorSpec spec;  // seed is the base seed of the set
    int count = 1;
};
void to_json(nlohmann::json& j, const GeneratedSet& s);
void from_json(const nlohmann::json& j, GeneratedSet& s);

/// Algorithms are named "dsatur", "largest-first", "smallest-last" (coloring),
/// "mvc-approx", "mvc-greedy" (vertex cover), "oracle" (exact, within the
/// limit), or "greedy:NAME" / "sample:NAME" for the checkpoint NAME.
struct ExperimentConfig {
    std::string problem = "gc";
    std::vector<GeneratedSet> generated;
    std::string dataset_glob;  // graph files; .col is DIMACS, anything else an edge list
    std::vector<std::string> algorithms{"dsatur", "largest-first", "smallest-last"};
    std::map<std::string, std::string> checkpoints;  // name -> path
    int samples = -1;                                // k for sample:NAME; -1 picks the problem default
    std::uint64_t seed = 0;
    int oracle_limit = 40;  // exact reference only for n <= oracle_limit
    long oracle_budget = kDefaultNodeBudget;

    // Throws ParameterError for unknown problems or algorithms.
    void validate() const;
};
void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

// Generated sets first (ids like "ws-n20-3"), then files sorted by path.
// Throws UsageError when the result is empty.
std::vector<Instance> load_instances(const ExperimentConfig& cfg);

struct InstanceRecord {
    std::string instance;
    int nodes = 0;
    std::string algorithm;
    std::optional<double> cost;  // absent when the algorithm failed or was infeasible
    bool feasible = false;
    std::optional<double> reference;
    bool reference_exact = false;  // false: best cost among the compared algorithms
    std::optional<double> ratio;
    double wall_time = 0.0;
    std::string error;
    std::vector<Label> labels;
};

struct AlgorithmSummary {
    std::string algorithm;
    int instances = 0;
    int feasible = 0;
    double mean_cost = 0.0;
    std::optional<double> mean_ratio;
    double wins = 0.0;                // percent of instances at the per-instance minimum, ties included
    std::optional<double> optimal;    // percent matching the exact optimum, over instances that have one
};

struct EvaluationReport {
    std::string problem;
    std::vector<InstanceRecord> records;  // instance-major, algorithms in config order
    std::vector<AlgorithmSummary> summary;

    nlohmann::json to_json(bool include_wall_time = true) const;
    void write_csv(std::ostream& out) const;          // per-instance records
    void write_summary_csv(std::ostream& out) const;  // one row per algorithm
};

inline constexpr int kReportVersion = 1;

// |cost| / |reference| for positive costs, |reference| / |cost| for negative
// ones (maximization stored negated); 1 when both are zero.
std::optional<double> approximation_ratio(double cost, double reference);

/// Runs every algorithm on every instance. Checkpoints load before anything
/// runs (LoadError); per-instance failures are recorded, not thrown.
EvaluationReport evaluate(const ExperimentConfig& cfg);
EvaluationReport evaluate(const ExperimentConfig& cfg, const std::vector<Instance>& instances);
// Fills references, ratios and the summary from records that already hold costs.
void finalize_report(EvaluationReport& report);

struct BenchRow {
    DecodeMode mode = DecodeMode::Local;
    int n = 0;
    std::size_t edges = 0;
    double mean_seconds = 0.0;
    std::uint64_t arithmetic = 0;
    std::uint64_t comparisons = 0;
};

struct BenchTable {
    std::vector<BenchRow> rows;
    std::map<DecodeMode, double> slope;  // log-log fit of arithmetic against n

    void write_csv(std::ostream& out) const;
};

// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Greedy rollouts on sparse-ER graphs of each size; operation counts cover
/// encoding and decoding of one rollout and do not depend on `repeats`.
BenchTable bench_runtime(const ProblemDefinition& problem, const ModelParameters& params,
                         const std::vector<int>& sizes, const std::vector<DecodeMode>& modes, int repeats,
                         std::uint64_t seed);

}  // namespace nodelab
