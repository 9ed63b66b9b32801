#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nodelab/graph.hpp"

namespace nodelab {

enum class GraphFamily { BA, ER, SER, WS };

std::string_view family_name(GraphFamily family);
GraphFamily parse_family(std::string_view name);

/// Parameters of one synthetic graph distribution. Defaults are the
/// training-distribution values: BA attachment 4, ER p = 0.15, WS k = 5 and
/// q = 0.1, sparse-ER average degree 7.5 with epsilon 0.2.
struct GeneratorSpec {
    GraphFamily family = GraphFamily::ER;
    int n = 20;
    int attach = 4;            // BA edges per arriving node
    double p = 0.15;           // ER edge probability
    double avg_degree = 7.5;   // SER target average degree
    double epsilon = 0.2;      // SER connectivity slack
    int k = 5;                 // WS ring neighbors (floor(k/2) per side)
    double q = 0.1;            // WS rewiring probability
    std::uint64_t seed = 0;

    // Throws ParameterError when the parameters do not fit the family.
    void validate() const;

    bool operator==(const GeneratorSpec&) const = default;
};

void to_json(nlohmann::json& j, const GeneratorSpec& spec);
void from_json(const nlohmann::json& j, GeneratorSpec& spec);

// min(1, max(avg_degree / n, (1 + epsilon) ln(n) / n))
double sparse_er_probability(int n, double avg_degree, double epsilon);

/// Draws one graph from the distribution described by `spec`.
///
/// Deterministic in `spec` (seed included). Disconnected draws are reduced to
/// their largest connected component and relabelled contiguously.
Graph generate_graph(const GeneratorSpec& spec);

}  // namespace nodelab
