#include "nodelab/generators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "nodelab/errors.hpp"
#include "nodelab/rng.hpp"

namespace nodelab {

std::string_view family_name(GraphFamily family) {
    switch (family) {
        case GraphFamily::BA: return "BA";
        case GraphFamily::ER: return "ER";
        case GraphFamily::SER: return "SER";
        case GraphFamily::WS: return "WS";
    }
    return "?";
}

GraphFamily parse_family(std::string_view name) {
    std::string upper(name);
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper == "BA") return GraphFamily::BA;
    if (upper == "ER") return GraphFamily::ER;
    if (upper == "SER" || upper == "S-ER") return GraphFamily::SER;
    if (upper == "WS") return GraphFamily::WS;
    throw ParameterError("unknown graph family '" + std::string(name) + "'");
}

void GeneratorSpec::validate() const {
    switch (family) {
        case GraphFamily::BA:
            if (attach < 1) throw ParameterError("BA: attachment count must be >= 1");
            if (n <= attach) throw ParameterError("BA: n must exceed the attachment count");
            break;
        case GraphFamily::ER:
            if (n < 1) throw ParameterError("ER: n must be >= 1");
            if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("ER: p must lie in [0, 1]");
            break;
        case GraphFamily::SER:
            if (n < 2) throw ParameterError("SER: n must be >= 2");
            if (!(avg_degree > 0.0)) throw ParameterError("SER: average degree must be positive");
            if (!(epsilon >= 0.0)) throw ParameterError("SER: epsilon must be non-negative");
            break;
        case GraphFamily::WS:
            if (k < 2) throw ParameterError("WS: k must be >= 2");
            if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("WS: q must lie in [0, 1]");
            if (n <= k) throw ParameterError("WS: n must exceed k");
            break;
    }
}

void to_json(nlohmann::json& j, const GeneratorSpec& spec) {
    j = nlohmann::json{{"family", std::string(family_name(spec.family))}, {"n", spec.n}, {"seed", spec.seed}};
    switch (spec.family) {
        case GraphFamily::BA: j["attach"] = spec.attach; break;
        case GraphFamily::ER: j["p"] = spec.p; break;
        case GraphFamily::SER:
            j["avg_degree"] = spec.avg_degree;
            j["epsilon"] = spec.epsilon;
            break;
        case GraphFamily::WS:
            j["k"] = spec.k;
            j["q"] = spec.q;
            break;
    }
}

void from_json(const nlohmann::json& j, GeneratorSpec& spec) {
    spec = GeneratorSpec{};
    spec.family = parse_family(j.at("family").get<std::string>());
    spec.n = j.at("n").get<int>();
    spec.attach = j.value("attach", spec.attach);
    spec.p = j.value("p", spec.p);
    spec.avg_degree = j.value("avg_degree", spec.avg_degree);
    spec.epsilon = j.value("epsilon", spec.epsilon);
    spec.k = j.value("k", spec.k);
    spec.q = j.value("q", spec.q);
    spec.seed = j.value("seed", spec.seed);
}

double sparse_er_probability(int n, double avg_degree, double epsilon) {
    if (n < 2) throw ParameterError("sparse_er_probability: n must be >= 2");
    if (!(avg_degree > 0.0) || !(epsilon >= 0.0))
        throw ParameterError("sparse_er_probability: need avg_degree > 0 and epsilon >= 0");
    const double nn = static_cast<double>(n);
    return std::min(1.0, std::max(avg_degree / nn, (1.0 + epsilon) * std::log(nn) / nn));
}

namespace {

Graph erdos_renyi(int n, double p, Rng& rng) {
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.bernoulli(p)) edges.push_back({u, v});
    return Graph::from_edges(n, edges);
}

// Preferential attachment seeded with a star on attach+1 nodes; each new node
// links to `attach` distinct targets drawn proportionally to degree.
Graph barabasi_albert(int n, int attach, Rng& rng) {
    std::vector<Edge> edges;
    std::vector<NodeId> repeated;  // node v appears degree(v) times
    for (int leaf = 1; leaf <= attach; ++leaf) {
        edges.push_back({0, leaf});
        repeated.push_back(0);
        repeated.push_back(leaf);
    }
    std::vector<NodeId> targets;
    for (int source = attach + 1; source < n; ++source) {
        targets.clear();
        while (static_cast<int>(targets.size()) < attach) {
            NodeId t = repeated[rng.below(repeated.size())];
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
        }
        for (NodeId t : targets) {
            edges.push_back({source, t});
            repeated.push_back(t);
        }
        repeated.insert(repeated.end(), static_cast<std::size_t>(attach), source);
    }
    return Graph::from_edges(n, edges);
}

// Ring lattice with floor(k/2) neighbors per side; each lattice edge (u, u+j)
// is rewired with probability q to (u, w) for uniform w avoiding self-loops
// and duplicates.
Graph watts_strogatz(int n, int k, double q, Rng& rng) {
    std::vector<std::set<NodeId>> adj(static_cast<std::size_t>(n));
    const int half = k / 2;
    for (int j = 1; j <= half; ++j)
        for (int u = 0; u < n; ++u) {
            int v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    for (int j = 1; j <= half; ++j)
        for (int u = 0; u < n; ++u) {
            int v = (u + j) % n;
            if (!rng.bernoulli(q)) continue;
            if (static_cast<int>(adj[u].size()) >= n - 1) continue;
            NodeId w = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n)));
            while (w == u || adj[u].count(w)) w = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n)));
            adj[u].erase(v);
            adj[v].erase(u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
        for (NodeId v : adj[u])
            if (u < v) edges.push_back({u, v});
    return Graph::from_edges(n, edges);
}

}  // namespace

Graph generate_graph(const GeneratorSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    Graph g;
    switch (spec.family) {
        case GraphFamily::BA: g = barabasi_albert(spec.n, spec.attach, rng); break;
        case GraphFamily::ER: g = erdos_renyi(spec.n, spec.p, rng); break;
        case GraphFamily::SER:
            g = erdos_renyi(spec.n, sparse_er_probability(spec.n, spec.avg_degree, spec.epsilon), rng);
            break;
        case GraphFamily::WS: g = watts_strogatz(spec.n, spec.k, spec.q, rng); break;
    }
    return largest_component(g);
}

}  // namespace nodelab
