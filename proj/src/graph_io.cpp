#include "nodelab/graph_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "nodelab/errors.hpp"

namespace nodelab {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

long parse_long(std::string_view token, std::size_t line_no) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw ParseError(line_no, "expected an integer, got '" + std::string(token) + "'");
    return value;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        fn(line, line_no);
        if (end == text.size()) break;
        pos = end + 1;
    }
}

Graph parse_dimacs(std::string_view text) {
    std::optional<long> n;
    std::vector<Edge> edges;
    std::size_t last_line = 0;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        last_line = line_no;
        auto tokens = split_ws(line);
        if (tokens.empty()) return;
        const std::string_view kind = tokens[0];
        if (kind[0] == 'c') return;
        if (kind == "p") {
            if (n) throw ParseError(line_no, "duplicate 'p' line");
            if (tokens.size() != 4) throw ParseError(line_no, "expected 'p edge N M'");
            n = parse_long(tokens[2], line_no);
            if (*n < 0) throw ParseError(line_no, "negative node count");
            return;
        }
        if (kind == "e") {
            if (!n) throw ParseError(line_no, "edge before the 'p' line");
            if (tokens.size() != 3) throw ParseError(line_no, "expected 'e U V'");
            long u = parse_long(tokens[1], line_no);
            long v = parse_long(tokens[2], line_no);
            if (u < 1 || u > *n || v < 1 || v > *n)
                throw ParseError(line_no, "endpoint out of range 1.." + std::to_string(*n));
            if (u == v) throw ParseError(line_no, "self-loop at node " + std::to_string(u));
            edges.push_back({static_cast<NodeId>(u - 1), static_cast<NodeId>(v - 1)});
            return;
        }
        if (kind == "n") return;  // node annotations carry no structure
        throw ParseError(line_no, "unknown line type '" + std::string(kind) + "'");
    });
    if (!n) throw ParseError(last_line, "missing 'p' line");
    return Graph::from_edges(static_cast<int>(*n), edges);
}

Graph parse_edge_list(std::string_view text) {
    std::optional<long> declared;
    long max_id = -1;
    std::vector<std::pair<Edge, std::size_t>> edges;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        auto tokens = split_ws(line);
        if (tokens.empty()) return;
        if (tokens[0][0] == '#' || tokens[0][0] == '%') {
            if (tokens.size() == 3 && tokens[0] == "#" && tokens[1] == "nodes") {
                declared = parse_long(tokens[2], line_no);
                if (*declared < 0) throw ParseError(line_no, "negative node count");
            }
            return;
        }
        if (tokens.size() != 2) throw ParseError(line_no, "expected 'U V'");
        long u = parse_long(tokens[0], line_no);
        long v = parse_long(tokens[1], line_no);
        if (u < 0 || v < 0) throw ParseError(line_no, "negative node id");
        if (u == v) throw ParseError(line_no, "self-loop at node " + std::to_string(u));
        max_id = std::max({max_id, u, v});
        edges.push_back({{static_cast<NodeId>(u), static_cast<NodeId>(v)}, line_no});
    });
    const long n = declared ? *declared : max_id + 1;
    std::vector<Edge> plain;
    plain.reserve(edges.size());
    for (const auto& [e, line_no] : edges) {
        if (e.u >= n || e.v >= n)
            throw ParseError(line_no, "endpoint out of range 0.." + std::to_string(n - 1));
        plain.push_back(e);
    }
    return Graph::from_edges(static_cast<int>(n), plain);
}

}  // namespace

GraphFormat parse_graph_format(std::string_view name) {
    if (name == "dimacs" || name == "col" || name == "dimacs_col") return GraphFormat::DimacsCol;
    if (name == "edgelist" || name == "edge_list" || name == "edges") return GraphFormat::EdgeList;
    throw ParameterError("unknown graph format '" + std::string(name) + "'");
}

GraphFormat format_from_path(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".col" || ext == ".dimacs") return GraphFormat::DimacsCol;
    return GraphFormat::EdgeList;
}

Graph parse_graph(std::string_view text, GraphFormat format) {
    return format == GraphFormat::DimacsCol ? parse_dimacs(text) : parse_edge_list(text);
}

std::string serialize_graph(const Graph& g, GraphFormat format) {
    std::ostringstream out;
    if (format == GraphFormat::DimacsCol) {
        out << "p edge " << g.node_count() << ' ' << g.edge_count() << '\n';
        for (const Edge& e : g.edges()) out << "e " << e.u + 1 << ' ' << e.v + 1 << '\n';
    } else {
        out << "# nodes " << g.node_count() << '\n';
        for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
    }
    return out.str();
}

Graph read_graph_file(const std::filesystem::path& path) {
    return read_graph_file(path, format_from_path(path));
}

Graph read_graph_file(const std::filesystem::path& path, GraphFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open graph file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_graph(buffer.str(), format);
}

void write_graph_file(const std::filesystem::path& path, const Graph& g, GraphFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write graph file " + path.string());
    out << serialize_graph(g, format);
}

}  // namespace nodelab
