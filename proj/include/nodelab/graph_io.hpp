#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "nodelab/graph.hpp"

namespace nodelab {

enum class GraphFormat {
    DimacsCol,  // `c` comments, one `p edge N M`, `e U V` with 1-based ids
    EdgeList,   // `U V` per line, 0-based; `#` comments; optional `# nodes N`
};

GraphFormat parse_graph_format(std::string_view name);

// `.col` / `.dimacs` -> DimacsCol, everything else -> EdgeList.
GraphFormat format_from_path(const std::filesystem::path& path);

// Duplicate edges are merged; self-loops, out-of-range endpoints and a missing
// problem line throw ParseError carrying the offending line number.
Graph parse_graph(std::string_view text, GraphFormat format);

std::string serialize_graph(const Graph& g, GraphFormat format);

Graph read_graph_file(const std::filesystem::path& path);
Graph read_graph_file(const std::filesystem::path& path, GraphFormat format);
void write_graph_file(const std::filesystem::path& path, const Graph& g, GraphFormat format);

}  // namespace nodelab
