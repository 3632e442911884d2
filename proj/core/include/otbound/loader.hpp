#pragma once

#include <filesystem>
#include <string>

#include "otbound/graph.hpp"

namespace otb {

// Loads a graph from a JSON manifest:
//   {"num_nodes": int, "num_classes": int,
//    "edges": path, "features": path, "labels": path}
// Relative paths resolve against the manifest's directory.
// Edges file: one "u<TAB>v" pair per line, 0-indexed, u < v, no duplicates.
// Features file: CSV, one row per node. Labels file: one integer per line.
// Errors carry file and line context.
Graph load_graph(const std::filesystem::path& manifest_path);

// Writes a graph in the manifest format (used by gen-sbm).
void save_graph(const Graph& g, const std::filesystem::path& dir,
                const std::string& name);

}  // namespace otb
