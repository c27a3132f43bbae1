#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrfgraft/model.hpp"

namespace mrfgraft {

// Model document:
//   {"variables": {"names": [...], "cardinalities": [...]},
//    "node_weights": [[...], ...],
//    "active_edges": [[i, j], ...],
//    "edge_weights": {"i-j": [row-major s_i*s_j values], ...}}
std::string model_to_json(const MrfModel& model);
MrfModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const MrfModel& model);
MrfModel load_model(const std::filesystem::path& path);

// One "i j" pair per line.
void write_edge_list(std::ostream& out, const std::vector<EdgeId>& edges);
std::vector<EdgeId> read_edge_list(std::istream& in);
void save_edge_list(const std::filesystem::path& path, const std::vector<EdgeId>& edges);
std::vector<EdgeId> load_edge_list(const std::filesystem::path& path);

}  // namespace mrfgraft
