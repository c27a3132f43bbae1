#include "mrfgraft/serialization.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mrfgraft/format.hpp"

namespace mrfgraft {

namespace {

nlohmann::json rounded(std::span<const double> values) {
    nlohmann::json out = nlohmann::json::array();
    for (double v : values) out.push_back(round_output(v));
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

std::string model_to_json(const MrfModel& model) {
    nlohmann::json doc;
    doc["variables"] = {{"names", model.spec().names}, {"cardinalities", model.spec().cardinalities}};
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t v = 0; v < model.num_variables(); ++v) nodes.push_back(rounded(model.node_weights(v)));
    doc["node_weights"] = nodes;
    nlohmann::json active = nlohmann::json::array();
    nlohmann::json weights = nlohmann::json::object();
    for (std::size_t k = 0; k < model.edge_count(); ++k) {
        const auto& e = model.active_edges()[k];
        active.push_back({e.i, e.j});
        weights[to_string(e)] = rounded(model.edge_weights(k));
    }
    doc["active_edges"] = active;
    doc["edge_weights"] = weights;
    return doc.dump(2) + "\n";
}

MrfModel model_from_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    VariableSpec spec;
    spec.names = doc.at("variables").at("names").get<std::vector<std::string>>();
    spec.cardinalities = doc.at("variables").at("cardinalities").get<std::vector<int>>();
    MrfModel model(spec);
    const auto& nodes = doc.at("node_weights");
    if (nodes.size() != spec.size()) throw std::invalid_argument("model json: node_weights length mismatch");
    for (std::size_t v = 0; v < spec.size(); ++v) {
        const auto w = nodes[v].get<std::vector<double>>();
        auto dst = model.node_weights(v);
        if (w.size() != dst.size()) throw std::invalid_argument("model json: node " + std::to_string(v) + " weight count");
        std::copy(w.begin(), w.end(), dst.begin());
    }
    const auto& weights = doc.at("edge_weights");
    for (const auto& pair : doc.at("active_edges")) {
        const EdgeId e{pair.at(0).get<std::size_t>(), pair.at(1).get<std::size_t>()};
        const std::size_t k = model.activate_edge(e);
        const auto w = weights.at(to_string(e)).get<std::vector<double>>();
        auto dst = model.edge_weights(k);
        if (w.size() != dst.size())
            throw std::invalid_argument("model json: edge " + to_string(e) + " needs " + std::to_string(dst.size()) +
                                        " weights, found " + std::to_string(w.size()));
        std::copy(w.begin(), w.end(), dst.begin());
    }
    return model;
}

void save_model(const std::filesystem::path& path, const MrfModel& model) { write_file(path, model_to_json(model)); }

MrfModel load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

void write_edge_list(std::ostream& out, const std::vector<EdgeId>& edges) {
    for (const auto& e : edges) out << e.i << ' ' << e.j << '\n';
}

std::vector<EdgeId> read_edge_list(std::istream& in) {
    std::vector<EdgeId> edges;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        std::istringstream fields(line);
        std::size_t a = 0, b = 0;
        if (!(fields >> a)) continue;  // blank line
        if (!(fields >> b)) throw std::invalid_argument("edge list: line " + std::to_string(line_number) + " needs two indices");
        edges.emplace_back(a, b);
    }
    return edges;
}

void save_edge_list(const std::filesystem::path& path, const std::vector<EdgeId>& edges) {
    std::ostringstream buf;
    write_edge_list(buf, edges);
    write_file(path, buf.str());
}

std::vector<EdgeId> load_edge_list(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    return read_edge_list(in);
}

}  // namespace mrfgraft
