#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "space.hpp"

namespace fracper {

inline constexpr int schema_version = 1;

namespace detail {

inline std::pair<std::size_t, std::size_t> line_col_of(const std::string& text,
                                                       std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') { ++line; col = 1; }
        else ++col;
    }
    return {line, col};
}

} // namespace detail

/// Serializes a space to the JSON interchange format:
///   { "schema_version": 1, "mode": "matrix"|"graph", "weights": [...],
///     "matrix": [[...]] or "edges": [[i,j,len],...], "coords": [[...]] }.
inline nlohmann::json space_to_json(const mm_space& S) {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["weights"] = S.weights();
    if (S.mode() == metric_mode::matrix) {
        j["mode"] = "matrix";
        nlohmann::json rows = nlohmann::json::array();
        std::vector<double> row(S.n());
        for (std::uint32_t i = 0; i < S.n(); ++i) {
            S.copy_distance_row(i, row.data());
            rows.push_back(row);
        }
        j["matrix"] = std::move(rows);
    } else {
        j["mode"] = "graph";
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& e : S.edges()) edges.push_back({e.a, e.b, e.len});
        j["edges"] = std::move(edges);
    }
    if (S.has_coords()) j["coords"] = S.coords();
    return j;
}

inline mm_space space_from_json(const nlohmann::json& j) {
    if (!j.contains("mode")) throw std::invalid_argument("space file: missing \"mode\"");
    if (!j.contains("weights")) throw std::invalid_argument("space file: missing \"weights\"");
    const std::string mode = j.at("mode").get<std::string>();
    std::vector<double> weights = j.at("weights").get<std::vector<double>>();
    std::vector<std::vector<double>> coords;
    if (j.contains("coords")) coords = j.at("coords").get<std::vector<std::vector<double>>>();
    const std::size_t n = weights.size();
    if (mode == "matrix") {
        if (!j.contains("matrix"))
            throw std::invalid_argument("space file: matrix mode needs \"matrix\"");
        const auto& rows = j.at("matrix");
        if (rows.size() != n)
            throw std::invalid_argument("space file: matrix has " + std::to_string(rows.size()) +
                                        " rows for " + std::to_string(n) + " weights");
        std::vector<double> flat(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            if (rows[i].size() != n)
                throw std::invalid_argument("space file: matrix[" + std::to_string(i) +
                                            "] has wrong length");
            for (std::size_t k = 0; k < n; ++k) flat[i * n + k] = rows[i][k].get<double>();
        }
        return mm_space::from_matrix(std::move(flat), std::move(weights), std::move(coords));
    }
    if (mode == "graph") {
        if (!j.contains("edges"))
            throw std::invalid_argument("space file: graph mode needs \"edges\"");
        std::vector<graph_edge> edges;
        for (const auto& e : j.at("edges")) {
            if (e.size() != 3)
                throw std::invalid_argument("space file: edges entries are [i, j, length]");
            edges.push_back({e[0].get<std::uint32_t>(), e[1].get<std::uint32_t>(),
                             e[2].get<double>()});
        }
        return mm_space::from_graph(n, std::move(edges), std::move(weights), std::move(coords));
    }
    throw std::invalid_argument("space file: mode must be \"matrix\" or \"graph\"");
}

/// Loads a space file, converting parse failures into line:column anchored
/// messages and structural failures into path-anchored ones.
inline mm_space load_space(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open space file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = detail::line_col_of(text, e.byte);
        throw std::invalid_argument(path + ":" + std::to_string(line) + ":" +
                                    std::to_string(col) + ": " + e.what());
    }
    try {
        return space_from_json(j);
    } catch (const precondition_error&) {
        throw;
    } catch (const std::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

inline void save_space(const mm_space& S, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << space_to_json(S).dump(2) << "\n";
}

} // namespace fracper
