#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "space.hpp"

namespace fracper {

/// Lattice on [0,1]^dim with spacing h = 1/(n_per_side - 1), nearest-neighbor
/// edges of length h and the shortest-path metric, so distances are the l1
/// path lengths. Every point carries weight h^dim; boundary cells are not
/// half-weighted, which overcounts the total mass by a factor <= 1 + 2/(n-1)
/// per axis.
inline mm_space grid(int dim, int n_per_side) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1, 2, or 3");
    if (n_per_side < 2) throw std::invalid_argument("grid needs at least 2 points per side");
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) {
        total *= static_cast<std::size_t>(n_per_side);
        if (total > 1000000) throw std::invalid_argument("grid exceeds the 10^6 point guard");
    }
    const double h = 1.0 / (n_per_side - 1);
    double w = h;
    for (int d = 1; d < dim; ++d) w *= h;

    std::vector<double> weights(total, w);
    std::vector<std::vector<double>> coords(total, std::vector<double>(dim, 0.0));
    std::vector<graph_edge> edges;
    const std::size_t m = static_cast<std::size_t>(n_per_side);
    std::vector<std::size_t> stride(dim, 1);
    for (int d = 1; d < dim; ++d) stride[d] = stride[d - 1] * m;
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t p = 0; p < total; ++p) {
        std::size_t rem = p;
        for (int d = 0; d < dim; ++d) {
            idx[d] = rem % m;
            rem /= m;
            coords[p][d] = idx[d] * h;
        }
        for (int d = 0; d < dim; ++d)
            if (idx[d] + 1 < m)
                edges.push_back({static_cast<std::uint32_t>(p),
                                 static_cast<std::uint32_t>(p + stride[d]), h});
    }
    return mm_space::from_graph(total, std::move(edges), std::move(weights), std::move(coords));
}

/// Same metric, weights scaled by max(d(origin, i), h_min)^alpha where h_min
/// is the smallest positive distance. Models power-weighted measures.
inline mm_space weighted_space(const mm_space& base, double alpha, std::uint32_t origin) {
    if (origin >= base.n()) throw std::out_of_range("origin index out of range");
    if (alpha < 0.0) {
        const double qd = base.estimate_constants().q_d;
        if (!(alpha > -qd))
            throw precondition_error("weight exponent keeps doubling plausible",
                                     "alpha = " + std::to_string(alpha) +
                                         " is not above -Q_d = " + std::to_string(-qd));
    }
    const double h_min = base.min_positive_distance();
    std::vector<double> w(base.n());
    for (std::uint32_t i = 0; i < base.n(); ++i)
        w[i] = base.weight(i) * std::pow(std::max(base.distance(origin, i), h_min), alpha);
    if (base.mode() == metric_mode::graph)
        return mm_space::from_graph(base.n(), base.edges(), std::move(w), base.coords());
    std::vector<double> dist(base.n() * base.n());
    for (std::uint32_t i = 0; i < base.n(); ++i)
        base.copy_distance_row(i, dist.data() + static_cast<std::size_t>(i) * base.n());
    return mm_space::from_matrix(std::move(dist), std::move(w), base.coords());
}

/// Metric snowflaking d' = d^eps with the weights kept bit-exact. The result
/// is a matrix-mode space; snowflaked metrics carry no geodesics.
inline mm_space snowflake(const mm_space& base, double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("snowflake exponent must lie in (0,1)");
    const std::size_t n = base.n();
    std::vector<double> dist(n * n, 0.0);
    std::vector<double> row(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        base.copy_distance_row(i, row.data());
        for (std::uint32_t j = 0; j < n; ++j)
            dist[static_cast<std::size_t>(i) * n + j] = (i == j) ? 0.0 : std::pow(row[j], eps);
    }
    // keep the matrix exactly symmetric regardless of pow() quirks
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            dist[static_cast<std::size_t>(j) * n + i] = dist[static_cast<std::size_t>(i) * n + j];
    return mm_space::from_matrix(std::move(dist), base.weights(), base.coords());
}

/// Two unit-length path wings glued at a single center vertex. Each wing has
/// n_per_wing points counting the shared center, spacing 1/(n_per_wing - 1),
/// and uniform per-point weight equal to the spacing.
inline mm_space bowtie(int n_per_wing) {
    if (n_per_wing < 2) throw std::invalid_argument("bowtie needs at least 2 points per wing");
    const std::size_t per = static_cast<std::size_t>(n_per_wing);
    const std::size_t n = 2 * (per - 1) + 1;
    const double h = 1.0 / (n_per_wing - 1);
    std::vector<double> weights(n, h);
    std::vector<std::vector<double>> coords(n, std::vector<double>(1, 0.0));
    std::vector<graph_edge> edges;
    // index 0 = center; wing A occupies 1..per-1, wing B occupies per..2per-2
    for (std::size_t k = 1; k < per; ++k) {
        const std::uint32_t a = static_cast<std::uint32_t>(k);
        const std::uint32_t b = static_cast<std::uint32_t>(per - 1 + k);
        coords[a][0] = k * h;
        coords[b][0] = -static_cast<double>(k) * h;
        edges.push_back({a == 1 ? 0u : a - 1, a, h});
        edges.push_back({k == 1 ? 0u : b - 1, b, h});
    }
    return mm_space::from_graph(n, std::move(edges), std::move(weights), std::move(coords));
}

} // namespace fracper
