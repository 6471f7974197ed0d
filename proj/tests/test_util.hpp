#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fracper/fracper.hpp"

namespace testutil {

inline std::uint64_t mix(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline double unit_real(std::uint64_t& s) {
    return static_cast<double>(mix(s) >> 11) * 0x1.0p-53;
}

/// Random spaces for property tests: even seeds give Euclidean point clouds
/// in matrix mode, odd seeds give connected random graphs in geodesic mode.
inline fracper::mm_space random_space(std::uint64_t seed, std::size_t n) {
    std::uint64_t s = seed * 0x9E3779B97F4A7C15ull + 1;
    std::vector<double> w(n);
    for (auto& x : w) x = 0.25 + unit_real(s);
    if (seed % 2 == 0) {
        std::vector<std::array<double, 3>> pts(n);
        for (auto& p : pts) p = {unit_real(s), unit_real(s), unit_real(s)};
        std::vector<double> d(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = pts[i][0] - pts[j][0];
                const double dy = pts[i][1] - pts[j][1];
                const double dz = pts[i][2] - pts[j][2];
                const double dist = std::sqrt(dx * dx + dy * dy + dz * dz) + 1e-9;
                d[i * n + j] = dist;
                d[j * n + i] = dist;
            }
        return fracper::mm_space::from_matrix(std::move(d), std::move(w));
    }
    std::vector<fracper::graph_edge> edges;
    for (std::uint32_t i = 1; i < n; ++i) {
        const std::uint32_t parent = static_cast<std::uint32_t>(mix(s) % i);
        edges.push_back({parent, i, 0.1 + unit_real(s)});
    }
    const std::size_t extra = n / 2;
    for (std::size_t e = 0; e < extra; ++e) {
        const std::uint32_t a = static_cast<std::uint32_t>(mix(s) % n);
        const std::uint32_t b = static_cast<std::uint32_t>(mix(s) % n);
        if (a != b) edges.push_back({a, b, 0.1 + unit_real(s)});
    }
    return fracper::mm_space::from_graph(n, std::move(edges), std::move(w));
}

inline fracper::point_set random_subset(const fracper::mm_space& S, std::uint64_t seed,
                                        bool proper_nonempty = true) {
    std::uint64_t s = seed ^ 0xABCDEFull;
    std::vector<std::uint32_t> idx;
    for (std::uint32_t i = 0; i < S.n(); ++i)
        if (mix(s) & 1) idx.push_back(i);
    if (proper_nonempty) {
        if (idx.empty()) idx.push_back(static_cast<std::uint32_t>(mix(s) % S.n()));
        if (idx.size() == S.n()) idx.pop_back();
    }
    return S.make_set(std::move(idx));
}

inline std::vector<double> random_function(const fracper::mm_space& S, std::uint64_t seed,
                                           int distinct_levels = 0) {
    std::uint64_t s = seed ^ 0x5151ull;
    std::vector<double> u(S.n());
    for (auto& v : u) {
        v = 2.0 * unit_real(s) - 1.0;
        if (distinct_levels > 0)
            v = std::floor(v * distinct_levels) / distinct_levels;
    }
    return u;
}

inline double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

} // namespace testutil
