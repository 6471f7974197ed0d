#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "ksum.hpp"
#include "parallel.hpp"
#include "point_set.hpp"
#include "space.hpp"

namespace fracper {

enum class kernel_kind { asymmetric, symmetric };

/// Value of a nonlocal double-sum functional together with bookkeeping:
/// domain_size is |Omega|, pair_count the number of ordered pairs whose
/// integrand is nonzero.
struct energy_value {
    double value = 0.0;
    double theta = 0.0;
    std::size_t domain_size = 0;
    std::size_t pair_count = 0;
};

namespace detail {

inline void require_theta(double theta) {
    if (!(theta > 0.0 && theta < 1.0))
        throw precondition_error("fractional exponent lies in (0,1)",
                                 "theta = " + std::to_string(theta));
}

inline void require_same_space(const mm_space& s, const point_set& ps, const char* what) {
    if (ps.space_size() != s.n())
        throw std::invalid_argument(std::string(what) + " does not belong to this space");
}

inline void require_finite(std::span<const double> u, std::size_t n) {
    if (u.size() != n) throw std::invalid_argument("function length does not match point count");
    for (double v : u)
        if (!std::isfinite(v)) throw std::invalid_argument("function values must be finite");
}

// Deterministic parallel reduction over unordered pairs {x, y} of Omega
// members: each outer index accumulates its partial sum in a fixed order and
// the partials are folded sequentially, so the result does not depend on the
// thread count. term(x, y, d, mxy, myx) returns the pair's contribution and
// may be zero.
template <class Term>
std::pair<double, std::size_t> pair_reduce(const mm_space& S, const point_set& Om, Term&& term) {
    const auto& M = S.ball_measure_table();
    const std::size_t n = S.n();
    const auto& mem = Om.members();
    const std::size_t m = mem.size();
    std::vector<double> partial(m, 0.0);
    std::vector<std::size_t> counts(m, 0);
    parallel_for(m, [&](std::size_t a) {
        const std::uint32_t x = mem[a];
        const std::span<const double> row = S.dense_row(x);
        const double* mrow = M.data() + static_cast<std::size_t>(x) * n;
        ksum acc;
        std::size_t cnt = 0;
        for (std::size_t b = a + 1; b < m; ++b) {
            const std::uint32_t y = mem[b];
            const double d = row[y];
            const double t = term(x, y, d, mrow[y], M[static_cast<std::size_t>(y) * n + x]);
            if (t != 0.0) {
                acc.add(t);
                ++cnt;
            }
        }
        partial[a] = acc.get();
        counts[a] = cnt;
    });
    ksum total;
    std::size_t cnt = 0;
    for (std::size_t a = 0; a < m; ++a) {
        total.add(partial[a]);
        cnt += counts[a];
    }
    return {total.get(), cnt};
}

} // namespace detail

/// Fractional theta-perimeter of E in Omega:
///   sum over x in Omega∩E, y in Omega\E of
///   2 mu_x mu_y / ( d(x,y)^theta [ mu(B(x,d)) + mu(B(y,d)) ] ).
/// Pairs are visited in a canonical order independent of which side of the
/// cut is called E, so swapping E with its complement reproduces the value
/// bit for bit.
inline energy_value fractional_perimeter(const mm_space& S, const point_set& E,
                                         const point_set& Om, double theta) {
    detail::require_theta(theta);
    detail::require_same_space(S, E, "set E");
    detail::require_same_space(S, Om, "domain Omega");
    const auto& w = S.weights();
    auto [value, cnt] = detail::pair_reduce(
        S, Om, [&](std::uint32_t x, std::uint32_t y, double d, double mxy, double myx) {
            if (E.contains(x) == E.contains(y)) return 0.0;
            return 2.0 * w[x] * w[y] / (std::pow(d, theta) * (mxy + myx));
        });
    return {value, theta, Om.size(), cnt};
}

/// Nonlocal energy of a function over Omega. The asymmetric kernel divides by
/// mu(B(x,d)) alone; the symmetric kernel by the sum of the two ball masses.
/// For u = indicator of E, the symmetric energy equals the fractional
/// perimeter of E exactly.
inline energy_value fractional_energy(const mm_space& S, std::span<const double> u,
                                      const point_set& Om, double theta, kernel_kind kind) {
    detail::require_theta(theta);
    detail::require_same_space(S, Om, "domain Omega");
    detail::require_finite(u, S.n());
    const auto& w = S.weights();
    auto [value, cnt] = detail::pair_reduce(
        S, Om, [&](std::uint32_t x, std::uint32_t y, double d, double mxy, double myx) {
            const double du = u[x] > u[y] ? u[x] - u[y] : u[y] - u[x];
            if (du == 0.0) return 0.0;
            if (kind == kernel_kind::symmetric)
                return 2.0 * du * w[x] * w[y] / (std::pow(d, theta) * (mxy + myx));
            return du * w[x] * w[y] / std::pow(d, theta) * (1.0 / mxy + 1.0 / myx);
        });
    return {value, theta, Om.size(), 2 * cnt};
}

/// Exact level-set decomposition of the symmetric energy: sorts the distinct
/// values of u on Omega and sums (v_{k+1} - v_k) * P_theta({u > v_k}, Omega).
inline energy_value coarea_rhs(const mm_space& S, std::span<const double> u, const point_set& Om,
                               double theta) {
    detail::require_theta(theta);
    detail::require_same_space(S, Om, "domain Omega");
    detail::require_finite(u, S.n());
    std::vector<double> levels;
    levels.reserve(Om.size());
    for (std::uint32_t i : Om.members()) levels.push_back(u[i]);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    ksum acc;
    std::size_t pairs = 0;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        const point_set super = S.make_set_if([&](std::uint32_t i) { return u[i] > levels[k]; });
        const energy_value p = fractional_perimeter(S, super, Om, theta);
        acc.add((levels[k + 1] - levels[k]) * p.value);
        pairs += p.pair_count;
    }
    return {acc.get(), theta, Om.size(), pairs};
}

/// Graph-cut perimeter proxy: sum over edges (x,y) inside Omega crossing the
/// boundary of E of min(mu_x, mu_y) / length. On grid(dim, n) with E a
/// coordinate halfspace this reproduces the cut-face count times h^(dim-1).
inline double graph_perimeter(const mm_space& S, const point_set& E, const point_set& Om) {
    if (!S.geodesic())
        throw precondition_error("graph perimeter needs edge structure",
                                 "space is in matrix mode");
    detail::require_same_space(S, E, "set E");
    detail::require_same_space(S, Om, "domain Omega");
    ksum acc;
    for (const auto& e : S.edges()) {
        if (!Om.contains(e.a) || !Om.contains(e.b)) continue;
        if (E.contains(e.a) == E.contains(e.b)) continue;
        acc.add(std::min(S.weight(e.a), S.weight(e.b)) / e.len);
    }
    return acc.get();
}

/// Weighted mean of u over B and the L^q deviation ( avg |u - mean|^q )^(1/q).
inline std::pair<double, double> mean_and_deviation(const mm_space& S, std::span<const double> u,
                                                    const point_set& B, double q) {
    if (B.is_empty()) throw precondition_error("averaging set is nonempty", "B is empty");
    if (!(q >= 1.0)) throw std::invalid_argument("q must be at least 1");
    detail::require_same_space(S, B, "set B");
    detail::require_finite(u, S.n());
    ksum num;
    for (std::uint32_t i : B.members()) num.add(u[i] * S.weight(i));
    const double mean = num.get() / B.mass();
    ksum dev;
    for (std::uint32_t i : B.members())
        dev.add(std::pow(std::abs(u[i] - mean), q) * S.weight(i));
    return {mean, std::pow(dev.get() / B.mass(), 1.0 / q)};
}

/// Largest difference quotient against points strictly inside B(x, r).
inline double lip_r(const mm_space& S, std::span<const double> u, std::uint32_t x, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
    detail::require_finite(u, S.n());
    std::vector<double> row(S.n());
    S.copy_distance_row(x, row.data());
    double best = 0.0;
    for (std::uint32_t y = 0; y < S.n(); ++y) {
        if (y == x || !(row[y] < r)) continue;
        best = std::max(best, std::abs(u[y] - u[x]) / row[y]);
    }
    return best;
}

/// Discrete pointwise Lipschitz constant: the nearest-neighbor slope maximum
/// (the smallest positive radius at which lip_r stabilizes).
inline double lip(const mm_space& S, std::span<const double> u, std::uint32_t x) {
    detail::require_finite(u, S.n());
    if (S.n() < 2) return 0.0;
    std::vector<double> row(S.n());
    S.copy_distance_row(x, row.data());
    double r0 = std::numeric_limits<double>::infinity();
    for (std::uint32_t y = 0; y < S.n(); ++y)
        if (y != x) r0 = std::min(r0, row[y]);
    double best = 0.0;
    for (std::uint32_t y = 0; y < S.n(); ++y)
        if (y != x && row[y] == r0) best = std::max(best, std::abs(u[y] - u[x]) / r0);
    return best;
}

/// Mollifier kernel rho(x,y) = (1 - theta) d(x,y)^(1-theta) / mu(B(x, d(x,y))).
inline double rho_kernel(const mm_space& S, double theta, std::uint32_t x, std::uint32_t y) {
    detail::require_theta(theta);
    if (x == y) throw std::invalid_argument("kernel is undefined on the diagonal");
    const double d = S.distance(x, y);
    return (1.0 - theta) * std::pow(d, 1.0 - theta) / S.ball_measure(x, d);
}

struct rho_sandwich_report {
    double theta = 0.0;
    std::size_t pairs_checked = 0;
    std::size_t violations = 0;
    bool pass = true;
    // first violating pair, if any
    std::uint32_t x = 0, y = 0;
};

/// Checks the dyadic-annulus envelope of the mollifier kernel on every pair
/// with 0 < d(x,y) < 1: with j the scale index 2^-j <= d < 2^-j+1, the kernel
/// must lie between (1-theta) 2^(-j(1-theta)) / mu(B(x, 2^-j+1)) and
/// C_mu (1-theta) 2^((-j+1)(1-theta)) / mu(B(x, 2^-j+1)). Pairs at distance
/// exactly 1 sit on the outermost annulus boundary and are excluded.
inline rho_sandwich_report rho_sandwich_check(const mm_space& S, double theta) {
    detail::require_theta(theta);
    const double c_mu = S.estimate_constants().c_mu;
    const std::size_t n = S.n();
    rho_sandwich_report rep;
    rep.theta = theta;
    std::vector<std::size_t> checked(n, 0), bad(n, 0);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> first_bad(n, {0, 0});
    parallel_for(n, [&](std::size_t xi) {
        const std::uint32_t x = static_cast<std::uint32_t>(xi);
        std::vector<double> row(n);
        S.copy_distance_row(x, row.data());
        detail::row_prefix rp;
        rp.build(row.data(), S.weights(), n);
        for (std::uint32_t y = 0; y < n; ++y) {
            const double d = row[y];
            if (y == x || !(d > 0.0) || !(d < 1.0)) continue;
            int j = static_cast<int>(std::ceil(-std::log2(d)));
            if (j < 1) j = 1;
            while (std::ldexp(1.0, -j) > d) ++j;
            while (j > 1 && std::ldexp(1.0, -j + 1) <= d) --j;
            const double outer = std::ldexp(1.0, -j + 1);
            const double env_mass = rp.mass_lt(outer);
            const double rho = (1.0 - theta) * std::pow(d, 1.0 - theta) / rp.mass_lt(d);
            const double lo = (1.0 - theta) * std::pow(2.0, -j * (1.0 - theta)) / env_mass;
            const double hi =
                c_mu * (1.0 - theta) * std::pow(2.0, (-j + 1) * (1.0 - theta)) / env_mass;
            ++checked[xi];
            const double slack = 1e-12;
            if (rho < lo * (1.0 - slack) || rho > hi * (1.0 + slack)) {
                if (bad[xi] == 0) first_bad[xi] = {x, y};
                ++bad[xi];
            }
        }
    });
    for (std::size_t xi = 0; xi < n; ++xi) {
        rep.pairs_checked += checked[xi];
        if (bad[xi] > 0 && rep.violations == 0) {
            rep.x = first_bad[xi].first;
            rep.y = first_bad[xi].second;
        }
        rep.violations += bad[xi];
    }
    rep.pass = rep.violations == 0;
    return rep;
}

/// Far-field mass of the kernel: sup over y of the integral of rho(x,y)/d
/// over x outside B(y, delta), plus the transposed supremum. Decays like
/// (1 - theta) delta^(-theta) as theta -> 1.
inline double rho_tail(const mm_space& S, double theta, double delta) {
    detail::require_theta(theta);
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    const auto& M = S.ball_measure_table();
    const std::size_t n = S.n();
    const auto& w = S.weights();
    std::vector<double> by_y(n, 0.0), by_x(n, 0.0);
    parallel_for(n, [&](std::size_t xi) {
        const std::uint32_t x = static_cast<std::uint32_t>(xi);
        const std::span<const double> row = S.dense_row(x);
        const double* mrow = M.data() + xi * n;
        ksum acc;
        for (std::uint32_t y = 0; y < n; ++y) {
            if (y == x || row[y] < delta) continue;
            acc.add((1.0 - theta) * w[y] / (std::pow(row[y], theta) * mrow[y]));
        }
        by_x[xi] = acc.get();
    });
    // integrating over x at fixed y uses the transposed kernel values
    parallel_for(n, [&](std::size_t yi) {
        const std::uint32_t y = static_cast<std::uint32_t>(yi);
        const std::span<const double> row = S.dense_row(y);
        ksum acc;
        for (std::uint32_t x = 0; x < n; ++x) {
            if (x == y || row[x] < delta) continue;
            acc.add((1.0 - theta) * w[x] /
                    (std::pow(row[x], theta) * M[static_cast<std::size_t>(x) * n + y]));
        }
        by_y[yi] = acc.get();
    });
    const double sup_y = *std::max_element(by_y.begin(), by_y.end());
    const double sup_x = *std::max_element(by_x.begin(), by_x.end());
    return sup_y + sup_x;
}

} // namespace fracper
