#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "inequality.hpp"

namespace fracper {

struct family_spec {
    std::string descriptor = "default";
    std::uint64_t seed = 42;
    std::size_t max_functions = 6;
    std::size_t max_sets = 6;
    int max_radius_levels = 8; // dyadic ball radii diam * 2^-m
};

struct labeled_function {
    std::string label;
    std::vector<double> values;
};

struct labeled_set {
    std::string label;
    point_set set;
};

/// Deterministic function family: distance profiles, a sine profile, two
/// seeded Lipschitz interpolants, and a coordinate when available.
inline std::vector<labeled_function> function_family(const mm_space& S, const family_spec& fs) {
    const std::size_t n = S.n();
    if (fs.descriptor == "constants")
        return {{"const", std::vector<double>(n, 1.0)}};
    const double diam = std::max(S.diameter(), 1e-300);
    std::vector<double> d0(n), d1(n);
    S.copy_distance_row(0, d0.data());
    std::uint32_t far = 0;
    for (std::uint32_t j = 0; j < n; ++j)
        if (d0[j] > d0[far]) far = j;
    S.copy_distance_row(far, d1.data());

    std::vector<labeled_function> fam;
    const auto push = [&](std::string label, std::vector<double> v) {
        if (fam.size() < fs.max_functions) fam.push_back({std::move(label), std::move(v)});
    };

    {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = d0[i] / diam;
        push("dist0", std::move(v));
    }
    {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(3.14159265358979323846 * d0[i] / diam);
        push("sine", std::move(v));
    }
    {
        // indicator halfspace: the sharpest witness the sweep carries
        std::vector<double> v(n);
        if (S.has_coords()) {
            double lo = S.coords()[0][0], hi = lo;
            for (const auto& c : S.coords()) { lo = std::min(lo, c[0]); hi = std::max(hi, c[0]); }
            const double mid = 0.5 * (lo + hi);
            for (std::size_t i = 0; i < n; ++i) v[i] = S.coords()[i][0] <= mid ? 1.0 : 0.0;
        } else {
            for (std::size_t i = 0; i < n; ++i) v[i] = d0[i] <= d1[i] ? 1.0 : 0.0;
        }
        push("step0", std::move(v));
    }
    for (int rep = 0; rep < 2; ++rep) {
        std::uint64_t st = fs.seed + static_cast<std::uint64_t>(rep);
        std::vector<std::uint32_t> anchors;
        std::vector<double> vals;
        for (int a = 0; a < 8; ++a) {
            anchors.push_back(static_cast<std::uint32_t>(detail::splitmix_below(st, n)));
            vals.push_back(static_cast<double>(detail::splitmix64(st) >> 11) * 0x1.0p-53);
        }
        std::vector<double> v(n, std::numeric_limits<double>::infinity());
        std::vector<double> row(n);
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            S.copy_distance_row(anchors[a], row.data());
            for (std::size_t i = 0; i < n; ++i) v[i] = std::min(v[i], vals[a] + row[i] / diam);
        }
        push(rep == 0 ? "lip_rand_a" : "lip_rand_b", std::move(v));
    }
    if (S.has_coords()) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = S.coords()[i][0];
        push("coord0", std::move(v));
    } else {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = std::sin(3.14159265358979323846 * d0[i] / diam) *
                   std::sin(3.14159265358979323846 * d1[i] / diam);
        push("lowfreq", std::move(v));
    }
    return fam;
}

/// Deterministic set family: a halfspace (coordinate or Voronoi), metric
/// balls, a distance shell, and a seeded random sublevel set.
inline std::vector<labeled_set> set_family(const mm_space& S, const family_spec& fs) {
    const std::size_t n = S.n();
    if (fs.descriptor == "constants")
        return {{"empty", point_set::empty(n)}, {"full", S.full_set()}};
    const double diam = std::max(S.diameter(), 1e-300);
    std::vector<double> d0(n);
    S.copy_distance_row(0, d0.data());
    std::uint32_t far = 0;
    for (std::uint32_t j = 0; j < n; ++j)
        if (d0[j] > d0[far]) far = j;
    std::vector<double> d1(n);
    S.copy_distance_row(far, d1.data());

    std::vector<labeled_set> fam;
    const auto push = [&](std::string label, point_set ps) {
        if (fam.size() < fs.max_sets) fam.push_back({std::move(label), std::move(ps)});
    };

    if (S.has_coords()) {
        double lo = S.coords()[0][0], hi = lo;
        for (const auto& c : S.coords()) { lo = std::min(lo, c[0]); hi = std::max(hi, c[0]); }
        const double mid = 0.5 * (lo + hi);
        push("halfspace0",
             S.make_set_if([&](std::uint32_t i) { return S.coords()[i][0] <= mid; }));
    } else {
        push("voronoi0", S.make_set_if([&](std::uint32_t i) { return d0[i] <= d1[i]; }));
    }
    push("ball_mid", S.ball(static_cast<std::uint32_t>(n / 2), diam / 4.0));
    push("shell",
         S.make_set_if([&](std::uint32_t i) { return d0[i] >= diam / 8.0 && d0[i] < diam / 3.0; }));
    {
        std::uint64_t st = fs.seed;
        std::vector<std::uint32_t> anchors;
        std::vector<double> vals;
        for (int a = 0; a < 8; ++a) {
            anchors.push_back(static_cast<std::uint32_t>(detail::splitmix_below(st, n)));
            vals.push_back(static_cast<double>(detail::splitmix64(st) >> 11) * 0x1.0p-53);
        }
        std::vector<double> v(n, std::numeric_limits<double>::infinity());
        std::vector<double> row(n);
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            S.copy_distance_row(anchors[a], row.data());
            for (std::size_t i = 0; i < n; ++i) v[i] = std::min(v[i], vals[a] + row[i] / diam);
        }
        std::vector<double> sorted = v;
        std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
        const double cut = sorted[n / 2];
        push("rand_sublevel", S.make_set_if([&](std::uint32_t i) { return v[i] <= cut; }));
    }
    push("ball_near", S.ball(0, diam / 6.0));
    if (S.has_coords() && S.coords()[0].size() >= 2) {
        double lo = S.coords()[0][1], hi = lo;
        for (const auto& c : S.coords()) { lo = std::min(lo, c[1]); hi = std::max(hi, c[1]); }
        const double mid = 0.5 * (lo + hi);
        push("halfspace1",
             S.make_set_if([&](std::uint32_t i) { return S.coords()[i][1] <= mid; }));
    }
    return fam;
}

struct sweep_row {
    double theta = 0.0;
    double q = 1.0;
    double max_ratio = 0.0;
    double median_ratio = 0.0;
    std::string argmax_witness;
};

struct theta_sweep {
    std::string kind;
    std::string family;
    std::uint64_t seed = 0;
    bool rescaled = true;
    std::vector<sweep_row> rows;
};

namespace detail {

// Per-theta powers of the distinct distances; folds pow() out of pair loops.
inline std::vector<std::vector<double>> neg_theta_powers(const mm_space& S,
                                                         const std::vector<double>& thetas) {
    const auto& crit = S.critical_radii();
    std::vector<std::vector<double>> lut(thetas.size(), std::vector<double>(crit.size()));
    for (std::size_t t = 0; t < thetas.size(); ++t)
        for (std::size_t k = 0; k < crit.size(); ++k)
            lut[t][k] = std::pow(crit[k], -thetas[t]);
    return lut;
}

inline std::vector<double> dyadic_ball_radii(const mm_space& S, int max_levels) {
    std::vector<double> radii;
    double r = S.diameter();
    for (int m = 0; m < max_levels && r >= S.min_positive_distance(); ++m, r *= 0.5)
        radii.push_back(r);
    return radii;
}

} // namespace detail

/// Evaluates the chosen inequality over every family member and every ball of
/// the dyadic family (all centers x radii diam * 2^-m), for each theta in the
/// grid, and records the per-theta maximum and median ratios. Deterministic:
/// reruns with the same (space, kind, grid, family) are bitwise identical.
/// Balls use tau = 1. q defaults to Q/(Q - theta) unless fixed_q > 0.
inline theta_sweep sweep(const mm_space& S, ineq_kind kind, std::vector<double> thetas,
                         const family_spec& fs, bool rescaled = true, double fixed_q = 0.0) {
    for (double t : thetas) detail::require_theta(t);
    for (std::size_t i = 1; i < thetas.size(); ++i)
        if (!(thetas[i] > thetas[i - 1]))
            throw std::invalid_argument("theta grid must be strictly increasing");
    if (thetas.empty()) throw std::invalid_argument("theta grid is empty");

    theta_sweep out;
    out.kind = to_string(kind);
    out.family = fs.descriptor;
    out.seed = fs.seed;
    out.rescaled = rescaled;

    const std::size_t nth = thetas.size();
    std::vector<double> qs(nth);
    for (std::size_t t = 0; t < nth; ++t)
        qs[t] = fixed_q > 0.0 ? fixed_q : default_q(S, thetas[t]);

    const bool fun_kind = kind_takes_function(kind);
    const auto funcs = fun_kind ? function_family(S, fs) : std::vector<labeled_function>{};
    const auto sets = fun_kind ? std::vector<labeled_set>{} : set_family(S, fs);
    const std::size_t members = fun_kind ? funcs.size() : sets.size();
    if (members == 0) throw std::invalid_argument("family is empty");

    const auto member_label = [&](std::size_t m) {
        return fun_kind ? "f:" + funcs[m].label : "E:" + sets[m].label;
    };

    if (!kind_takes_ball(kind)) {
        // global kinds: one instance per member
        std::vector<std::vector<double>> ratios(nth, std::vector<double>(members, 0.0));
        const point_set X = S.full_set();
        for (std::size_t m = 0; m < members; ++m) {
            for (std::size_t t = 0; t < nth; ++t) {
                ineq_report rep;
                if (fun_kind)
                    rep = report(S, kind, funcs[m].values, std::nullopt, thetas[t], qs[t], 1.0,
                                 member_label(m));
                else if (sets[m].set.size() == S.n())
                    continue; // full-space sets are outside the global-iso contract
                else
                    rep = report(S, kind, sets[m].set, std::nullopt, thetas[t], qs[t], 1.0,
                                 member_label(m));
                const double scale = detail::scaling_factor(kind, thetas[t], 0.0, rescaled);
                ratios[t][m] = detail::finish_ratio(rep.lhs, scale, rep.rhs_raw);
            }
        }
        for (std::size_t t = 0; t < nth; ++t) {
            sweep_row row;
            row.theta = thetas[t];
            row.q = qs[t];
            std::size_t arg = 0;
            for (std::size_t m = 0; m < members; ++m)
                if (ratios[t][m] > ratios[t][arg]) arg = m;
            row.max_ratio = ratios[t][arg];
            row.argmax_witness = member_label(arg);
            std::vector<double> tmp = ratios[t];
            std::sort(tmp.begin(), tmp.end());
            row.median_ratio = tmp[(tmp.size() - 1) / 2];
            out.rows.push_back(std::move(row));
        }
        return out;
    }

    // ball kinds: incremental nested-prefix engine, one pass per center
    const auto& M = S.ball_measure_table();
    const auto& rank = S.distance_rank_table();
    const auto lut = detail::neg_theta_powers(S, thetas);
    const std::vector<double> radii = detail::dyadic_ball_radii(S, fs.max_radius_levels);
    const std::size_t levels = radii.size();
    const std::size_t n = S.n();
    const auto& w = S.weights();

    // ratios[t][(c * members + m) * levels + l]
    std::vector<std::vector<double>> ratios(nth,
                                            std::vector<double>(n * members * levels, 0.0));

    parallel_for(n, [&](std::size_t ci) {
        const std::uint32_t c = static_cast<std::uint32_t>(ci);
        const std::span<const double> row = S.dense_row(c);
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (row[a] != row[b]) return row[a] < row[b];
            return a < b;
        });
        // prefix length for each ball radius (strict inequality)
        std::vector<std::size_t> boundary(levels);
        for (std::size_t l = 0; l < levels; ++l) {
            std::size_t cnt = 0;
            while (cnt < n && row[order[cnt]] < radii[l]) ++cnt;
            boundary[l] = cnt;
        }

        std::vector<double> rhs_acc(members * nth, 0.0); // theta-indexed pair sums
        std::vector<double> row_acc(members * nth, 0.0);
        double run_mass = 0.0;
        std::vector<double> run_usum(members, 0.0); // function kinds
        std::vector<double> run_in(members, 0.0);   // set kinds: mass of prefix ∩ E
        std::size_t next_level = levels; // radii are descending; smallest first
        // emit instances smallest-radius first as the prefix grows
        std::vector<std::size_t> emit_order(levels);
        std::iota(emit_order.begin(), emit_order.end(), std::size_t{0});
        std::sort(emit_order.begin(), emit_order.end(),
                  [&](std::size_t a, std::size_t b) { return boundary[a] < boundary[b]; });
        std::size_t emit_pos = 0;
        (void)next_level;

        const auto emit = [&](std::size_t level) {
            if (run_mass <= 0.0) return;
            for (std::size_t m = 0; m < members; ++m) {
                for (std::size_t t = 0; t < nth; ++t) {
                    double lhs = 0.0, rhs_raw = 0.0;
                    const double q = qs[t];
                    if (fun_kind) {
                        const double mean = run_usum[m] / run_mass;
                        double dev = 0.0;
                        const auto& u = funcs[m].values;
                        for (std::size_t p = 0; p < boundary[level]; ++p) {
                            const std::uint32_t x = order[p];
                            const double a = std::abs(u[x] - mean);
                            dev += (q == 1.0 ? a : (q == 2.0 ? a * a : std::pow(a, q))) * w[x];
                        }
                        if (kind == ineq_kind::bbm_poincare) {
                            lhs = std::pow(dev / run_mass, 1.0 / q);
                            rhs_raw = rhs_acc[m * nth + t] / run_mass;
                        } else {
                            lhs = std::pow(dev, 1.0 / q);
                            rhs_raw = rhs_acc[m * nth + t];
                        }
                    } else {
                        const double inmass = run_in[m];
                        const double minmass = std::min(inmass, run_mass - inmass);
                        if (kind == ineq_kind::bbm_rel_iso) {
                            lhs = std::pow(minmass / run_mass, 1.0 / q);
                            rhs_raw = rhs_acc[m * nth + t] / run_mass;
                        } else {
                            lhs = std::pow(minmass, 1.0 / q);
                            rhs_raw = rhs_acc[m * nth + t];
                        }
                    }
                    const double scale =
                        detail::scaling_factor(kind, thetas[t], radii[level], rescaled);
                    const double ratio = detail::finish_ratio(lhs, scale, rhs_raw);
                    ratios[t][(ci * members + m) * levels + level] = ratio;
                }
            }
        };

        for (std::size_t pos = 0; pos <= n; ++pos) {
            while (emit_pos < levels && boundary[emit_order[emit_pos]] == pos) {
                emit(emit_order[emit_pos]);
                ++emit_pos;
            }
            if (pos == n) break;
            const std::uint32_t p = order[pos];
            // pair contributions against the existing prefix
            std::fill(row_acc.begin(), row_acc.end(), 0.0);
            const double* rrow = row.data();
            const std::uint32_t* krow = rank.data() + static_cast<std::size_t>(p) * n;
            const double* mrow = M.data() + static_cast<std::size_t>(p) * n;
            for (std::size_t xp = 0; xp < pos; ++xp) {
                const std::uint32_t x = order[xp];
                (void)rrow;
                const std::uint32_t rk = krow[x];
                const double mpx = mrow[x];
                const double mxp = M[static_cast<std::size_t>(x) * n + p];
                if (fun_kind) {
                    const double g = w[p] * w[x] * (1.0 / mpx + 1.0 / mxp);
                    for (std::size_t m = 0; m < members; ++m) {
                        const double du = std::abs(funcs[m].values[p] - funcs[m].values[x]);
                        if (du == 0.0) continue;
                        const double f = du * g;
                        for (std::size_t t = 0; t < nth; ++t)
                            row_acc[m * nth + t] += f * lut[t][rk];
                    }
                } else {
                    const double g = 2.0 * w[p] * w[x] / (mpx + mxp);
                    for (std::size_t m = 0; m < members; ++m) {
                        if (sets[m].set.contains(p) == sets[m].set.contains(x)) continue;
                        for (std::size_t t = 0; t < nth; ++t)
                            row_acc[m * nth + t] += g * lut[t][rk];
                    }
                }
            }
            for (std::size_t i = 0; i < members * nth; ++i) rhs_acc[i] += row_acc[i];
            run_mass += w[p];
            for (std::size_t m = 0; m < members; ++m) {
                if (fun_kind)
                    run_usum[m] += funcs[m].values[p] * w[p];
                else if (sets[m].set.contains(p))
                    run_in[m] += w[p];
            }
        }
    });

    for (std::size_t t = 0; t < nth; ++t) {
        sweep_row row;
        row.theta = thetas[t];
        row.q = qs[t];
        const auto& r = ratios[t];
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < r.size(); ++i)
            if (std::isfinite(r[i]) && r[i] > best) { best = r[i]; arg = i; }
        row.max_ratio = best < 0.0 ? 0.0 : best;
        const std::size_t level = arg % levels;
        const std::size_t m = (arg / levels) % members;
        const std::size_t c = arg / (levels * members);
        row.argmax_witness = member_label(m) + "|ball(c=" + std::to_string(c) +
                             ",r=" + std::to_string(radii[level]) + ")";
        std::vector<double> tmp = r;
        std::sort(tmp.begin(), tmp.end());
        row.median_ratio = tmp[(tmp.size() - 1) / 2];
        out.rows.push_back(std::move(row));
    }
    return out;
}

struct gauge_result {
    double poincare_c = 0.0;
    double rel_iso_c = 0.0;
    double quotient = std::numeric_limits<double>::quiet_NaN();
    bool defined = false;
};

/// Empirical equivalence gauge at one (theta, q): the best Poincare constant
/// over the function family against the best relative-isoperimetric constant
/// over the set family, and their quotient.
inline gauge_result equivalence_gauge(const mm_space& S, double theta, double q,
                                      const family_spec& fs) {
    const auto p = sweep(S, ineq_kind::bbm_poincare, {theta}, fs, true, q);
    const auto i = sweep(S, ineq_kind::bbm_rel_iso, {theta}, fs, true, q);
    gauge_result g;
    g.poincare_c = p.rows[0].max_ratio;
    g.rel_iso_c = i.rows[0].max_ratio;
    if (g.poincare_c > 0.0 && g.rel_iso_c > 0.0) {
        g.quotient = g.poincare_c / g.rel_iso_c;
        g.defined = true;
    }
    return g;
}

} // namespace fracper
