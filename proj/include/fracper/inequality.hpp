#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covers.hpp"
#include "errors.hpp"
#include "functionals.hpp"
#include "space.hpp"

namespace fracper {

enum class ineq_kind {
    bbm_poincare,
    bbm_rel_iso,
    improved_poincare,
    improved_rel_iso,
    bbm_sobolev,
    bbm_global_iso,
};

inline const char* to_string(ineq_kind k) {
    switch (k) {
        case ineq_kind::bbm_poincare: return "bbm_poincare";
        case ineq_kind::bbm_rel_iso: return "bbm_rel_iso";
        case ineq_kind::improved_poincare: return "improved_poincare";
        case ineq_kind::improved_rel_iso: return "improved_rel_iso";
        case ineq_kind::bbm_sobolev: return "bbm_sobolev";
        case ineq_kind::bbm_global_iso: return "bbm_global_iso";
    }
    return "?";
}

inline std::optional<ineq_kind> ineq_kind_from(const std::string& s) {
    for (ineq_kind k : {ineq_kind::bbm_poincare, ineq_kind::bbm_rel_iso,
                        ineq_kind::improved_poincare, ineq_kind::improved_rel_iso,
                        ineq_kind::bbm_sobolev, ineq_kind::bbm_global_iso})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

inline bool kind_takes_function(ineq_kind k) {
    return k == ineq_kind::bbm_poincare || k == ineq_kind::improved_poincare ||
           k == ineq_kind::bbm_sobolev;
}

inline bool kind_takes_ball(ineq_kind k) {
    return k != ineq_kind::bbm_sobolev && k != ineq_kind::bbm_global_iso;
}

struct ball_spec {
    std::uint32_t center = 0;
    double radius = 0.0;
};

struct ineq_report {
    std::string kind;
    double theta = 0.0;
    double q = 1.0;
    double tau = 1.0;
    double lhs = 0.0;
    double rhs_raw = 0.0;
    double scaling = 1.0;
    double ratio = 0.0;
    std::string witness;
    std::vector<std::string> flags;
    bool has_pass = false; // set for the boolean-style annulus report
    bool pass = false;
    double slack = std::numeric_limits<double>::quiet_NaN();
};

/// Exponent used for q defaults and density windows: the larger of the fitted
/// relative lower mass bound exponent and the iterated-doubling value, so the
/// resulting q stays finite for every theta in (0,1).
inline double mass_bound_exponent(const mm_space& S) {
    const auto sc = S.estimate_constants();
    return std::max(sc.q_d, sc.q_d_doubling);
}

inline double default_q(const mm_space& S, double theta) {
    const double Q = mass_bound_exponent(S);
    if (!(Q > theta))
        throw precondition_error("mass bound exponent exceeds theta",
                                 "Q = " + std::to_string(Q) + " with theta = " +
                                     std::to_string(theta));
    return Q / (Q - theta);
}

namespace detail {

inline double finish_ratio(double lhs, double scaling, double rhs_raw) {
    if (lhs == 0.0) return 0.0;
    if (rhs_raw == 0.0) return std::numeric_limits<double>::infinity();
    return lhs / (scaling * rhs_raw);
}

inline double scaling_factor(ineq_kind k, double theta, double r, bool rescaled) {
    switch (k) {
        case ineq_kind::bbm_poincare:
        case ineq_kind::bbm_rel_iso:
            return (rescaled ? (1.0 - theta) : 1.0) * std::pow(r, theta);
        case ineq_kind::improved_poincare:
        case ineq_kind::improved_rel_iso:
            return rescaled ? (1.0 - theta) : 1.0;
        case ineq_kind::bbm_sobolev:
        case ineq_kind::bbm_global_iso:
            return rescaled ? theta * (1.0 - theta) : 1.0;
    }
    return 1.0;
}

} // namespace detail

/// Evaluates one inequality instance with a function witness.
inline ineq_report report(const mm_space& S, ineq_kind kind, std::span<const double> u,
                          std::optional<ball_spec> ball, double theta, double q = 0.0,
                          double tau = 1.0, std::string witness = "u") {
    if (!kind_takes_function(kind))
        throw std::invalid_argument(std::string(to_string(kind)) +
                                    " takes a set witness, not a function");
    detail::require_theta(theta);
    if (q <= 0.0) q = default_q(S, theta);
    if (kind_takes_ball(kind) && !ball)
        throw std::invalid_argument(std::string(to_string(kind)) + " needs a ball");

    ineq_report rep;
    rep.kind = to_string(kind);
    rep.theta = theta;
    rep.q = q;
    rep.tau = tau;
    rep.witness = std::move(witness);

    if (kind == ineq_kind::bbm_sobolev) {
        ksum lq;
        for (std::uint32_t i = 0; i < S.n(); ++i)
            lq.add(std::pow(std::abs(u[i]), q) * S.weight(i));
        rep.lhs = std::pow(lq.get(), 1.0 / q);
        rep.rhs_raw = fractional_energy(S, u, S.full_set(), theta, kernel_kind::asymmetric).value;
        rep.scaling = detail::scaling_factor(kind, theta, 0.0, true);
        rep.ratio = detail::finish_ratio(rep.lhs, rep.scaling, rep.rhs_raw);
        return rep;
    }

    const point_set B = S.ball(ball->center, ball->radius);
    const point_set TB = tau == 1.0 ? B : S.ball(ball->center, tau * ball->radius);
    if (B.is_empty()) throw precondition_error("ball is nonempty", "empty ball");
    const auto [mean, dev] = mean_and_deviation(S, u, B, q);
    (void)mean;
    const double energy = fractional_energy(S, u, TB, theta, kernel_kind::asymmetric).value;
    if (kind == ineq_kind::bbm_poincare) {
        rep.lhs = dev;
        rep.rhs_raw = energy / TB.mass();
    } else { // improved_poincare: unnormalized on both sides
        rep.lhs = dev * std::pow(B.mass(), 1.0 / q);
        rep.rhs_raw = energy;
    }
    rep.scaling = detail::scaling_factor(kind, theta, ball->radius, true);
    rep.ratio = detail::finish_ratio(rep.lhs, rep.scaling, rep.rhs_raw);
    return rep;
}

/// Evaluates one inequality instance with a set witness.
inline ineq_report report(const mm_space& S, ineq_kind kind, const point_set& E,
                          std::optional<ball_spec> ball, double theta, double q = 0.0,
                          double tau = 1.0, std::string witness = "E") {
    if (kind_takes_function(kind))
        throw std::invalid_argument(std::string(to_string(kind)) +
                                    " takes a function witness, not a set");
    detail::require_theta(theta);
    detail::require_same_space(S, E, "set E");
    if (q <= 0.0) q = default_q(S, theta);
    if (kind_takes_ball(kind) && !ball)
        throw std::invalid_argument(std::string(to_string(kind)) + " needs a ball");

    ineq_report rep;
    rep.kind = to_string(kind);
    rep.theta = theta;
    rep.q = q;
    rep.tau = tau;
    rep.witness = std::move(witness);

    if (kind == ineq_kind::bbm_global_iso) {
        if (E.size() == S.n())
            throw precondition_error("global isoperimetry needs a proper subset",
                                     "E covers the whole space");
        rep.lhs = std::pow(E.mass(), 1.0 / q);
        rep.rhs_raw = fractional_perimeter(S, E, S.full_set(), theta).value;
        rep.scaling = detail::scaling_factor(kind, theta, 0.0, true);
        rep.ratio = detail::finish_ratio(rep.lhs, rep.scaling, rep.rhs_raw);
        return rep;
    }

    const point_set B = S.ball(ball->center, ball->radius);
    const point_set TB = tau == 1.0 ? B : S.ball(ball->center, tau * ball->radius);
    const double inB = S.set_intersect(B, E).mass();
    const double outB = B.mass() - inB;
    const double minmass = std::min(inB, outB);
    const double per = fractional_perimeter(S, E, TB, theta).value;
    if (kind == ineq_kind::bbm_rel_iso) {
        rep.lhs = std::pow(minmass / B.mass(), 1.0 / q);
        rep.rhs_raw = per / TB.mass();
    } else { // improved_rel_iso
        rep.lhs = std::pow(minmass, 1.0 / q);
        rep.rhs_raw = per;
    }
    rep.scaling = detail::scaling_factor(kind, theta, ball->radius, true);
    rep.ratio = detail::finish_ratio(rep.lhs, rep.scaling, rep.rhs_raw);
    return rep;
}

/// Boxing inequality report: the normalized radius sum of the boxing cover of
/// U against theta (1 - theta) P_theta(U, X).
inline ineq_report boxing_report(const mm_space& S, const point_set& U, double theta,
                                 double tau = 1.0) {
    const ball_cover c = boxing_cover(S, U, theta, tau);
    ineq_report rep;
    rep.kind = "boxing";
    rep.theta = theta;
    rep.q = 1.0;
    rep.tau = tau;
    rep.witness = "U";
    rep.lhs = c.balls.empty() ? 0.0 : c.certificate.ratio_sum;
    rep.rhs_raw = fractional_perimeter(S, U, S.full_set(), theta).value;
    rep.scaling = theta * (1.0 - theta);
    rep.ratio = detail::finish_ratio(rep.lhs, rep.scaling, rep.rhs_raw);
    return rep;
}

/// Per-instance chain behind the indicator reduction: returns
/// ( (min/mu(B))^{1/q}, (2 rho (1-rho))^{1/q}, (2^{q+1} avg |chi_E - rho|^q)^{1/q} ),
/// which must be nondecreasing.
inline std::array<double, 3> indicator_chain(const mm_space& S, const point_set& E,
                                             const point_set& B, double q) {
    if (B.is_empty()) throw precondition_error("chain ball is nonempty", "empty ball");
    const double inB = S.set_intersect(B, E).mass();
    const double rho = inB / B.mass();
    const double a = std::pow(std::min(inB, B.mass() - inB) / B.mass(), 1.0 / q);
    const double b = std::pow(2.0 * rho * (1.0 - rho), 1.0 / q);
    const double avg = rho * std::pow(1.0 - rho, q) + (1.0 - rho) * std::pow(rho, q);
    const double c = std::pow(std::pow(2.0, q + 1.0) * avg, 1.0 / q);
    return {a, b, c};
}

// ---------------------------------------------------------------------------
// scale-indexed reports
// ---------------------------------------------------------------------------

/// Largest radius at which E still fills a gamma-fraction of the ball around
/// x0, doubled; at R = growth_radius the density drops below gamma for every
/// r >= R while the half-radius ball is still gamma-full.
inline double growth_radius(const mm_space& S, const point_set& E, std::uint32_t x0,
                            double gamma) {
    detail::require_same_space(S, E, "set E");
    if (!E.contains(x0))
        throw precondition_error("growth center lies in E", "x0 is outside E");
    std::vector<double> row(S.n());
    S.copy_distance_row(x0, row.data());
    std::vector<std::uint32_t> order(S.n());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t p, std::uint32_t q2) {
        if (row[p] != row[q2]) return row[p] < row[q2];
        return p < q2;
    });
    double alpha = 0.0, mass = 0.0, emass = 0.0;
    std::size_t i = 0;
    std::vector<double> cuts, dens;
    while (i < S.n()) {
        std::size_t g = i;
        const double d = row[order[i]];
        while (g < S.n() && row[order[g]] == d) ++g;
        if (d > 0.0) {
            cuts.push_back(d);
            dens.push_back(emass / mass);
        }
        for (std::size_t t = i; t < g; ++t) {
            mass += S.weight(order[t]);
            if (E.contains(order[t])) emass += S.weight(order[t]);
        }
        i = g;
    }
    for (std::size_t t = cuts.size(); t-- > 0;)
        if (dens[t] >= gamma) { alpha = cuts[t]; break; }
    return 2.0 * alpha;
}

/// Nonlocal isoperimetric report at a fixed annular scale: the density of E
/// in B must lie in [2^{-kQ}, 1/2]; the right side is the doubly averaged
/// jump of the indicator over the annuli B(x, 2^-k r) \ B(x, 2^-k-1 r).
inline ineq_report frac_iso_report(const mm_space& S, std::uint32_t center, double radius,
                                   const point_set& E, int k) {
    if (!S.geodesic())
        throw precondition_error("annular isoperimetry needs a geodesic space",
                                 "space is in matrix mode");
    detail::require_same_space(S, E, "set E");
    const double Q = mass_bound_exponent(S);
    const point_set B = S.ball(center, radius);
    const double rho = S.set_intersect(B, E).mass() / B.mass();
    if (!(rho > 0.0) || rho > 0.5)
        throw precondition_error("ball density lies in (0, 1/2]",
                                 "density " + std::to_string(rho));
    const int k_min = static_cast<int>(std::ceil(std::log2(1.0 / rho) / Q));
    if (std::pow(2.0, -double(k) * Q) > rho)
        throw precondition_error("density window admits the scale index",
                                 "k = " + std::to_string(k) + "; admissible k >= " +
                                     std::to_string(k_min));

    ineq_report rep;
    rep.kind = "frac_iso_lemma";
    rep.theta = 0.0;
    rep.q = Q;
    rep.witness = "E";
    rep.lhs = std::pow(rho, (Q - 1.0) / Q);

    const double r_out = std::ldexp(radius, -k);
    const double r_in = std::ldexp(radius, -k - 1);
    ksum outer;
    std::size_t skipped = 0;
    for (std::uint32_t x : B.members()) {
        ksum num;
        double amass = 0.0;
        std::vector<double> row(S.n());
        S.copy_distance_row(x, row.data());
        const bool ex = E.contains(x);
        ksum am;
        for (std::uint32_t y : B.members()) {
            if (!(row[y] >= r_in && row[y] < r_out)) continue;
            am.add(S.weight(y));
            if (E.contains(y) != ex) num.add(S.weight(y));
        }
        amass = am.get();
        if (amass == 0.0) { ++skipped; continue; }
        outer.add(S.weight(x) * num.get() / amass);
    }
    if (skipped > 0) rep.flags.push_back("empty_annulus_skipped:" + std::to_string(skipped));
    rep.rhs_raw = std::ldexp(1.0, k) * outer.get() / B.mass();
    rep.scaling = 1.0;
    rep.ratio = detail::finish_ratio(rep.lhs, 1.0, rep.rhs_raw);
    return rep;
}

/// Admissible scale indices for frac_iso_report on (B, E): [k_min, k_floor].
inline std::pair<int, int> frac_iso_scale_range(const mm_space& S, std::uint32_t center,
                                                double radius, const point_set& E) {
    const double Q = mass_bound_exponent(S);
    const point_set B = S.ball(center, radius);
    const double rho = S.set_intersect(B, E).mass() / B.mass();
    if (!(rho > 0.0) || rho > 0.5)
        throw precondition_error("ball density lies in (0, 1/2]",
                                 "density " + std::to_string(rho));
    const int k_min = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / rho) / Q)));
    int k_floor = k_min;
    while (std::ldexp(radius, -(k_floor + 1) - 1) >= S.min_positive_distance()) ++k_floor;
    return {k_min, std::max(k_min, k_floor)};
}

/// Annulus-average stability report: checks mu(B1) against the (4/eps)-scaled
/// total deviation of the indicator from its annular averages. The admissible
/// inner radius is floor-clamped at twice the point spacing; empty annuli
/// contribute the worst case mu_x and are flagged.
inline ineq_report annuli_report(const mm_space& S, std::uint32_t c0, double r0,
                                 std::uint32_t c1, double r1, const point_set& E, double a,
                                 double eps) {
    if (!S.geodesic())
        throw precondition_error("annulus stability needs a geodesic space",
                                 "space is in matrix mode");
    detail::require_same_space(S, E, "set E");
    if (!(eps > 0.0 && eps <= 0.5))
        throw std::invalid_argument("eps must lie in (0, 1/2]");
    if (!(a <= r0 / 2.0))
        throw precondition_error("annulus width fits the ball",
                                 "a = " + std::to_string(a) + " exceeds r0/2");
    const auto sc = S.estimate_constants();
    const double bound =
        a / (2.0 * std::pow(32.0 * std::pow(sc.c_mu, 4.0) * sc.c_a, 1.0 / sc.beta));
    const double floor_bound = 2.0 * S.min_positive_distance();
    const double eff_bound = std::max(bound, floor_bound);
    ineq_report rep;
    rep.kind = "annuli_lemma";
    rep.witness = "E";
    if (r1 > eff_bound)
        throw precondition_error("inner ball radius is below the stability bound",
                                 "r1 = " + std::to_string(r1) + "; bound = " +
                                     std::to_string(bound) + " (floor-clamped to " +
                                     std::to_string(eff_bound) + ")");
    if (bound < floor_bound) rep.flags.push_back("radius_bound_floor_clamped");

    const point_set B0 = S.ball(c0, r0);
    const point_set B1 = S.ball(c1, r1);
    if (!B1.subset_of(B0))
        throw precondition_error("inner ball lies inside the outer ball", "B1 escapes B0");
    const double rho1 = S.set_intersect(B1, E).mass() / B1.mass();
    if (!(rho1 >= eps && rho1 <= 1.0 - eps))
        throw precondition_error("inner ball density lies in [eps, 1-eps]",
                                 "density " + std::to_string(rho1) + " with eps = " +
                                     std::to_string(eps));

    ksum total;
    std::size_t empty_annuli = 0;
    std::vector<double> row(S.n());
    for (std::uint32_t x : B1.members()) {
        S.copy_distance_row(x, row.data());
        ksum am, em;
        for (std::uint32_t y : B0.members()) {
            if (!(row[y] >= a / 2.0 && row[y] < a)) continue;
            am.add(S.weight(y));
            if (E.contains(y)) em.add(S.weight(y));
        }
        const double chi = E.contains(x) ? 1.0 : 0.0;
        if (am.get() == 0.0) {
            ++empty_annuli;
            total.add(S.weight(x)); // worst case |chi - avg| = 1
        } else {
            total.add(std::abs(chi - em.get() / am.get()) * S.weight(x));
        }
    }
    if (empty_annuli > 0)
        rep.flags.push_back("empty_annulus_worst_case:" + std::to_string(empty_annuli));
    rep.lhs = B1.mass();
    rep.rhs_raw = (4.0 / eps) * total.get();
    rep.scaling = 1.0;
    rep.ratio = detail::finish_ratio(rep.lhs, 1.0, rep.rhs_raw);
    rep.has_pass = true;
    rep.pass = rep.lhs <= rep.rhs_raw;
    rep.slack = rep.lhs > 0.0 ? rep.rhs_raw / rep.lhs : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

/// Large-scale isoperimetric report: mu(B(x0,R))/R^theta against theta times
/// the one-sided kernel sum over (B(x0,R) ∩ E) x (X \ E), under the density
/// growth hypothesis at (x0, R, gamma).
inline ineq_report theta_iso_report(const mm_space& S, const point_set& E, std::uint32_t x0,
                                    double R, double gamma, double theta) {
    detail::require_theta(theta);
    detail::require_same_space(S, E, "set E");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("gamma must lie in (0,1)");
    const auto density_at = [&](double r) {
        const point_set b = S.ball(x0, r);
        return S.set_intersect(b, E).mass() / b.mass();
    };
    if (density_at(R / 2.0) < gamma)
        throw precondition_error("half-radius ball is gamma-full",
                                 "density at R/2 = " + std::to_string(density_at(R / 2.0)));
    {
        const auto& crit = S.critical_radii();
        std::vector<double> checks{R};
        for (double c : crit)
            if (c > R) checks.push_back(c);
        checks.push_back(2.0 * S.diameter() + 1.0);
        for (double r : checks)
            if (density_at(r) >= gamma)
                throw precondition_error("density stays below gamma at large radii",
                                         "density >= gamma at r = " + std::to_string(r));
    }

    ineq_report rep;
    rep.kind = "theta_iso_lemma";
    rep.theta = theta;
    rep.witness = "E";
    const point_set B = S.ball(x0, R);
    rep.lhs = B.mass() / std::pow(R, theta);

    const auto& M = S.ball_measure_table();
    const std::size_t n = S.n();
    const point_set BE = S.set_intersect(B, E);
    std::vector<double> partial(BE.members().size(), 0.0);
    parallel_for(BE.members().size(), [&](std::size_t ai) {
        const std::uint32_t x = BE.members()[ai];
        const std::span<const double> row = S.dense_row(x);
        const double* mrow = M.data() + static_cast<std::size_t>(x) * n;
        ksum acc;
        for (std::uint32_t y = 0; y < n; ++y) {
            if (E.contains(y)) continue;
            acc.add(S.weight(x) * S.weight(y) / (std::pow(row[y], theta) * mrow[y]));
        }
        partial[ai] = acc.get();
    });
    ksum sum;
    for (double p : partial) sum.add(p);
    rep.rhs_raw = theta * sum.get();
    rep.scaling = 1.0;
    rep.ratio = detail::finish_ratio(rep.lhs, 1.0, rep.rhs_raw);
    return rep;
}

} // namespace fracper
