#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "functionals.hpp"
#include "ksum.hpp"
#include "point_set.hpp"
#include "space.hpp"

namespace fracper {

struct cover_ball {
    std::uint32_t center = 0;
    double radius = 0.0;
    bool floor_flagged = false; // produced at the discreteness floor; exempt from density bands
};

struct cover_certificate {
    bool disjoint = false;
    bool covers_target = false;
    bool density_band_ok = false;
    bool dyadic_ok = true;
    double density_lo = std::numeric_limits<double>::quiet_NaN(); // achieved min over balls
    double density_hi = std::numeric_limits<double>::quiet_NaN(); // achieved max over balls
    double ratio_sum = std::numeric_limits<double>::quiet_NaN();  // sum mu(B_i) / r_i^theta
    double quotient = std::numeric_limits<double>::quiet_NaN();   // ratio_sum / reference energy
    double mass_bound_constant = std::numeric_limits<double>::quiet_NaN();
    std::size_t floor_flags = 0;
    bool threshold_clamped = false;
    std::string note;

    bool pass() const { return disjoint && covers_target && density_band_ok && dyadic_ok; }
};

/// A ball collection plus everything needed to re-derive its certificate from
/// raw space queries: the target that must be covered by inflated balls, the
/// set whose per-ball density is certified, the admissible band, and the
/// dyadic base radius when radii are required to be r0 / 2^N.
struct ball_cover {
    std::string algorithm;
    std::vector<cover_ball> balls;
    double tau = 1.0;
    double inflation = 5.0;       // coverage uses ball(center, inflation * radius)
    double disjoint_scale = 1.0;  // disjointness holds for ball(center, disjoint_scale * radius)
    double theta = std::numeric_limits<double>::quiet_NaN();

    std::optional<point_set> target;       // must lie inside the union of inflated balls
    std::optional<point_set> density_set;  // per-ball density band applies to this set
    double band_lo = 0.0;
    double band_hi = 1.0;
    bool band_hi_strict = false;
    std::optional<double> dyadic_r0;
    std::optional<point_set> container;    // all balls must lie inside this set
    std::vector<std::pair<std::uint32_t, double>> five_r_candidates;

    cover_certificate certificate;
};

namespace detail {

inline bool is_dyadic_fraction(double r0, double radius) {
    double r = r0;
    for (int k = 0; k < 80; ++k) {
        if (r == radius) return true;
        if (r < radius) return false;
        r *= 0.5;
    }
    return false;
}

inline double ratio_sum_of(const mm_space& S, const std::vector<cover_ball>& balls, double theta) {
    ksum acc;
    for (const auto& b : balls)
        acc.add(S.ball_measure(b.center, b.radius) / std::pow(b.radius, theta));
    return acc.get();
}

} // namespace detail

/// Independent certificate checker: recomputes disjointness, coverage,
/// density bands, dyadic radii, and the ratio sum from raw ball queries,
/// trusting nothing stored by the constructing algorithm.
inline cover_certificate verify_cover(const mm_space& S, const ball_cover& c) {
    cover_certificate out;
    const std::size_t k = c.balls.size();

    std::vector<point_set> scaled(k), inflated(k);
    for (std::size_t i = 0; i < k; ++i) {
        scaled[i] = S.ball(c.balls[i].center, c.disjoint_scale * c.balls[i].radius);
        inflated[i] = S.ball(c.balls[i].center, c.inflation * c.balls[i].radius);
    }

    out.disjoint = true;
    for (std::size_t i = 0; i < k && out.disjoint; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (scaled[i].intersects(scaled[j])) {
                out.disjoint = false;
                out.note += "balls " + std::to_string(i) + "," + std::to_string(j) + " overlap; ";
                break;
            }

    out.covers_target = true;
    if (c.target && !c.target->is_empty()) {
        for (std::uint32_t p : c.target->members()) {
            bool hit = false;
            for (std::size_t i = 0; i < k && !hit; ++i) hit = inflated[i].contains(p);
            if (!hit) {
                out.covers_target = false;
                out.note += "target point " + std::to_string(p) + " uncovered; ";
                break;
            }
        }
    }
    if (!c.five_r_candidates.empty() && out.covers_target) {
        for (const auto& [cc, cr] : c.five_r_candidates) {
            const point_set cand = S.ball(cc, cr);
            bool inside = false;
            for (std::size_t i = 0; i < k && !inside; ++i)
                inside = cand.subset_of(inflated[i]);
            if (!inside) {
                out.covers_target = false;
                out.note += "candidate at " + std::to_string(cc) + " escapes all inflations; ";
                break;
            }
        }
    }

    out.density_band_ok = true;
    if (c.density_set) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            if (c.balls[i].floor_flagged) { ++out.floor_flags; continue; }
            const point_set members = S.ball(c.balls[i].center, c.balls[i].radius);
            const double rho = S.set_intersect(members, *c.density_set).mass() / members.mass();
            lo = std::min(lo, rho);
            hi = std::max(hi, rho);
            const double eps = 1e-12;
            const bool above = rho >= c.band_lo * (1.0 - eps);
            const bool below = c.band_hi_strict ? rho < c.band_hi * (1.0 + eps)
                                                : rho <= c.band_hi * (1.0 + eps);
            if (!above || !below) {
                out.density_band_ok = false;
                out.note += "ball " + std::to_string(i) + " density " + std::to_string(rho) +
                            " outside band; ";
            }
        }
        if (hi >= lo) { out.density_lo = lo; out.density_hi = hi; }
    }

    if (c.dyadic_r0) {
        for (std::size_t i = 0; i < k; ++i)
            if (!detail::is_dyadic_fraction(*c.dyadic_r0, c.balls[i].radius)) {
                out.dyadic_ok = false;
                out.note += "ball " + std::to_string(i) + " radius not dyadic; ";
            }
    }

    if (c.container) {
        for (std::size_t i = 0; i < k; ++i) {
            const point_set members = S.ball(c.balls[i].center, c.balls[i].radius);
            if (!members.subset_of(*c.container)) {
                out.dyadic_ok = false;
                out.note += "ball " + std::to_string(i) + " escapes the container; ";
            }
        }
    }

    if (!std::isnan(c.theta) && !c.balls.empty())
        out.ratio_sum = detail::ratio_sum_of(S, c.balls, c.theta);
    return out;
}

/// Greedy Vitali selection: candidates sorted by radius descending (ties by
/// center index), a ball is kept iff its members are disjoint from all kept
/// balls. Every candidate then lies inside the 5-inflation of some kept ball.
inline ball_cover five_r_cover(const mm_space& S,
                               std::vector<std::pair<std::uint32_t, double>> candidates) {
    for (const auto& [c, r] : candidates) {
        if (c >= S.n()) throw std::out_of_range("candidate center out of range");
        if (!(r > 0.0) || !std::isfinite(r))
            throw std::invalid_argument("candidate radii must be positive and finite");
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    ball_cover out;
    out.algorithm = "five_r";
    out.five_r_candidates = candidates;
    std::vector<point_set> kept;
    for (const auto& [c, r] : candidates) {
        const point_set members = S.ball(c, r);
        bool clash = false;
        for (const auto& sel : kept)
            if (members.intersects(sel)) { clash = true; break; }
        if (!clash) {
            kept.push_back(members);
            out.balls.push_back({c, r, false});
        }
    }
    out.inflation = 5.0;
    out.certificate = verify_cover(S, out);
    return out;
}

/// Dyadic good/bad decomposition of B0 against E at density level lambda:
/// descend radius halvings, keep the first balls whose E-density reaches
/// lambda / c_mu^2, then thin with the greedy 5r selection. Points that the
/// graph's vertex set cannot capture with contained half-radius balls are
/// covered by flagged singleton-scale balls.
inline ball_cover cz_decomposition(const mm_space& S, std::uint32_t center, double r0,
                                   const point_set& E, double lambda) {
    if (!S.geodesic())
        throw precondition_error("dyadic ball decomposition needs a geodesic space",
                                 "space is in matrix mode");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("density level must lie in (0,1)");
    const point_set B0 = S.ball(center, r0);
    const point_set B0E = S.set_intersect(B0, E);
    const double rho0 = B0E.mass() / B0.mass();
    if (rho0 > lambda)
        throw precondition_error("starting ball density is at most lambda",
                                 "density " + std::to_string(rho0) + " exceeds lambda = " +
                                     std::to_string(lambda));
    const double c_mu = S.estimate_constants().c_mu;
    const double thr = lambda / (c_mu * c_mu);

    ball_cover out;
    out.algorithm = "cz";
    out.tau = 1.0;
    out.inflation = 5.0;
    out.theta = std::numeric_limits<double>::quiet_NaN();
    out.target = B0E;
    out.density_set = E;
    out.band_lo = thr;
    out.band_hi = lambda;
    out.dyadic_r0 = r0;
    out.container = B0;

    if (B0E.is_empty()) {
        out.certificate = verify_cover(S, out);
        return out;
    }

    std::vector<std::pair<std::uint32_t, double>> good; // (center, radius)
    std::vector<bool> good_flag;
    const auto density_of = [&](const point_set& b) {
        return S.set_intersect(b, E).mass() / b.mass();
    };

    if (rho0 >= thr) {
        good.push_back({center, r0});
        good_flag.push_back(false);
    } else {
        struct node { std::uint32_t c; point_set members; };
        std::vector<node> bad{{center, B0}};
        double radius = r0;
        const double floor = S.min_positive_distance();
        while (!bad.empty() && radius * 0.5 >= floor) {
            radius *= 0.5;
            // candidate centers: all members of the bad balls, deduplicated
            std::vector<std::uint32_t> cands;
            for (const auto& nd : bad)
                cands.insert(cands.end(), nd.members.members().begin(), nd.members.members().end());
            std::sort(cands.begin(), cands.end());
            cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
            std::vector<node> next_bad;
            for (std::uint32_t q : cands) {
                point_set child = S.ball(q, radius);
                bool contained = false;
                for (const auto& nd : bad)
                    if (child.subset_of(nd.members)) { contained = true; break; }
                if (!contained) continue;
                if (density_of(child) >= thr) {
                    good.push_back({q, radius});
                    good_flag.push_back(false);
                } else {
                    next_bad.push_back({q, std::move(child)});
                }
            }
            bad = std::move(next_bad);
        }
        // stragglers: E-points of B0 not inside any good ball descend to
        // singleton scale (flagged: the density band does not apply there)
        point_set covered = point_set::empty(S.n());
        {
            std::vector<std::uint32_t> cov;
            for (const auto& [c, r] : good) {
                const auto m = S.ball(c, r).members();
                cov.insert(cov.end(), m.begin(), m.end());
            }
            covered = S.make_set(std::move(cov));
        }
        for (std::uint32_t p : B0E.members()) {
            if (covered.contains(p)) continue;
            double r = r0;
            while (r >= S.min_positive_distance()) r *= 0.5;
            good.push_back({p, r});
            good_flag.push_back(true);
        }
    }

    // greedy 5r selection over the good collection
    std::vector<std::size_t> order(good.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (good[a].second != good[b].second) return good[a].second > good[b].second;
        return good[a].first < good[b].first;
    });
    std::vector<point_set> kept;
    for (std::size_t oi : order) {
        const auto& [c, r] = good[oi];
        point_set members = S.ball(c, r);
        bool clash = false;
        for (const auto& sel : kept)
            if (members.intersects(sel)) { clash = true; break; }
        if (!clash) {
            kept.push_back(std::move(members));
            out.balls.push_back({c, r, good_flag[oi]});
        }
    }
    out.certificate = verify_cover(S, out);
    out.certificate.floor_flags = 0;
    for (const auto& b : out.balls)
        if (b.floor_flagged) ++out.certificate.floor_flags;
    return out;
}

/// Scale K below which the boundary decomposition is guaranteed to work,
/// computed from the fitted annular-decay pair.
inline int boundary_scale_K(const mm_space& S, double lambda) {
    const auto sc = S.estimate_constants();
    if (!sc.has_annular_decay)
        throw precondition_error("annular decay constants exist", "space is in matrix mode");
    return static_cast<int>(
        std::ceil(std::log2(32.0 * std::pow(4.0 * sc.c_a / lambda, 1.0 / sc.beta))));
}

/// Boundary-ball selection: covers B0 at scale 2^-k r0 with fifth-disjoint
/// balls, snaps radii inside the dyadic window to the best mass/cut ratio,
/// classifies by E-density against lambda / (16 c_mu^16), and emits either
/// the doubly-dense collection or the 6-inflated boundary collection.
inline ball_cover boundary_balls(const mm_space& S, std::uint32_t center, double r0,
                                 const point_set& E, double lambda, int k) {
    if (!S.geodesic())
        throw precondition_error("boundary decomposition needs a geodesic space",
                                 "space is in matrix mode");
    if (!(lambda > 0.0 && lambda <= 0.5))
        throw std::invalid_argument("density level must lie in (0, 1/2]");
    const point_set B0 = S.ball(center, r0);
    const double rho0 = S.set_intersect(B0, E).mass() / B0.mass();
    if (!(rho0 >= lambda && rho0 <= 1.0 - lambda))
        throw precondition_error("starting ball density lies in [lambda, 1-lambda]",
                                 "density " + std::to_string(rho0) + " with lambda = " +
                                     std::to_string(lambda));
    const int K = boundary_scale_K(S, lambda);
    if (k < K)
        throw precondition_error("scale index reaches the admissible depth",
                                 "k = " + std::to_string(k) + " is below K = " + std::to_string(K));

    const auto sc = S.estimate_constants();
    const double c_mu = sc.c_mu;

    // clamp the scale at the discreteness floor
    int k_eff = 1;
    {
        const double floor = S.min_positive_distance();
        while (k_eff < k && r0 * std::ldexp(1.0, -(k_eff + 1)) >= floor) ++k_eff;
    }
    const bool floor_clamped = k_eff < k;
    const double rho = r0 * std::ldexp(1.0, -k_eff);

    // fifth-disjoint cover of the whole space at scale rho
    std::vector<std::uint32_t> centers;
    {
        std::vector<char> used(S.n(), 0);
        for (std::uint32_t p = 0; p < S.n(); ++p) {
            const point_set fifth = S.ball(p, rho / 5.0);
            bool clash = false;
            for (std::uint32_t m : fifth.members())
                if (used[m]) { clash = true; break; }
            if (clash) continue;
            centers.push_back(p);
            for (std::uint32_t m : fifth.members()) used[m] = 1;
        }
    }

    // snap each radius inside [rho, 2 rho) to the best mass / cut ratio
    const auto& crit = S.critical_radii();
    const point_set everything = S.full_set();
    struct snapped { std::uint32_t c; double r; point_set members; };
    std::vector<snapped> B_k;
    for (std::uint32_t c : centers) {
        double best_r = rho;
        double best_score = -1.0;
        const auto lo = std::lower_bound(crit.begin(), crit.end(), rho);
        std::vector<double> cand_r{rho};
        for (auto it = lo; it != crit.end() && *it < 2.0 * rho; ++it) cand_r.push_back(*it);
        for (double r : cand_r) {
            const point_set members = S.ball(c, r);
            const double cut = graph_perimeter(S, members, everything);
            const double score = members.mass() / std::max(cut, 1e-300);
            if (score > best_score + 1e-15 * best_score) {
                best_score = score;
                best_r = r;
            }
        }
        point_set members = S.ball(c, best_r);
        if (members.subset_of(B0)) B_k.push_back({c, best_r, std::move(members)});
    }

    const double C0 = 16.0 * std::pow(c_mu, 16.0);
    double thrD = lambda / C0;
    bool clamped = false;
    {
        double min_pos_density = std::numeric_limits<double>::infinity();
        for (const auto& b : B_k) {
            double wmin = std::numeric_limits<double>::infinity();
            for (std::uint32_t m : b.members.members()) wmin = std::min(wmin, S.weight(m));
            min_pos_density = std::min(min_pos_density, wmin / b.members.mass());
        }
        if (!B_k.empty() && thrD < min_pos_density) clamped = true; // thresholds act as nonemptiness
    }

    std::vector<char> in_D1(B_k.size()), in_D2(B_k.size());
    for (std::size_t i = 0; i < B_k.size(); ++i) {
        const double m = S.set_intersect(B_k[i].members, E).mass() / B_k[i].members.mass();
        in_D1[i] = m >= thrD;
        in_D2[i] = (1.0 - m) >= thrD;
    }

    ball_cover out;
    out.algorithm = "boundary";
    out.density_set = E;
    out.dyadic_r0.reset();
    out.disjoint_scale = 1.0 / 60.0;
    out.inflation = 1.0;
    out.container = B0;

    std::vector<std::uint32_t> inter_members;
    for (std::size_t i = 0; i < B_k.size(); ++i)
        if (in_D1[i] && in_D2[i])
            for (std::uint32_t m : B_k[i].members.members()) inter_members.push_back(m);
    const point_set inter_set = S.make_set(std::move(inter_members));

    const double big_C = 16.0 * std::pow(c_mu, 19.0);
    if (inter_set.mass() >= (lambda / 8.0) * B0.mass()) {
        for (std::size_t i = 0; i < B_k.size(); ++i)
            if (in_D1[i] && in_D2[i]) out.balls.push_back({B_k[i].c, B_k[i].r, false});
        out.band_lo = lambda / C0;
        out.band_hi = 1.0 - lambda / C0;
    } else {
        // dichotomy: work with the smaller of the two union masses
        std::vector<std::uint32_t> a1, a2;
        for (std::size_t i = 0; i < B_k.size(); ++i) {
            if (in_D1[i])
                for (std::uint32_t m : B_k[i].members.members()) a1.push_back(m);
            if (in_D2[i])
                for (std::uint32_t m : B_k[i].members.members()) a2.push_back(m);
        }
        const double mass1 = S.make_set(std::move(a1)).mass();
        const double mass2 = S.make_set(std::move(a2)).mass();
        const std::vector<char>& in_D = (mass1 <= mass2) ? in_D1 : in_D2;
        // union of the complementary collection, for the 2B-touch test
        std::vector<std::uint32_t> compl_members;
        for (std::size_t i = 0; i < B_k.size(); ++i)
            if (!in_D[i])
                for (std::uint32_t m : B_k[i].members.members()) compl_members.push_back(m);
        const point_set compl_set = S.make_set(std::move(compl_members));
        for (std::size_t i = 0; i < B_k.size(); ++i) {
            if (!in_D[i]) continue;
            const point_set twoB = S.ball(B_k[i].c, 2.0 * B_k[i].r);
            if (!twoB.intersects(compl_set)) continue;
            const point_set sixB = S.ball(B_k[i].c, 6.0 * B_k[i].r);
            if (!sixB.subset_of(B0)) continue;
            out.balls.push_back({B_k[i].c, 6.0 * B_k[i].r, false});
        }
        out.band_lo = lambda / big_C;
        out.band_hi = 1.0 - lambda / big_C;
    }

    out.certificate = verify_cover(S, out);
    out.certificate.threshold_clamped = clamped;
    if (floor_clamped) {
        out.certificate.floor_flags = out.balls.size();
        out.certificate.note += "scale clamped to k_eff = " + std::to_string(k_eff) + "; ";
    }
    // total-mass comparison constant of the scale bound, recorded empirically
    {
        ksum sum;
        for (const auto& b : out.balls) sum.add(S.ball_measure(b.center, b.radius));
        if (sum.get() > 0.0)
            out.certificate.mass_bound_constant =
                std::ldexp(1.0, -k_eff) * B0.mass() * lambda / sum.get();
    }
    return out;
}

/// Global boxing cover: for every point of U, the largest radius at which U
/// still fills half the ball determines a certified ball; the greedy 5r
/// selection thins them to a disjoint family whose 5 tau inflations cover U.
inline ball_cover boxing_cover(const mm_space& S, const point_set& U, double theta, double tau) {
    detail::require_theta(theta);
    if (tau < 1.0) throw std::invalid_argument("inflation factor tau must be at least 1");
    detail::require_same_space(S, U, "set U");
    if (U.is_empty()) {
        ball_cover out;
        out.algorithm = "boxing";
        out.theta = theta;
        out.tau = tau;
        out.certificate = verify_cover(S, out);
        return out;
    }
    if (!(U.mass() < 0.5 * S.total_mass()))
        throw precondition_error("U fills less than half the total mass",
                                 "mu(U) = " + std::to_string(U.mass()) + " of " +
                                     std::to_string(S.total_mass()));

    const std::size_t n = S.n();
    const auto& mem = U.members();
    std::vector<double> R(mem.size(), 0.0);
    parallel_for(mem.size(), [&](std::size_t a) {
        const std::uint32_t x = mem[a];
        std::vector<double> row(n);
        S.copy_distance_row(x, row.data());
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::uint32_t p, std::uint32_t q) {
            if (row[p] != row[q]) return row[p] < row[q];
            return p < q;
        });
        // walk distance groups; the ball for radii in (c_t, c_{t+1}] has the
        // prefix mass up to group t
        double alpha = 0.0;
        double mass = 0.0, umass = 0.0;
        std::size_t i = 0;
        std::vector<double> cuts; // distinct distances
        std::vector<double> dens; // density of the ball whose contents end just below each cut
        while (i < n) {
            std::size_t g = i;
            const double d = row[order[i]];
            while (g < n && row[order[g]] == d) ++g;
            if (d > 0.0) {
                cuts.push_back(d);
                dens.push_back(umass / mass);
            }
            for (std::size_t t = i; t < g; ++t) {
                mass += S.weight(order[t]);
                if (U.contains(order[t])) umass += S.weight(order[t]);
            }
            i = g;
        }
        // dens[t] is the density of B(x, r) for r in (cuts[t-1], cuts[t]]
        for (std::size_t t = cuts.size(); t-- > 0;) {
            if (dens[t] >= 0.5) { alpha = cuts[t]; break; }
        }
        // choose R > alpha on the distance grid with R <= 2 alpha, else 2 alpha
        double Rx = 2.0 * alpha;
        const auto it = std::upper_bound(cuts.begin(), cuts.end(), alpha);
        if (it != cuts.end() && *it <= 2.0 * alpha) Rx = *it;
        R[a] = Rx;
    });

    std::vector<std::pair<std::uint32_t, double>> candidates(mem.size());
    for (std::size_t a = 0; a < mem.size(); ++a) candidates[a] = {mem[a], tau * R[a]};
    std::sort(candidates.begin(), candidates.end(), [](const auto& p, const auto& q) {
        if (p.second != q.second) return p.second > q.second;
        return p.first < q.first;
    });

    ball_cover out;
    out.algorithm = "boxing";
    out.theta = theta;
    out.tau = tau;
    out.inflation = 5.0 * tau;
    out.disjoint_scale = tau;
    out.target = U;
    out.density_set = U;
    const double c_mu = S.estimate_constants().c_mu;
    out.band_lo = 1.0 / (2.0 * c_mu);
    out.band_hi = 0.5;
    out.band_hi_strict = true;

    std::vector<point_set> kept;
    for (const auto& [c, r] : candidates) {
        const point_set members = S.ball(c, r);
        bool clash = false;
        for (const auto& sel : kept)
            if (members.intersects(sel)) { clash = true; break; }
        if (!clash) {
            kept.push_back(members);
            out.balls.push_back({c, r / tau, false});
        }
    }

    out.certificate = verify_cover(S, out);
    const energy_value P = fractional_perimeter(S, U, S.full_set(), theta);
    if (P.value > 0.0)
        out.certificate.quotient =
            out.certificate.ratio_sum / (theta * (1.0 - theta) * P.value);
    return out;
}

/// Local boxing cover: the dyadic decomposition of B0 against U, with the
/// normalized radius sum compared against (1 - theta) P_theta(U ∩ B0, B0).
inline ball_cover local_boxing_cover(const mm_space& S, std::uint32_t center, double r0,
                                     const point_set& U, double kappa, double theta) {
    detail::require_theta(theta);
    if (!(kappa > 0.0 && kappa < 1.0))
        throw std::invalid_argument("density level kappa must lie in (0,1)");
    ball_cover out = cz_decomposition(S, center, r0, U, kappa);
    out.algorithm = "local_boxing";
    out.theta = theta;
    out.certificate.ratio_sum =
        out.balls.empty() ? std::numeric_limits<double>::quiet_NaN()
                          : detail::ratio_sum_of(S, out.balls, theta);
    const point_set B0 = S.ball(center, r0);
    const point_set UB0 = S.set_intersect(U, B0);
    if (!UB0.is_empty()) {
        const energy_value P = fractional_perimeter(S, UB0, B0, theta);
        if (P.value > 0.0)
            out.certificate.quotient = out.certificate.ratio_sum / ((1.0 - theta) * P.value);
    }
    return out;
}

} // namespace fracper
