#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "fracper/fracper.hpp"
#include "test_util.hpp"

using namespace fracper;

TEST_CASE("five_r greedy basics") {
    auto g = grid(1, 17);
    SECTION("identical candidates collapse to one ball") {
        std::vector<std::pair<std::uint32_t, double>> cands(4, {8u, 0.3});
        auto c = five_r_cover(g, cands);
        CHECK(c.balls.size() == 1);
        CHECK(c.certificate.pass());
    }
    SECTION("disjoint candidates are all kept") {
        std::vector<std::pair<std::uint32_t, double>> cands{{0u, 0.1}, {16u, 0.1}};
        auto c = five_r_cover(g, cands);
        CHECK(c.balls.size() == 2);
        CHECK(c.certificate.pass());
    }
    SECTION("empty candidate list is fine") {
        auto c = five_r_cover(g, {});
        CHECK(c.balls.empty());
        CHECK(c.certificate.pass());
    }
}

TEST_CASE("five_r on a fine path") {
    auto g = grid(1, 65);
    std::vector<std::pair<std::uint32_t, double>> cands;
    for (std::uint32_t i = 0; i < g.n(); ++i) cands.push_back({i, 0.1});
    auto c = five_r_cover(g, cands);
    REQUIRE(c.certificate.pass());
    for (std::size_t i = 0; i < c.balls.size(); ++i)
        for (std::size_t j = i + 1; j < c.balls.size(); ++j)
            CHECK(g.distance(c.balls[i].center, c.balls[j].center) >= 0.1);
    // 0.5-inflations cover all of [0,1]
    std::vector<char> hit(g.n(), 0);
    for (const auto& b : c.balls)
        for (std::uint32_t m : g.ball(b.center, 5 * b.radius).members()) hit[m] = 1;
    CHECK(std::count(hit.begin(), hit.end(), char(1)) == static_cast<long>(g.n()));
}

TEST_CASE("five_r selection is invariant under candidate shuffles") {
    auto g = grid(2, 9);
    std::vector<std::pair<std::uint32_t, double>> cands;
    for (std::uint32_t i = 0; i < g.n(); i += 2) cands.push_back({i, 0.17});
    for (std::uint32_t i = 1; i < g.n(); i += 3) cands.push_back({i, 0.31});
    auto base = five_r_cover(g, cands);
    std::mt19937 rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        std::shuffle(cands.begin(), cands.end(), rng);
        auto c = five_r_cover(g, cands);
        REQUIRE(c.balls.size() == base.balls.size());
        for (std::size_t i = 0; i < c.balls.size(); ++i) {
            CHECK(c.balls[i].center == base.balls[i].center);
            CHECK(c.balls[i].radius == base.balls[i].radius);
        }
    }
}

TEST_CASE("cz decomposition") {
    auto g = grid(1, 129);
    SECTION("empty E gives an empty cover") {
        auto c = cz_decomposition(g, 64, 0.5, point_set::empty(g.n()), 0.4);
        CHECK(c.balls.empty());
        CHECK(c.certificate.pass());
    }
    SECTION("density already inside the band keeps B0 alone") {
        std::vector<std::uint32_t> pts;
        for (std::uint32_t i = 1; i <= 20; ++i) pts.push_back(i);
        auto E = g.make_set(pts); // density 20/127 in B(64, 0.5), inside [lambda/c^2, lambda]
        auto c = cz_decomposition(g, 64, 0.5, E, 0.4);
        REQUIRE(c.balls.size() == 1);
        CHECK(c.balls[0].center == 64);
        CHECK(c.balls[0].radius == 0.5);
        CHECK(c.certificate.pass());
    }
    SECTION("left tail example passes the recomputed certificate") {
        std::vector<std::uint32_t> pts;
        for (std::uint32_t i = 0; i < 10; ++i) pts.push_back(i);
        auto E = g.make_set(pts);
        auto c = cz_decomposition(g, 64, 0.5, E, 0.4);
        const auto chk = verify_cover(g, c);
        CHECK(chk.disjoint);
        CHECK(chk.covers_target);
        CHECK(chk.density_band_ok);
        CHECK(chk.dyadic_ok);
        // exact coverage: the 5-inflations carry at least the target mass
        std::vector<std::uint32_t> covered;
        for (const auto& b : c.balls) {
            auto m = g.ball(b.center, 5 * b.radius).members();
            covered.insert(covered.end(), m.begin(), m.end());
        }
        auto targ = g.set_intersect(g.ball(64, 0.5), E);
        CHECK(g.set_intersect(g.make_set(covered), targ).mass() == targ.mass());
    }
    SECTION("preconditions") {
        auto big = g.make_set_if([](std::uint32_t) { return true; });
        CHECK_THROWS_AS(cz_decomposition(g, 64, 0.5, big, 0.4), precondition_error);
        auto m = mm_space::from_matrix({0, 1, 1, 0}, {1, 1});
        CHECK_THROWS_AS(cz_decomposition(m, 0, 1.0, m.make_set({1}), 0.4), precondition_error);
    }
}

TEST_CASE("boundary ball selection") {
    auto q = grid(2, 65);
    const std::uint32_t center = (65 * 65 - 1) / 2;
    auto half = q.make_set_if([&](std::uint32_t i) { return q.coords()[i][0] <= 0.5; });
    const int K = boundary_scale_K(q, 0.4);
    SECTION("halfplane split produces a certified nonempty cover") {
        auto c = boundary_balls(q, center, 0.5, half, 0.4, K);
        REQUIRE_FALSE(c.balls.empty());
        const auto chk = verify_cover(q, c);
        CHECK(chk.disjoint);
        CHECK(chk.dyadic_ok); // includes the container check
        // every ball meets both E and its complement inside the certified band
        const auto sc = q.estimate_constants();
        const double C = 16.0 * std::pow(sc.c_mu, 19.0);
        for (const auto& b : c.balls) {
            auto mem = q.ball(b.center, b.radius);
            const double rho = q.set_intersect(mem, half).mass() / mem.mass();
            CHECK(rho >= 0.4 / C);
            CHECK(rho <= 1.0 - 0.4 / C);
        }
        CHECK(c.certificate.mass_bound_constant > 0.0);
    }
    SECTION("density window violations are rejected") {
        auto tiny = q.make_set({0});
        CHECK_THROWS_AS(boundary_balls(q, center, 0.5, tiny, 0.4, K), precondition_error);
    }
    SECTION("k below the admissible depth is rejected with the computed K") {
        try {
            boundary_balls(q, center, 0.5, half, 0.4, K - 1);
            FAIL("expected a precondition error");
        } catch (const precondition_error& e) {
            CHECK(std::string(e.what()).find("K = " + std::to_string(K)) != std::string::npos);
        }
    }
    SECTION("deep scales clamp at the discreteness floor") {
        auto c = boundary_balls(q, center, 0.5, half, 0.4, std::max(K, 40));
        CHECK(c.certificate.floor_flags > 0);
        CHECK_FALSE(c.balls.empty());
    }
}

TEST_CASE("boxing cover") {
    auto g = grid(1, 257);
    SECTION("empty U gives an empty cover") {
        auto c = boxing_cover(g, point_set::empty(g.n()), 0.5, 1.0);
        CHECK(c.balls.empty());
    }
    SECTION("interval indicator is certified") {
        auto U = g.make_set_if([&](std::uint32_t i) {
            const double x = g.coords()[i][0];
            return x > 0.4 && x < 0.6;
        });
        auto c = boxing_cover(g, U, 0.5, 1.0);
        const auto chk = verify_cover(g, c);
        CHECK(chk.disjoint);
        CHECK(chk.covers_target);
        CHECK(chk.density_band_ok);
        CHECK(std::isfinite(c.certificate.quotient));
        CHECK(c.certificate.quotient > 0.0);
    }
    SECTION("theta sweep keeps the quotient inside one decade") {
        auto U = g.make_set_if([&](std::uint32_t i) {
            const double x = g.coords()[i][0];
            return x > 0.4 && x < 0.6;
        });
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double theta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            auto c = boxing_cover(g, U, theta, 1.0);
            REQUIRE(std::isfinite(c.certificate.quotient));
            lo = std::min(lo, c.certificate.quotient);
            hi = std::max(hi, c.certificate.quotient);
        }
        CHECK(hi / lo <= 10.0);
    }
    SECTION("oversized U is rejected") {
        auto U = g.make_set_if([&](std::uint32_t i) { return i < 200; });
        CHECK_THROWS_AS(boxing_cover(g, U, 0.5, 1.0), precondition_error);
    }
}

TEST_CASE("local boxing cover") {
    auto q = grid(2, 33);
    const std::uint32_t center = (33 * 33 - 1) / 2;
    SECTION("empty intersection gives an empty cover") {
        auto far = q.make_set({0});
        // B(center, 0.2) misses the corner point
        auto c = local_boxing_cover(q, center, 0.2, far, 0.5, 0.5);
        CHECK(c.balls.empty());
    }
    SECTION("single light point is covered at one ball") {
        auto one = q.make_set({center});
        auto c = local_boxing_cover(q, center, 0.5, one, 0.5, 0.5);
        REQUIRE(c.balls.size() == 1);
        CHECK(verify_cover(q, c).covers_target);
    }
    SECTION("quarter plane certificate") {
        auto quarter = q.make_set_if([&](std::uint32_t i) {
            return q.coords()[i][0] <= 0.5 && q.coords()[i][1] <= 0.5;
        });
        auto c = local_boxing_cover(q, center, 0.5, quarter, 0.5, 0.5);
        const auto chk = verify_cover(q, c);
        CHECK(chk.disjoint);
        CHECK(chk.covers_target);
        CHECK(chk.density_band_ok);
        CHECK(chk.dyadic_ok);
        CHECK(std::isfinite(c.certificate.quotient));
    }
}

TEST_CASE("checker recomputation matches constructor certificates") {
    auto g = grid(1, 65);
    auto E = g.make_set_if([&](std::uint32_t i) { return g.coords()[i][0] <= 0.3; });
    auto cz = cz_decomposition(g, 32, 0.4, E, 0.45);
    const auto chk = verify_cover(g, cz);
    CHECK(chk.disjoint == cz.certificate.disjoint);
    CHECK(chk.covers_target == cz.certificate.covers_target);
    CHECK(chk.density_band_ok == cz.certificate.density_band_ok);
    CHECK(chk.dyadic_ok == cz.certificate.dyadic_ok);
}
