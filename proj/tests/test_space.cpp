#include <catch2/catch_amalgamated.hpp>

#include "fracper/fracper.hpp"
#include "test_util.hpp"

using namespace fracper;

namespace {
mm_space unit_path3() {
    return mm_space::from_matrix({0, 1, 2, 1, 0, 1, 2, 1, 0}, {1, 1, 1});
}
mm_space two_point(double d = 1.0, double w = 1.0) {
    return mm_space::from_matrix({0, d, d, 0}, {w, w});
}
} // namespace

TEST_CASE("distance basics") {
    auto p = unit_path3();
    CHECK(p.distance(0, 2) == 2.0);
    CHECK(p.distance(1, 1) == 0.0);
    auto two = two_point();
    CHECK(two.distance(1, 0) == 1.0);
    CHECK(two.distance(0, 1) == two.distance(1, 0));
    CHECK_THROWS_AS(p.distance(0, 3), std::out_of_range);
}

TEST_CASE("open balls") {
    auto two = two_point();
    CHECK(two.ball(0, 1.0).members() == std::vector<std::uint32_t>{0});
    CHECK(two.ball(0, 1.5).members() == std::vector<std::uint32_t>{0, 1});
    auto p = unit_path3();
    CHECK(p.ball(1, 1.0).members() == std::vector<std::uint32_t>{1});
    CHECK_THROWS_AS(p.ball(0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(p.ball(0, -1.0), std::invalid_argument);
}

TEST_CASE("ball measures") {
    auto p = unit_path3();
    CHECK(p.ball_measure(1, 1.5) == 3.0);
    CHECK(p.ball_measure(0, 1.0) == 1.0);
    CHECK(p.ball_measure(2, 100.0) == p.total_mass());
}

TEST_CASE("critical radii") {
    CHECK(unit_path3().critical_radii() == std::vector<double>{1.0, 2.0});
    CHECK(two_point().critical_radii() == std::vector<double>{1.0});
    auto single = mm_space::from_matrix({0.0}, {1.0});
    CHECK(single.critical_radii().empty());
}

TEST_CASE("construction rejects invalid input") {
    CHECK_THROWS_AS(mm_space::from_matrix({0, 1, 2, 0}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(mm_space::from_matrix({0, 1, 1, 0.1}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(mm_space::from_matrix({0, 0, 0, 0}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(mm_space::from_matrix({0, 1, 1, 0}, {1, -1}), std::invalid_argument);
    // triangle: d(0,2) = 5 > 1 + 1
    CHECK_THROWS_AS(mm_space::from_matrix({0, 1, 5, 1, 0, 1, 5, 1, 0}, {1, 1, 1}),
                    std::invalid_argument);
    // disconnected graph
    CHECK_THROWS_AS(mm_space::from_graph(3, {{0, 1, 1.0}}, {1, 1, 1}), std::invalid_argument);
    // self loop
    CHECK_THROWS_AS(mm_space::from_graph(2, {{0, 0, 1.0}, {0, 1, 1.0}}, {1, 1}),
                    std::invalid_argument);
}

TEST_CASE("doubling constant examples") {
    CHECK(unit_path3().estimate_constants().c_mu == 3.0);
    CHECK(two_point().estimate_constants().c_mu == 2.0);
    auto single = mm_space::from_matrix({0.0}, {1.0});
    CHECK_THROWS_AS(single.estimate_constants(), precondition_error);
}

TEST_CASE("doubling estimate is a true max and dominates every critical radius") {
    auto S = testutil::random_space(4, 24);
    const double c_mu = S.estimate_constants().c_mu;
    double attained = 0.0;
    for (std::uint32_t x = 0; x < S.n(); ++x)
        for (double r : S.critical_radii()) {
            if (r > S.diameter()) break;
            const double ratio = S.ball_measure(x, 2 * r) / S.ball_measure(x, r);
            CHECK(ratio <= c_mu * (1 + 1e-12));
            attained = std::max(attained, ratio);
        }
    CHECK(attained == c_mu);
}

TEST_CASE("ball monotonicity in the radius") {
    auto S = testutil::random_space(7, 20);
    for (std::uint32_t x = 0; x < S.n(); x += 3) {
        point_set prev = S.ball(x, S.critical_radii().front() / 2);
        for (double r : S.critical_radii()) {
            point_set cur = S.ball(x, r);
            CHECK(prev.subset_of(cur));
            prev = cur;
        }
    }
}

TEST_CASE("lower Ahlfors constant on the unit grid") {
    auto g = grid(1, 64);
    const auto sc = g.estimate_constants(1.0);
    CHECK(sc.q_ahlfors == 1.0);
    CHECK(sc.c0 >= 0.4);
    CHECK(sc.c0 <= 1.1);
    // brute force the same minimum
    double c0 = std::numeric_limits<double>::infinity();
    std::vector<double> radii = g.critical_radii();
    radii.push_back(2.0 * g.diameter());
    for (std::uint32_t x = 0; x < g.n(); ++x)
        for (double r : radii)
            c0 = std::min(c0, g.ball_measure(x, r) / r);
    CHECK(testutil::rel_err(c0, sc.c0) < 1e-12);
}

TEST_CASE("set mass is additive over disjoint unions") {
    auto S = testutil::random_space(9, 30);
    auto A = S.make_set({1, 4, 9, 16, 25});
    auto B = S.make_set({2, 3, 5, 7});
    REQUIRE_FALSE(A.intersects(B));
    auto U = S.set_union(A, B);
    CHECK(testutil::rel_err(U.mass(), A.mass() + B.mass()) < 1e-15);
    CHECK(testutil::rel_err(S.recompute_mass(U), U.mass()) < 1e-15);
}

TEST_CASE("constant estimation is deterministic") {
    auto S = testutil::random_space(11, 40);
    const auto a = S.estimate_constants();
    const auto b = testutil::random_space(11, 40).estimate_constants();
    CHECK(a.c_mu == b.c_mu);
    CHECK(a.q_d == b.q_d);
    CHECK(a.c_lower == b.c_lower);
    CHECK(a.s == b.s);
    CHECK(a.c0 == b.c0);
}

TEST_CASE("on-demand row cache matches the dense matrix") {
    space_options opt;
    opt.dense_cache_limit = 4; // forces the row cache path
    SECTION("uniform edge lengths agree exactly") {
        std::vector<graph_edge> edges;
        for (std::uint32_t i = 0; i + 1 < 12; ++i) edges.push_back({i, i + 1, 0.25});
        edges.push_back({0, 11, 0.25});
        std::vector<double> w(12, 1.0);
        auto dense = mm_space::from_graph(12, edges, w);
        auto lru = mm_space::from_graph(12, edges, w, {}, opt);
        REQUIRE_FALSE(lru.has_dense_distances());
        for (std::uint32_t i = 0; i < 12; ++i)
            for (std::uint32_t j = 0; j < 12; ++j)
                CHECK(lru.distance(i, j) == dense.distance(i, j));
        CHECK(lru.diameter() == dense.diameter());
        CHECK(lru.min_positive_distance() == dense.min_positive_distance());
    }
    SECTION("mixed edge lengths agree up to path-sum rounding") {
        std::vector<graph_edge> edges;
        for (std::uint32_t i = 0; i + 1 < 12; ++i) edges.push_back({i, i + 1, 0.5 + 0.1 * i});
        edges.push_back({0, 11, 2.0});
        std::vector<double> w(12, 1.0);
        auto dense = mm_space::from_graph(12, edges, w);
        auto lru = mm_space::from_graph(12, edges, w, {}, opt);
        for (std::uint32_t i = 0; i < 12; ++i)
            for (std::uint32_t j = 0; j < 12; ++j)
                CHECK(testutil::rel_err(lru.distance(i, j) + 1.0, dense.distance(i, j) + 1.0) <
                      1e-14);
    }
}

TEST_CASE("geodesic distances are shortest paths") {
    // path 0-1-2 of length 2 vs the direct 0-2 shortcut of length 1.5
    std::vector<graph_edge> edges{{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.5}, {2, 3, 1.0}};
    auto S = mm_space::from_graph(4, edges, {1, 1, 1, 1});
    CHECK(S.distance(0, 2) == 1.5);
    CHECK(S.distance(0, 3) == 2.5);
    CHECK(S.distance(1, 3) == 2.0);
}
