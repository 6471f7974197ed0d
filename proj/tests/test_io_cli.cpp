#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fracper/fracper.hpp"
#include "test_util.hpp"

#include <json.hpp>

using namespace fracper;

namespace {

std::string cli_path() {
    const char* p = std::getenv("FRACPER_CLI");
    return p ? p : "";
}

int run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("space json round trip") {
    auto g = grid(2, 4);
    auto j = space_to_json(g);
    auto back = space_from_json(j);
    REQUIRE(back.n() == g.n());
    for (std::uint32_t i = 0; i < g.n(); ++i) {
        CHECK(back.weight(i) == g.weight(i));
        for (std::uint32_t k = 0; k < g.n(); ++k) CHECK(back.distance(i, k) == g.distance(i, k));
    }
    CHECK(back.has_coords());
}

TEST_CASE("loader rejects malformed input with anchored messages") {
    const std::string dir = "/tmp/fracper_io_test";
    std::system(("mkdir -p " + dir).c_str());
    SECTION("asymmetric matrix") {
        std::ofstream out(dir + "/bad.json");
        out << R"({"mode":"matrix","weights":[1,1],"matrix":[[0,1],[2,0]]})";
        out.close();
        try {
            load_space(dir + "/bad.json");
            FAIL("expected a rejection");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("asymmetric") != std::string::npos);
        }
    }
    SECTION("negative weight") {
        std::ofstream out(dir + "/neg.json");
        out << R"({"mode":"matrix","weights":[1,-1],"matrix":[[0,1],[1,0]]})";
        out.close();
        CHECK_THROWS_AS(load_space(dir + "/neg.json"), std::invalid_argument);
    }
    SECTION("parse errors carry line and column") {
        std::ofstream out(dir + "/parse.json");
        out << "{\n  \"mode\": \"matrix\",\n  oops\n}";
        out.close();
        try {
            load_space(dir + "/parse.json");
            FAIL("expected a rejection");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(":3:") != std::string::npos);
        }
    }
}

TEST_CASE("cli generates, computes, and stays bit-compatible with the library") {
    if (cli_path().empty()) {
        WARN("FRACPER_CLI not set; skipping CLI coverage");
        return;
    }
    const std::string dir = "/tmp/fracper_cli_test";
    std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str());
    const std::string space = dir + "/g.json";

    REQUIRE(run("gen grid --dim 1 --n 65 --out " + space) == 0);
    auto g = load_space(space);
    CHECK(g.n() == 65);

    SECTION("compute perimeter matches the library bit for bit") {
        const std::string out = dir + "/perim.json";
        REQUIRE(run("compute perimeter --space " + space +
                    " --set halfspace:0:0.5 --theta 0.5 --out " + out) == 0);
        const auto j = nlohmann::json::parse(slurp(out));
        const double cli_value = j.at("value").get<double>();
        auto E = g.make_set_if([&](std::uint32_t i) { return g.coords()[i][0] <= 0.5; });
        const double lib_value = fractional_perimeter(g, E, g.full_set(), 0.5).value;
        CHECK(cli_value == lib_value);
        CHECK(j.at("pair_count").get<std::size_t>() > 0);
        CHECK(j.contains("wall_time_ms"));
        CHECK(j.at("schema_version").get<int>() == 1);
    }

    SECTION("sweep runs are byte identical") {
        const std::string a = dir + "/a.csv", b = dir + "/b.csv";
        const std::string args = "sweep --space " + space +
                                 " --kind bbm_poincare --thetas 0.1:0.9:9 --seed 42 --out ";
        REQUIRE(run(args + a) == 0);
        REQUIRE(run(args + b) == 0);
        CHECK(slurp(a) == slurp(b));
        CHECK(slurp(a).rfind("# schema_version: 1\n", 0) == 0);
    }

    SECTION("precondition violations exit with status 2") {
        CHECK(run("cover --space " + space +
                  " --algorithm cz --center 32 --r0 0.5 --set all --lambda 0.4") == 2);
        CHECK(run("verify --space " + space +
                  " --kind bbm_global_iso --set all --theta 0.5 --q 1") == 2);
    }

    SECTION("io errors exit with status 1") {
        CHECK(run("compute perimeter --space " + dir + "/missing.json --set all") == 1);
    }

    SECTION("cover emits a certified json") {
        const std::string out = dir + "/cover.json";
        REQUIRE(run("cover --space " + space +
                    " --algorithm boxing --set ball:32:0.1 --theta 0.5 --emit " + out) == 0);
        const auto j = nlohmann::json::parse(slurp(out));
        CHECK(j.at("certificate").at("pass").get<bool>());
        CHECK(j.at("schema_version").get<int>() == 1);
    }

    SECTION("constants subcommand reports the doubling estimate") {
        const std::string out = dir + "/const.json";
        REQUIRE(run("constants --space " + space + " --out " + out) == 0);
        const auto j = nlohmann::json::parse(slurp(out));
        CHECK(j.at("c_mu").get<double>() >= 2.0);
        CHECK(j.contains("beta"));
    }
}
