#include <doctest.h>

#include <random>

#include "fairsel/lp.hpp"
#include "oracles.hpp"

using fairsel::lp::LpProblem;
using fairsel::lp::solve;
using fairsel::lp::Status;

TEST_CASE("box-saturated optimum") {
    const auto s = solve({{1.0}, {}, {}, {}});
    REQUIRE(s.optimal());
    CHECK(s.values[0] == doctest::Approx(1.0));
    CHECK(s.objective == doctest::Approx(1.0));
}

TEST_CASE("single binding constraint") {
    const auto s = solve({{1.0, 1.0}, {{1.0, 1.0}}, {0.5}, {}});
    REQUIRE(s.optimal());
    CHECK(s.objective == doctest::Approx(0.5));
}

TEST_CASE("constraint intersection at the box corner") {
    const auto s = solve({{2.0, -1.0}, {{1.0, -1.0}}, {0.0}, {}});
    REQUIRE(s.optimal());
    CHECK(s.objective == doctest::Approx(1.0));
    CHECK(s.values[0] == doctest::Approx(1.0));
    CHECK(s.values[1] == doctest::Approx(1.0));
}

TEST_CASE("negative right-hand sides go through phase one") {
    // v1 + v2 >= 1.5, maximize -v1 - 2 v2  ->  v1 = 1, v2 = 0.5
    const auto s = solve({{-1.0, -2.0}, {{-1.0, -1.0}}, {-1.5}, {}});
    REQUIRE(s.optimal());
    CHECK(s.values[0] == doctest::Approx(1.0));
    CHECK(s.values[1] == doctest::Approx(0.5));
}

TEST_CASE("infeasible problems are reported, not thrown") {
    const auto s = solve({{1.0, 1.0}, {{-1.0, -1.0}}, {-2.5}, {}});
    CHECK(s.status == Status::Infeasible);
    const auto z = solve({{1.0}, {{0.0}}, {-1.0}, {}});
    CHECK(z.status == Status::Infeasible);
}

TEST_CASE("zero upper bounds pin variables") {
    const auto s = solve({{1.0, 1.0}, {}, {}, {0.0, 1.0}});
    REQUIRE(s.optimal());
    CHECK(s.values[0] == 0.0);
    CHECK(s.values[1] == doctest::Approx(1.0));
}

TEST_CASE("malformed problems raise SolverError") {
    CHECK_THROWS_AS(solve({{1.0, 1.0}, {{1.0}}, {1.0}, {}}), fairsel::lp::SolverError);
    CHECK_THROWS_AS(solve({{1.0}, {}, {}, {-1.0}}), fairsel::lp::SolverError);
}

TEST_CASE("degenerate vertex does not cycle") {
    // several constraints through the origin
    LpProblem p{{1.0, 1.0, 1.0},
                {{1.0, -1.0, 0.0}, {0.0, 1.0, -1.0}, {-1.0, 0.0, 1.0}, {1.0, 1.0, 1.0}},
                {0.0, 0.0, 0.0, 1.5},
                {}};
    const auto s = solve(p);
    REQUIRE(s.optimal());
    CHECK(s.objective == doctest::Approx(1.5));
}

TEST_CASE("property: matches vertex enumeration on small random problems") {
    std::mt19937_64 rng(21);
    int feasible = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 6);
        const int k = static_cast<int>(rng() % 4);
        LpProblem p;
        for (int j = 0; j < n; ++j) p.objective.push_back(oracle::uniform(rng, -2, 2));
        for (int i = 0; i < k; ++i) {
            std::vector<double> row;
            for (int j = 0; j < n; ++j) row.push_back(rng() % 5 == 0 ? 0.0 : oracle::uniform(rng, -2, 2));
            p.rows.push_back(row);
            p.rhs.push_back(oracle::uniform(rng, -1, 2));
        }
        if (trial % 3 == 0)
            for (int j = 0; j < n; ++j) p.upper.push_back(rng() % 4 == 0 ? 0.0 : oracle::uniform(rng, 0.1, 3));
        const auto ref = oracle::lp_by_vertices(p);
        const auto s = solve(p);
        if (!ref) {
            CHECK(s.status == Status::Infeasible);
            continue;
        }
        ++feasible;
        REQUIRE(s.optimal());
        CHECK(std::abs(s.objective - *ref) <= 1e-7);
        const auto again = solve(p);
        CHECK(again.values == s.values);
    }
    CHECK(feasible > 200);
}
