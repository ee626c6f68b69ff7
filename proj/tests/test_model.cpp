#include <doctest.h>

#include <cmath>
#include <random>

#include "fairsel/model.hpp"
#include "oracles.hpp"

using namespace fairsel;

namespace {

Instance linear_instance(const Economics& econ) {
    Instance inst;
    inst.grid.x_max = 100;
    inst.p = SuccessProb::linear(100);
    inst.econ = econ;
    inst.dist_a.pmf.assign(101, 1.0 / 101);
    inst.dist_b.pmf.assign(101, 1.0 / 101);
    return inst;
}

Instance point_masses() {
    Instance inst = linear_instance({2.0, -2.0, 2.0, -1.0});
    inst.dist_a.pmf.assign(101, 0.0);
    inst.dist_b.pmf.assign(101, 0.0);
    inst.dist_a.pmf[75] = 1.0;
    inst.dist_b.pmf[40] = 1.0;
    return inst;
}

const Economics kBaseline{2.0, -2.0, 2.0, -1.0};

}  // namespace

TEST_CASE("expected utility and score move on the baseline economics") {
    const Instance inst = linear_instance(kBaseline);
    CHECK(expected_utility(50, inst) == doctest::Approx(0.0));
    CHECK(expected_utility(75, inst) == doctest::Approx(1.0));
    CHECK(expected_utility(100, inst) == doctest::Approx(inst.econ.u_plus));
    CHECK(expected_delta(50, inst) == doctest::Approx(0.5));
    CHECK(expected_delta(75, inst) == doctest::Approx(1.25));
    CHECK(expected_delta(0, inst) == doctest::Approx(inst.econ.c_minus));
}

TEST_CASE("scores outside the grid are rejected") {
    const Instance inst = linear_instance(kBaseline);
    CHECK_THROWS_AS(expected_utility(-1, inst), std::domain_error);
    CHECK_THROWS_AS(expected_delta(100.5, inst), std::domain_error);
    CHECK_THROWS_AS(categorize(101, inst), std::domain_error);
}

TEST_CASE("categories follow the two thresholds") {
    const Instance inst = linear_instance(kBaseline);
    CHECK(inst.econ.profit_threshold() == doctest::Approx(0.5));
    CHECK(inst.econ.maintenance_threshold() == doctest::Approx(1.0 / 3.0));
    CHECK(categorize(60, inst) == Category::C1);
    CHECK(categorize(40, inst) == Category::C3);
    CHECK(expected_utility(40, inst) == doctest::Approx(-0.4));
    CHECK(expected_delta(40, inst) == doctest::Approx(0.2));
    CHECK(categorize(20, inst) == Category::C4);
    CHECK(expected_utility(20, inst) == doctest::Approx(-1.2));
    CHECK(expected_delta(20, inst) == doctest::Approx(-0.4));
    // ties go to the >= side
    CHECK(categorize(50, inst) == Category::C1);
    CHECK(classify(0.0, 0.0) == Category::C1);
    CHECK(classify(-1.0, 0.0) == Category::C3);
    CHECK(classify(1.0, -1.0) == Category::C2);
}

TEST_CASE("fractional scores interpolate the success table") {
    Instance inst = linear_instance(kBaseline);
    inst.p = SuccessProb::table(std::vector<double>(101, 0.2));
    auto v = inst.p.values();
    v[10] = 0.2;
    v[11] = 0.6;
    inst.p = SuccessProb::table(v);
    CHECK(inst.p.at(10.25) == doctest::Approx(0.3));
    CHECK(inst.p.at(10) == doctest::Approx(0.2));
    CHECK(inst.p.at(100.0) == doctest::Approx(0.2));
}

TEST_CASE("policy value and post-deployment means on point masses") {
    Instance inst = point_masses();
    inst.w_a = inst.w_b = 0.5;
    CHECK(policy_value(Policy::zeros(101), inst) == 0.0);
    const Policy all = Policy::constant(101, 1.0);
    CHECK(policy_value(all, inst) == doctest::Approx(0.3));
    const Policy half = Policy::constant(101, 0.5);
    CHECK(policy_value(all, inst) == doctest::Approx(2.0 * policy_value(half, inst)));

    const auto none = post_means(Policy::zeros(101), inst);
    CHECK(none.mu_a_prime == doctest::Approx(75.0));
    CHECK(none.mu_b_prime == doctest::Approx(40.0));
    CHECK(none.gap == doctest::Approx(35.0));

    const auto pm = post_means(all, inst);
    CHECK(pm.mu_a_prime == doctest::Approx(76.25));
    CHECK(pm.mu_b_prime == doctest::Approx(40.2));
    CHECK(pm.gap == doctest::Approx(36.05));

    Policy only_a = Policy::zeros(101);
    only_a.pi_a.assign(101, 1.0);
    CHECK(post_means(only_a, inst).gap == doctest::Approx(36.25));

    CHECK(is_alpha_fair(all, inst, 36.05));
    CHECK_FALSE(is_alpha_fair(all, inst, 36.0));
    CHECK_THROWS_AS(is_alpha_fair(all, inst, -1.0), std::domain_error);
}

TEST_CASE("symmetric groups are fair at any alpha") {
    Instance inst = linear_instance(kBaseline);
    const Policy pol = Policy::constant(101, 0.37);
    CHECK(is_alpha_fair(pol, inst, 0.0));
}

TEST_CASE("assumptions report") {
    SUBCASE("baseline and high-risk economics satisfy the ordering") {
        CHECK(assumptions_report(linear_instance(kBaseline)).a2_threshold_order);
        const auto hr = assumptions_report(linear_instance({2.0, -20.0, 2.0, -10.0}));
        CHECK(hr.a2_threshold_order);
        CHECK(hr.profit_threshold == doctest::Approx(20.0 / 22.0));
        CHECK(hr.maintenance_threshold == doctest::Approx(10.0 / 12.0));
    }
    SUBCASE("a C- far past the boundary violates the ordering") {
        CHECK_FALSE(assumptions_report(linear_instance({2.0, -2.0, 2.0, -20.0})).a2_threshold_order);
    }
    SUBCASE("identical groups have no advantage") {
        CHECK(assumptions_report(linear_instance(kBaseline)).beta == doctest::Approx(0.0));
    }
    SUBCASE("category masses partition each group") {
        const auto r = assumptions_report(point_masses());
        CHECK(r.stat(Group::A, Category::C1).mass == doctest::Approx(1.0));
        CHECK(r.stat(Group::B, Category::C3).mass == doctest::Approx(1.0));
        CHECK(r.stat(Group::B, Category::C3).mu == doctest::Approx(40.0));
        CHECK(r.stat(Group::A, Category::C4).empty);
        CHECK(r.beta == doctest::Approx(35.0));
    }
    SUBCASE("stability check only runs with a population size") {
        const auto r = assumptions_report(point_masses());
        CHECK_FALSE(r.a5_holds.has_value());
        CHECK(r.p_fail == doctest::Approx(0.66));
        CHECK_FALSE(*assumptions_report(point_masses(), std::nullopt, 1000.0).a5_holds);
    }
    SUBCASE("linear p has a certain top score but no geometric decay") {
        const auto r = assumptions_report(linear_instance(kBaseline));
        CHECK(r.a6_pmax_one);
        CHECK_FALSE(r.a6_geometric_decay);
        CHECK(r.a1_monotone_p);
    }
}

TEST_CASE("instance validation names the broken invariant") {
    Instance inst = linear_instance(kBaseline);
    CHECK_NOTHROW(inst.validate());
    Instance bad = inst;
    bad.dist_a.pmf[0] += 0.1;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("pmf sums"), std::invalid_argument);
    bad = inst;
    bad.w_a = 0.6;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = inst;
    bad.econ.c_minus = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(SuccessProb::table({0.1, 1.2}), std::invalid_argument);
}

TEST_CASE("threshold expansion") {
    const auto pi = GroupThreshold{3, 0.25}.expand(6);
    CHECK(pi == std::vector<double>{0, 0, 0, 0.25, 1, 1});
    CHECK(GroupThreshold{6, 1.0}.expand(6) == std::vector<double>(6, 0.0));
}

TEST_CASE("property: no extractive scores under the threshold ordering") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        oracle::RandomOptions o;
        o.x_max = 20;
        o.a1 = trial % 2 == 0;
        const Instance inst = oracle::random_instance(rng, o);
        REQUIRE(assumptions_report(inst).a2_threshold_order);
        for (auto c : category_table(inst)) CHECK(c != Category::C2);
    }
}

TEST_CASE("property: closed forms are monotone under monotone p") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const Instance inst = oracle::random_instance(rng, {});
        const auto eu = utility_table(inst);
        const auto ed = delta_table(inst);
        for (std::size_t x = 1; x < eu.size(); ++x) {
            CHECK(eu[x] >= eu[x - 1] - 1e-12);
            CHECK(ed[x] >= ed[x - 1] - 1e-12);
        }
    }
}

TEST_CASE("property: value is linear and the gap matches a direct recomputation") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const Instance inst = oracle::random_instance(rng, {});
        Policy pol = Policy::zeros(inst.grid.size());
        for (double& v : pol.pi_a) v = oracle::uniform(rng, 0, 1);
        for (double& v : pol.pi_b) v = oracle::uniform(rng, 0, 1);
        const double lambda = oracle::uniform(rng, 0, 1);
        Policy scaled = pol;
        for (double& v : scaled.pi_a) v *= lambda;
        for (double& v : scaled.pi_b) v *= lambda;
        CHECK(policy_value(scaled, inst) == doctest::Approx(lambda * policy_value(pol, inst)).epsilon(1e-9));

        // reverse summation order, closed form inlined
        double ma = 0.0, mb = 0.0;
        for (int x = inst.grid.x_max; x >= 0; --x) {
            const auto i = static_cast<std::size_t>(x);
            const double p = inst.p.at(x);
            const double d = p * inst.econ.c_plus + (1 - p) * inst.econ.c_minus;
            ma += inst.dist_a.pmf[i] * (x + pol.pi_a[i] * d);
            mb += inst.dist_b.pmf[i] * (x + pol.pi_b[i] * d);
        }
        CHECK(std::abs(post_means(pol, inst).gap - std::abs(ma - mb)) <= 1e-9);

        for (int x = 0; x <= inst.grid.x_max; ++x) {
            const double eu = expected_utility(x, inst), ed = expected_delta(x, inst);
            const Category c = categorize(x, inst);
            CHECK((c == Category::C1 || c == Category::C2) == (eu >= -kTieTolerance));
            CHECK((c == Category::C1 || c == Category::C3) == (ed >= -kTieTolerance));
        }
    }
}
