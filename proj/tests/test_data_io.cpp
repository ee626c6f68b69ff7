#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "csv_schema.hpp"
#include "fairsel/data_io.hpp"
#include "fairsel/experiments.hpp"

using namespace fairsel;

TEST_CASE("discretized Gaussian") {
    const auto pmf = discretized_gaussian(50, 10, 100);
    for (int d = 0; d <= 50; ++d) CHECK(pmf[static_cast<std::size_t>(50 - d)] == doctest::Approx(pmf[static_cast<std::size_t>(50 + d)]));
    CHECK(std::abs(std::accumulate(pmf.begin(), pmf.end(), 0.0) - 1.0) <= 1e-12);

    const Instance inst = synth_gaussian({}, 100, synthetic_baseline_econ());
    const auto& a = inst.dist_a.pmf;
    CHECK(std::max_element(a.begin(), a.end()) - a.begin() == 80);
    CHECK(std::abs(inst.dist_a.mean() - 80.0) < 1e-2);
    CHECK(std::abs(inst.dist_b.mean() - 60.0) < 1e-6);
    CHECK(inst.w_a == 0.7);
    CHECK(inst.w_b == doctest::Approx(0.3));

    GaussianShape sigma;
    sigma.variance = 5.0;
    sigma.variance_is_sigma = true;
    const auto wide = synth_gaussian(sigma, 100, synthetic_baseline_econ());
    const auto narrow = synth_gaussian({80, 60, 5.0, false, 0.7}, 100, synthetic_baseline_econ());
    CHECK(wide.dist_a.pmf[80] < narrow.dist_a.pmf[80]);

    CHECK_THROWS_AS(synth_gaussian({50, 60, 30, false, 0.7}, 100, synthetic_baseline_econ()), std::domain_error);
    CHECK_THROWS_AS(synth_gaussian({80, 60, 0, false, 0.7}, 100, synthetic_baseline_econ()), std::domain_error);
}

TEST_CASE("geometric failure generator") {
    const auto inst = synth_geometric_failure(0.01, 2, -1, 100, synthetic_baseline_econ(), {90, 70, 30, false, 0.7});
    CHECK(1.0 - inst.p.at(10) == doctest::Approx(0.01 * std::pow(3.0, -5.0)));
    CHECK(inst.p.at(100) == 1.0);
    CHECK(inst.econ.c_plus == 2.0);
    CHECK(inst.econ.c_minus == -1.0);
    const auto rep = assumptions_report(inst);
    CHECK(rep.a6_geometric_decay);
    CHECK(rep.a6_pmax_one);

    double prev = 1.0;
    for (double pf : {0.1, 0.01, 1e-4, 1e-8}) {
        const auto r = assumptions_report(
            synth_geometric_failure(pf, 2, -1, 100, synthetic_baseline_econ(), {90, 70, 30, false, 0.7}));
        CHECK(r.p_fail <= prev);
        prev = r.p_fail;
    }
    CHECK(prev < 1e-7);
    CHECK_THROWS_AS(synth_geometric_failure(0.0, 2, -1, 100, synthetic_baseline_econ(), {}), std::domain_error);
}

TEST_CASE("integer drift variant") {
    Instance inst = synth_gaussian({}, 100, {2.0, -5.0, 2.0, -1.0});
    const auto v = integer_drift_variant(inst);
    for (int x = 0; x <= 100; ++x) {
        const double d = expected_delta(x, v);
        CHECK(d >= 1.0 - 1e-12);
        CHECK(std::abs(d - std::round(d)) <= 1e-9);
    }
    CHECK(assumptions_report(v).a7_integer_drift);
    CHECK(v.p.at(40) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("group CSV ingestion") {
    SUBCASE("exact pmfs are kept without warnings") {
        std::istringstream in("group,score,pmf\nA,0,0.25\nA,2,0.75\nB,1,1\n");
        const auto g = parse_group_csv(in, 2);
        CHECK(g.a.pmf == std::vector<double>{0.25, 0.0, 0.75});
        CHECK(g.b.pmf == std::vector<double>{0.0, 1.0, 0.0});
        CHECK(g.warnings.empty());
    }
    SUBCASE("small drift is renormalized with a warning") {
        std::istringstream in("group,score,pmf\nA,0,0.5\nA,1,0.499999\nB,0,1\n");
        const auto g = parse_group_csv(in, 1);
        CHECK(g.a.pmf[0] + g.a.pmf[1] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(g.warnings.size() == 1);
    }
    SUBCASE("unknown labels name the row") {
        std::istringstream in("group,score,pmf\nA,0,1\nC,0,1\n");
        try {
            parse_group_csv(in, 1);
            FAIL("expected an error");
        } catch (const IoError& e) {
            REQUIRE(e.row().has_value());
            CHECK(*e.row() == 3);
        }
    }
    SUBCASE("other malformed inputs") {
        const auto fails = [](const std::string& text) {
            std::istringstream in(text);
            CHECK_THROWS_AS(parse_group_csv(in, 2), IoError);
        };
        fails("");
        fails("score,group,pmf\nA,0,1\nB,0,1\n");
        fails("group,score,pmf\nA,3,1\nB,0,1\n");
        fails("group,score,pmf\nA,0,1\nA,0,1\nB,0,1\n");
        fails("group,score,pmf\nA,0,-0.1\nA,1,1.1\nB,0,1\n");
        fails("group,score,pmf\nA,0,0.9\nB,0,1\n");
        fails("group,score,pmf\nA,0,x\nB,0,1\n");
        fails("group,score,pmf\nA,0,1\n");
    }
    SUBCASE("the bundled file loads") {
        const auto g = load_group_csv(default_fico_csv(), 100);
        CHECK(std::abs(std::accumulate(g.a.pmf.begin(), g.a.pmf.end(), 0.0) - 1.0) <= 1e-12);
        CHECK(g.a.mean() > g.b.mean());
        CHECK_THROWS_AS(load_group_csv("/nonexistent/groups.csv", 100), IoError);
    }
}

TEST_CASE("instance JSON round-trip") {
    for (const Instance& inst : std::vector<Instance>
         {fig1_synthetic_baseline(), synth_geometric_failure(0.01, 2, -1, 100, synthetic_baseline_econ(), {}),
          build_lb_tv(0.3, 0.05)}) {
        const auto back = instance_from_json(instance_to_json(inst));
        CHECK(back.grid.x_max == inst.grid.x_max);
        CHECK(back.w_a == inst.w_a);
        CHECK(back.econ.c_minus == inst.econ.c_minus);
        CHECK(back.dist_a.pmf == inst.dist_a.pmf);
        CHECK(back.dist_b.pmf == inst.dist_b.pmf);
        CHECK(back.p.values() == inst.p.values());
        CHECK(back.p.kind() == inst.p.kind());
        CHECK(back.meta.provenance == inst.meta.provenance);
        CHECK(instance_to_json(back) == instance_to_json(inst));
    }
    CHECK_THROWS_AS(instance_from_json("{"), IoError);
    CHECK_THROWS_AS(instance_from_json(R"({"x_max": 2})"), IoError);

    const auto dir = std::filesystem::temp_directory_path() / "fairsel_io_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "inst.json").string();
    write_instance(path, fig1_synthetic_baseline());
    CHECK(read_instance(path).dist_b.pmf == fig1_synthetic_baseline().dist_b.pmf);
    CHECK_THROWS_AS(read_instance((dir / "missing.json").string()), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(3.0) == "3");
    CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("result CSV schemas") {
    const Instance inst = fig1_synthetic_baseline();
    const auto alphas = parse_alpha_grid("0:1:0.1");
    REQUIRE(alphas.size() == 11);

    std::ostringstream pof;
    write_pof_csv(pof, pof_sweep(inst, alphas, {}, 2));
    const auto pt = csv_schema::check(pof.str(), csv_schema::pof());
    CHECK(pt.errors.empty());
    CHECK(pt.rows == 11);

    std::ostringstream pos;
    write_pos_csv(pos, pos_sweep(inst, parse_alpha_grid("0:0.2:0.1"), {1, 10}, false, 2));
    const auto ps = csv_schema::check(pos.str(), csv_schema::pos());
    CHECK(ps.errors.empty());
    CHECK(ps.rows == 6);

    SimConfig cfg;
    cfg.n_agents = 300;
    cfg.horizon = 4;
    cfg.seeds = {0, 1, 2};
    const auto traj = run(cfg, fig2_instance());
    std::ostringstream tr;
    write_traj_csv(tr, traj);
    const auto ts = csv_schema::check(tr.str(), csv_schema::traj());
    CHECK(ts.errors.empty());
    CHECK(ts.rows == 3 * 4 + 2 * 4);

    const auto bad = csv_schema::check("alpha,opt_value\n0.1,2\n", csv_schema::pof());
    CHECK_FALSE(bad.errors.empty());
}

TEST_CASE("alpha grid parsing") {
    CHECK(parse_alpha_grid("0.25") == std::vector<double>{0.25});
    CHECK(parse_alpha_grid("0:1:0.01").size() == 101);
    CHECK(parse_alpha_grid("0:1:0.01")[37] == 0.37);
    CHECK(parse_alpha_grid("0:0.95:0.1").back() == 0.9);
    CHECK_THROWS_AS(parse_alpha_grid("0:1:0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_alpha_grid("a:b:c"), std::invalid_argument);
}
