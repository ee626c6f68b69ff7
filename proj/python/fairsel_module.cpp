// Python bindings. Instances cross the boundary as their JSON text so the
// Python side can use the same files as the command-line tool.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fairsel/data_io.hpp"
#include "fairsel/experiments.hpp"
#include "fairsel/multi_step.hpp"
#include "fairsel/single_step.hpp"

namespace py = pybind11;
using namespace fairsel;

namespace {

py::object opt(const std::optional<double>& v) { return v ? py::object(py::float_(*v)) : py::object(py::none()); }

py::dict policy_dict(const Policy& p) {
    py::dict d;
    d["pi_a"] = p.pi_a;
    d["pi_b"] = p.pi_b;
    return d;
}

py::dict assumptions(const std::string& text, std::optional<double> stability_n) {
    const auto r = assumptions_report(instance_from_json(text), std::nullopt, stability_n);
    py::dict d;
    d["a1_monotone_p"] = r.a1_monotone_p;
    d["a2_threshold_order"] = r.a2_threshold_order;
    d["profit_threshold"] = r.profit_threshold;
    d["maintenance_threshold"] = r.maintenance_threshold;
    d["beta"] = r.beta;
    d["p_fail"] = r.p_fail;
    d["a5_stability"] = r.a5_holds ? py::object(py::bool_(*r.a5_holds)) : py::object(py::none());
    d["a6_geometric_decay"] = r.a6_geometric_decay;
    d["a6_pmax_one"] = r.a6_pmax_one;
    d["a7_integer_drift"] = r.a7_integer_drift;
    py::dict cats;
    for (Group g : {Group::A, Group::B}) {
        py::dict gd;
        for (Category c : {Category::C1, Category::C2, Category::C3, Category::C4}) {
            const auto& s = r.stat(g, c);
            py::dict sd;
            sd["gamma"] = s.gamma;
            sd["mass"] = s.mass;
            sd["mu"] = s.mu;
            sd["empty"] = s.empty;
            gd[to_string(c)] = sd;
        }
        cats[g == Group::A ? "A" : "B"] = gd;
    }
    d["categories"] = cats;
    return d;
}

py::dict fair_opt(const std::string& text, double alpha, const std::string& method, int omega_grid_size,
                  bool non_degrading) {
    const Instance inst = instance_from_json(text);
    const VariableMask mask = non_degrading ? restrict_non_degrading(inst) : VariableMask{};
    FairSolution s;
    if (method == "lp")
        s = fair_opt_lp(inst, alpha, mask);
    else if (method == "threshold")
        s = fair_opt_threshold(inst, alpha, omega_grid_size, mask);
    else
        throw std::invalid_argument("method must be lp or threshold");
    py::dict d;
    d["feasible"] = s.feasible;
    d["value"] = s.value;
    d["mu_a_prime"] = s.mu_a_prime;
    d["mu_b_prime"] = s.mu_b_prime;
    d["gap"] = s.gap;
    d["policy"] = policy_dict(s.policy);
    return d;
}

py::dict pof(const std::string& text, double alpha, const std::string& method, int omega_grid_size,
             bool non_degrading) {
    PofOptions o;
    if (method == "threshold")
        o.method = FairMethod::Threshold;
    else if (method != "lp")
        throw std::invalid_argument("method must be lp or threshold");
    o.omega_grid_size = omega_grid_size;
    o.non_degrading = non_degrading;
    const auto r = price_of_fairness(instance_from_json(text), alpha, o);
    py::dict d;
    d["alpha"] = r.alpha;
    d["opt_value"] = r.opt_value;
    d["fair_value"] = opt(r.fair_value);
    d["pof"] = opt(r.pof);
    d["feasible"] = r.feasible;
    return d;
}

py::dict pos(const std::string& text, double alpha, int omega_grid_size, bool non_degrading) {
    const auto r = price_of_simplicity(instance_from_json(text), alpha, omega_grid_size, non_degrading);
    py::dict d;
    d["alpha"] = r.alpha;
    d["omega_grid"] = r.omega_grid_size;
    d["lp_value"] = opt(r.lp_value);
    d["threshold_value"] = opt(r.threshold_value);
    d["pos"] = opt(r.pos);
    d["feasible"] = r.feasible;
    return d;
}

py::dict simulate(const std::string& text, const std::string& policy, int n, int steps,
                  std::vector<std::uint64_t> seeds, int opportunities, double alpha, int threads) {
    SimConfig cfg;
    cfg.policy = parse_policy_kind(policy);
    cfg.n_agents = n;
    cfg.horizon = steps;
    cfg.seeds = std::move(seeds);
    cfg.opportunities = opportunities;
    cfg.alpha = alpha;
    cfg.threads = threads;
    Trajectory traj;
    {
        py::gil_scoped_release release;
        traj = run(cfg, instance_from_json(text));
    }
    std::vector<double> gap{traj.initial_mean.gap}, cum{0.0}, mean_a{traj.initial_mean.mean_a},
        mean_b{traj.initial_mean.mean_b};
    for (const auto& m : traj.mean) {
        gap.push_back(m.gap);
        cum.push_back(m.cum_utility);
        mean_a.push_back(m.mean_a);
        mean_b.push_back(m.mean_b);
    }
    py::dict d;
    d["policy"] = to_string(traj.policy);
    d["gap"] = gap;
    d["cum_utility"] = cum;
    d["mean_a"] = mean_a;
    d["mean_b"] = mean_b;
    return d;
}

}  // namespace

PYBIND11_MODULE(_fairsel, m) {
    m.doc() = "Fair selection policies: single-step solvers and a multi-step simulator";

    py::register_exception<IoError>(m, "IoError", PyExc_ValueError);

    m.def(
        "synth_gaussian",
        [](double mean_a, double mean_b, double variance, double w_a, int x_max, double u_plus, double u_minus,
           double c_plus, double c_minus, bool sigma) {
            return instance_to_json(
                synth_gaussian({mean_a, mean_b, variance, sigma, w_a}, x_max, {u_plus, u_minus, c_plus, c_minus}));
        },
        py::arg("mean_a") = 80.0, py::arg("mean_b") = 60.0, py::arg("variance") = 30.0, py::arg("w_a") = 0.7,
        py::arg("x_max") = 100, py::arg("u_plus") = 2.0, py::arg("u_minus") = -2.0, py::arg("c_plus") = 2.0,
        py::arg("c_minus") = -1.0, py::arg("sigma") = false, "Instance JSON with discretized Gaussian groups");

    m.def(
        "synth_geometric_failure",
        [](double p_fail, double c_plus, double c_minus, double mean_a, double mean_b, double variance, double w_a,
           int x_max) {
            return instance_to_json(synth_geometric_failure(p_fail, c_plus, c_minus, x_max,
                                                            synthetic_baseline_econ(),
                                                            {mean_a, mean_b, variance, false, w_a}));
        },
        py::arg("p_fail") = 0.01, py::arg("c_plus") = 2.0, py::arg("c_minus") = -1.0, py::arg("mean_a") = 90.0,
        py::arg("mean_b") = 70.0, py::arg("variance") = 30.0, py::arg("w_a") = 0.7, py::arg("x_max") = 100);

    m.def("read_instance", [](const std::string& path) { return instance_to_json(read_instance(path)); });
    m.def("write_instance",
          [](const std::string& path, const std::string& text) { write_instance(path, instance_from_json(text)); });
    m.def("normalize_instance", [](const std::string& text) { return instance_to_json(instance_from_json(text)); },
          "Parse and re-serialize, validating the instance");

    m.def(
        "categories",
        [](const std::string& text) {
            std::vector<std::string> out;
            for (auto c : category_table(instance_from_json(text))) out.emplace_back(to_string(c));
            return out;
        },
        "Category label for every grid score");
    m.def("assumptions", &assumptions, py::arg("instance"), py::arg("stability_n") = py::none());

    m.def(
        "optimal_policy",
        [](const std::string& text) {
            const auto o = optimal_policy(instance_from_json(text));
            py::dict d;
            d["cutoff"] = o.policy.a.cutoff;
            d["value"] = o.value;
            return d;
        },
        py::arg("instance"));
    m.def("fair_opt", &fair_opt, py::arg("instance"), py::arg("alpha"), py::arg("method") = "lp",
          py::arg("omega_grid") = 101, py::arg("non_degrading") = false,
          "Optimal alpha-fair policy; alpha in grid units");
    m.def("price_of_fairness", &pof, py::arg("instance"), py::arg("alpha"), py::arg("method") = "lp",
          py::arg("omega_grid") = 101, py::arg("non_degrading") = false);
    m.def("price_of_simplicity", &pos, py::arg("instance"), py::arg("alpha"), py::arg("omega_grid") = 101,
          py::arg("non_degrading") = false);

    m.def("lb_general", [](double alpha, double eps) { return instance_to_json(build_lb_general(alpha, eps)); },
          py::arg("alpha"), py::arg("eps"));
    m.def("lb_tv", [](double alpha, double eps) { return instance_to_json(build_lb_tv(alpha, eps)); },
          py::arg("alpha"), py::arg("eps"));

    m.def("simulate", &simulate, py::arg("instance"), py::arg("policy") = "investment", py::arg("n") = 10000,
          py::arg("steps") = 50, py::arg("seeds") = std::vector<std::uint64_t>{0, 1, 2, 3, 4},
          py::arg("opportunities") = 1, py::arg("alpha") = 1.0, py::arg("threads") = 0,
          "Across-seed mean trajectory, index 0 is the initial state; alpha in grid units");

    m.def("preset_names", &preset_names);
    m.def(
        "run_preset",
        [](const std::string& name, const std::string& out_dir, int n, int steps) {
            PresetOptions o;
            o.out_dir = out_dir;
            o.n_agents = n;
            o.steps = steps;
            py::gil_scoped_release release;
            return run_preset(name, o);
        },
        py::arg("name"), py::arg("out_dir"), py::arg("n") = 0, py::arg("steps") = 0,
        "Writes the preset outputs and returns their paths");
}
