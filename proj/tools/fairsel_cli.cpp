// fairsel: instance generation, assumption checks, single-step sweeps,
// multi-step simulation and lower-bound demos.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairsel/data_io.hpp"
#include "fairsel/experiments.hpp"
#include "fairsel/lp.hpp"
#include "fairsel/multi_step.hpp"
#include "fairsel/single_step.hpp"

namespace {

using namespace fairsel;
using ojson = nlohmann::ordered_json;

constexpr int kInputError = 2;
constexpr int kSolverError = 3;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty() || out_path == "-")
        std::cout << text;
    else
        write_text_file(out_path, text);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (tok.empty() || used != tok.size()) throw InputError("bad seed '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw InputError("no seeds given");
    return out;
}

std::vector<int> parse_sizes(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (tok.empty() || used != tok.size() || v < 1) throw InputError("bad omega grid size '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw InputError("no omega grid size given");
    return out;
}

ojson report_json(const AssumptionsReport& r) {
    ojson j;
    j["a1_monotone_p"] = r.a1_monotone_p;
    j["a2_threshold_order"] = r.a2_threshold_order;
    j["profit_threshold"] = r.profit_threshold;
    j["maintenance_threshold"] = r.maintenance_threshold;
    ojson cats;
    for (Group g : {Group::A, Group::B}) {
        ojson gj;
        for (Category c : {Category::C1, Category::C2, Category::C3, Category::C4}) {
            const auto& s = r.stat(g, c);
            gj[to_string(c)] = {{"gamma", s.gamma}, {"mass", s.mass}, {"mu", s.mu}, {"empty", s.empty}};
        }
        cats[g == Group::A ? "A" : "B"] = gj;
    }
    j["categories"] = cats;
    j["beta"] = r.beta;
    j["p_fail"] = r.p_fail;
    if (r.stability_n) j["stability_n"] = *r.stability_n;
    j["a5_stability"] = r.a5_holds ? ojson(*r.a5_holds) : ojson(nullptr);
    j["a6_geometric_decay"] = r.a6_geometric_decay;
    j["a6_pmax_one"] = r.a6_pmax_one;
    j["a7_integer_drift"] = r.a7_integer_drift;
    return j;
}

ojson policy_json(const Policy& p) { return {{"pi_a", p.pi_a}, {"pi_b", p.pi_b}}; }

Instance load(const std::string& path) {
    if (path.empty()) throw InputError("--instance is required");
    return read_instance(path);
}

struct Options {
    std::string instance, out, alpha_grid = "0:1:0.01", method = "lp", omega = "101", policy = "investment";
    std::string seeds = "0,1,2,3,4", family, preset, gen_kind, csv;
    std::optional<std::uint64_t> seed;
    double alpha = 0.01, eps = 0.01;
    bool alpha_absolute = false, non_degrading = false, full_scale = false, sigma = false, integer_drift = false;
    int n = 100000, steps = 100, m = 1, threads = 0, x_max = 100;
    int preset_n = 0, preset_steps = 0;
    std::optional<double> beta, stability_n;
    GaussianShape shape;
    Economics econ = synthetic_baseline_econ();
    std::string p_kind = "linear";
    double p_fail = 0.01;
};

int cmd_check(const Options& o) {
    const Instance inst = load(o.instance);
    std::optional<double> beta_hint = o.beta;
    emit(o.out, report_json(assumptions_report(inst, beta_hint, o.stability_n)).dump(2) + "\n");
    return 0;
}

int cmd_gen(const Options& o) {
    GaussianShape shape = o.shape;
    shape.variance_is_sigma = o.sigma;
    Instance inst;
    if (o.gen_kind == "gaussian") {
        if (o.p_kind != "linear" && o.p_kind != "table") throw InputError("--p-kind must be linear or table");
        inst = synth_gaussian(shape, o.x_max, o.econ, o.p_kind == "table" ? PKind::Table : PKind::Linear);
    } else if (o.gen_kind == "geometric") {
        inst = synth_geometric_failure(o.p_fail, o.econ.c_plus, o.econ.c_minus, o.x_max, o.econ, shape);
    } else if (o.gen_kind == "from-csv") {
        if (o.csv.empty()) throw InputError("--csv is required for from-csv");
        const auto groups = load_group_csv(o.csv, o.x_max);
        for (const auto& w : groups.warnings) std::cerr << "warning: " << w << "\n";
        inst.grid.x_max = o.x_max;
        inst.p = SuccessProb::linear(o.x_max);
        inst.econ = o.econ;
        inst.dist_a = groups.a;
        inst.dist_b = groups.b;
        inst.w_a = shape.w_a;
        inst.w_b = 1.0 - shape.w_a;
        inst.meta.provenance = "group-csv";
        inst.validate();
    } else {
        throw InputError("unknown generator '" + o.gen_kind + "'");
    }
    if (o.integer_drift) inst = integer_drift_variant(inst);
    emit(o.out, instance_to_json(inst));
    return 0;
}

void warn_assumptions(const Instance& inst) {
    const auto r = assumptions_report(inst);
    if (!r.a1_monotone_p) std::cerr << "warning: success probability is not monotone\n";
    if (!r.a2_threshold_order) std::cerr << "warning: profit threshold lies below the maintenance threshold\n";
}

int cmd_single(const Options& o) {
    const Instance inst = load(o.instance);
    warn_assumptions(inst);
    PofOptions opt;
    if (o.method == "lp")
        opt.method = FairMethod::Lp;
    else if (o.method == "threshold")
        opt.method = FairMethod::Threshold;
    else
        throw InputError("--method must be lp or threshold");
    opt.omega_grid_size = parse_sizes(o.omega).front();
    opt.non_degrading = o.non_degrading;
    const auto alphas = parse_alpha_grid(o.alpha_grid);
    for (double a : alphas)
        if (a < 0.0 || a > 1.0) throw InputError("alpha grid values must lie in [0,1]");
    std::ostringstream csv;
    write_pof_csv(csv, pof_sweep(inst, alphas, opt, o.threads));
    emit(o.out, csv.str());
    return 0;
}

int cmd_pos(const Options& o) {
    const Instance inst = load(o.instance);
    warn_assumptions(inst);
    const auto alphas = parse_alpha_grid(o.alpha_grid);
    for (double a : alphas)
        if (a < 0.0 || a > 1.0) throw InputError("alpha grid values must lie in [0,1]");
    std::ostringstream csv;
    write_pos_csv(csv, pos_sweep(inst, alphas, parse_sizes(o.omega), o.non_degrading, o.threads));
    emit(o.out, csv.str());
    return 0;
}

int cmd_multi(const Options& o) {
    const Instance inst = load(o.instance);
    SimConfig cfg;
    cfg.policy = parse_policy_kind(o.policy);
    cfg.n_agents = o.full_scale ? 1000000 : o.n;
    cfg.horizon = o.steps;
    cfg.seeds = o.seed ? std::vector<std::uint64_t>{*o.seed} : parse_seeds(o.seeds);
    cfg.opportunities = o.m;
    cfg.alpha = o.alpha_absolute ? o.alpha : o.alpha * inst.grid.x_max;
    cfg.omega_grid_size = parse_sizes(o.omega).front();
    cfg.threads = o.threads;
    std::ostringstream csv;
    write_traj_csv(csv, run(cfg, inst));
    emit(o.out, csv.str());
    return 0;
}

int cmd_lb(const Options& o) {
    Instance inst;
    if (o.family == "general")
        inst = build_lb_general(o.alpha, o.eps);
    else if (o.family == "tv")
        inst = build_lb_tv(o.alpha, o.eps);
    else
        throw InputError("family must be general or tv");
    const bool tv = o.family == "tv";
    const double scale = inst.meta.scale.value_or(inst.grid.x_max);
    PofOptions opt;
    opt.non_degrading = tv;
    const auto rep = price_of_fairness(inst, o.alpha * scale, opt);
    const auto mask = tv ? restrict_non_degrading(inst) : VariableMask{};
    const auto fair = fair_opt_lp(inst, o.alpha * scale, mask);

    ojson j;
    j["family"] = o.family;
    j["alpha"] = o.alpha;
    j["epsilon"] = o.eps;
    j["alpha_grid_units"] = o.alpha * scale;
    j["opt_value"] = rep.opt_value;
    j["fair_value"] = rep.fair_value ? ojson(*rep.fair_value) : ojson(nullptr);
    j["pof"] = rep.pof ? ojson(*rep.pof) : ojson(nullptr);
    j["feasible"] = rep.feasible;
    j["non_degrading"] = tv;
    if (tv) {
        j["tv_distance"] = total_variation(inst.dist_a, inst.dist_b);
        double c4 = 0.0;
        const auto cats = category_table(inst);
        for (std::size_t x = 0; x < cats.size(); ++x)
            if (cats[x] == Category::C4) c4 = std::max({c4, fair.policy.pi_a[x], fair.policy.pi_b[x]});
        j["c4_max_selection"] = c4;
    }
    j["fair_policy"] = policy_json(fair.policy);

    const std::string dir = o.out.empty() ? "." : o.out;
    write_instance(dir + "/instance.json", inst);
    write_text_file(dir + "/pof.json", j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_preset(const Options& o) {
    PresetOptions po;
    po.out_dir = o.out.empty() ? "." : o.out;
    po.fico_csv = o.csv;
    po.full_scale = o.full_scale;
    po.seeds = o.seed ? std::vector<std::uint64_t>{*o.seed} : parse_seeds(o.seeds);
    po.threads = o.threads;
    po.n_agents = o.preset_n;
    po.steps = o.preset_steps;
    for (const auto& p : run_preset(o.preset, po)) std::cout << p << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairsel: fair selection policies, single-step and repeated"};
    app.require_subcommand(1);
    Options o;

    const auto add_common = [&](CLI::App* c) {
        c->add_option("--out", o.out, "Output path (directory for lb and preset)");
        c->add_option("--threads", o.threads, "Worker threads, 0 for all cores");
    };
    const auto add_instance = [&](CLI::App* c) { c->add_option("--instance", o.instance, "Instance JSON")->required(); };
    const auto add_econ = [&](CLI::App* c) {
        c->add_option("--u-plus", o.econ.u_plus);
        c->add_option("--u-minus", o.econ.u_minus);
        c->add_option("--c-plus", o.econ.c_plus);
        c->add_option("--c-minus", o.econ.c_minus);
    };

    auto* check = app.add_subcommand("check", "Report assumption checks as JSON");
    add_instance(check);
    add_common(check);
    check->add_option("--beta", o.beta, "Advantage used by the stability check");
    check->add_option("--stability-n", o.stability_n, "Population size for the stability check");

    auto* gen = app.add_subcommand("gen", "Generate an instance JSON");
    gen->add_option("kind", o.gen_kind, "gaussian | geometric | from-csv")->required();
    add_common(gen);
    add_econ(gen);
    gen->add_option("--mean-a", o.shape.mean_a);
    gen->add_option("--mean-b", o.shape.mean_b);
    gen->add_option("--variance", o.shape.variance);
    gen->add_flag("--sigma", o.sigma, "Read --variance as a standard deviation");
    gen->add_option("--w-a", o.shape.w_a);
    gen->add_option("--x-max", o.x_max);
    gen->add_option("--p-kind", o.p_kind, "linear | table");
    gen->add_option("--p-fail", o.p_fail);
    gen->add_option("--csv", o.csv, "Group CSV for from-csv");
    gen->add_flag("--integer-drift", o.integer_drift, "Snap p so expected score moves are positive integers");

    auto* single = app.add_subcommand("single", "Price of Fairness sweep to pof.csv");
    add_instance(single);
    add_common(single);
    single->add_option("--alpha-grid", o.alpha_grid, "lo:hi:step as fractions of the score range");
    single->add_option("--method", o.method, "lp | threshold");
    single->add_option("--omega-grid", o.omega, "Omega grid size for the threshold method");
    single->add_flag("--non-degrading", o.non_degrading);

    auto* pos = app.add_subcommand("pos", "Price of Simplicity sweep to pos.csv");
    add_instance(pos);
    add_common(pos);
    pos->add_option("--alpha-grid", o.alpha_grid);
    pos->add_option("--omega-grid", o.omega, "Comma-separated omega grid sizes");
    pos->add_flag("--non-degrading", o.non_degrading);

    auto* multi = app.add_subcommand("multi", "Multi-step simulation to traj.csv");
    add_instance(multi);
    add_common(multi);
    multi->add_option("--policy", o.policy, "myopic | investment | simple-investment | threshold-fair | zero-gap-lp");
    multi->add_option("--n", o.n);
    multi->add_option("--steps", o.steps);
    multi->add_option("--seeds", o.seeds, "Comma-separated seeds");
    multi->add_option("--seed", o.seed, "Single seed, overrides --seeds");
    multi->add_option("--opportunities", o.m);
    multi->add_option("--alpha", o.alpha, "Gap budget for threshold-fair as a fraction of the range");
    multi->add_flag("--alpha-absolute", o.alpha_absolute, "Read --alpha in grid units");
    multi->add_option("--omega-grid", o.omega);
    multi->add_flag("--full-scale", o.full_scale, "Use 1,000,000 agents");

    auto* lb = app.add_subcommand("lb", "Lower-bound construction and its measured PoF");
    lb->add_option("family", o.family, "general | tv")->required();
    add_common(lb);
    lb->add_option("--alpha", o.alpha)->required();
    lb->add_option("--eps", o.eps)->required();

    auto* preset = app.add_subcommand("preset", "Run a named experiment preset");
    preset->add_option("name", o.preset, "Preset name")->required()->check(CLI::IsMember(preset_names()));
    add_common(preset);
    preset->add_option("--seeds", o.seeds);
    preset->add_option("--seed", o.seed);
    preset->add_option("--groups", o.csv, "Group CSV for the FICO-style presets");
    preset->add_flag("--full-scale", o.full_scale, "Use 1,000,000 agents for fig2-multistep");
    preset->add_option("--n", o.preset_n, "Override the preset population size");
    preset->add_option("--steps", o.preset_steps, "Override the preset horizon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInputError;
    }

    try {
        if (*check) return cmd_check(o);
        if (*gen) return cmd_gen(o);
        if (*single) return cmd_single(o);
        if (*pos) return cmd_pos(o);
        if (*multi) return cmd_multi(o);
        if (*lb) return cmd_lb(o);
        if (*preset) return cmd_preset(o);
    } catch (const lp::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kSolverError;
    } catch (const IoError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::domain_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kSolverError;
    }
    return kInputError;
}
