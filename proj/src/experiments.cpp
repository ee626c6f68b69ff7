#include "fairsel/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

#ifndef FAIRSEL_DATA_DIR
#define FAIRSEL_DATA_DIR "data"
#endif

namespace fairsel {

namespace {

double round12(double v) { return std::round(v * 1e12) / 1e12; }

double parse_double(const std::string& s, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
        throw std::invalid_argument("bad " + what + " '" + s + "'");
    return v;
}

std::string join(const std::string& dir, const std::string& file) {
    if (dir.empty() || dir == ".") return file;
    return dir.back() == '/' ? dir + file : dir + "/" + file;
}

std::string slug(double v) {
    std::string s = format_number(v);
    for (char& c : s)
        if (c == '-') c = 'm';
    return s;
}

std::vector<double> unit_grid() { return parse_alpha_grid("0:1:0.01"); }

std::vector<std::string> write_pof_preset(const Instance& inst, const PresetOptions& o) {
    const std::string ipath = join(o.out_dir, "instance.json");
    write_instance(ipath, inst);
    std::ostringstream csv;
    write_pof_csv(csv, pof_sweep(inst, unit_grid(), PofOptions{}, o.threads));
    const std::string cpath = join(o.out_dir, "pof.csv");
    write_text_file(cpath, csv.str());
    return {ipath, cpath};
}

std::vector<std::string> write_multi_preset(const Instance& inst, const PresetOptions& o, int n, int steps) {
    std::vector<std::string> out;
    const std::string ipath = join(o.out_dir, "instance.json");
    write_instance(ipath, inst);
    out.push_back(ipath);
    for (PolicyKind k : {PolicyKind::Myopic, PolicyKind::Investment, PolicyKind::SimpleInvestment,
                         PolicyKind::ThresholdFair, PolicyKind::ZeroGapLp}) {
        SimConfig cfg;
        cfg.n_agents = o.n_agents > 0 ? o.n_agents : n;
        cfg.horizon = o.steps > 0 ? o.steps : steps;
        cfg.seeds = o.seeds;
        cfg.policy = k;
        cfg.alpha = 0.01 * inst.grid.x_max;
        cfg.threads = o.threads;
        std::ostringstream csv;
        write_traj_csv(csv, run(cfg, inst));
        const std::string path = join(o.out_dir, std::string("traj_") + to_string(k) + ".csv");
        write_text_file(path, csv.str());
        out.push_back(path);
    }
    return out;
}

}  // namespace

std::vector<double> parse_alpha_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    if (parts.size() == 1) return {round12(parse_double(parts[0], "alpha"))};
    if (parts.size() != 3) throw std::invalid_argument("alpha grid must be lo:hi:step, got '" + text + "'");
    const double lo = parse_double(parts[0], "alpha grid start");
    const double hi = parse_double(parts[1], "alpha grid end");
    const double step = parse_double(parts[2], "alpha grid step");
    if (!(step > 0.0)) throw std::invalid_argument("alpha grid step must be > 0");
    if (hi < lo) throw std::invalid_argument("alpha grid end is below its start");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    if (count > 1000000) throw std::invalid_argument("alpha grid has too many points");
    std::vector<double> out;
    for (long i = 0; i <= count; ++i) out.push_back(round12(lo + static_cast<double>(i) * step));
    return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
    workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr failure;
    const auto work = [&] {
        for (std::size_t i; !failed && (i = next.fetch_add(1)) < n;) {
            try {
                body(i);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<PofRow> pof_sweep(const Instance& inst, const std::vector<double>& alphas, const PofOptions& options,
                              int threads) {
    std::vector<PofRow> rows(alphas.size());
    parallel_for(alphas.size(), threads, [&](std::size_t i) {
        rows[i] = {alphas[i], price_of_fairness(inst, alphas[i] * inst.grid.x_max, options)};
    });
    return rows;
}

std::vector<PosRow> pos_sweep(const Instance& inst, const std::vector<double>& alphas,
                              const std::vector<int>& omega_sizes, bool non_degrading, int threads) {
    std::vector<PosRow> rows(alphas.size() * omega_sizes.size());
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        const double a = alphas[i / omega_sizes.size()];
        const int k = omega_sizes[i % omega_sizes.size()];
        rows[i] = {a, price_of_simplicity(inst, a * inst.grid.x_max, k, non_degrading)};
    });
    return rows;
}

Economics synthetic_baseline_econ() { return {2.0, -2.0, 2.0, -1.0}; }
Economics synthetic_highrisk_econ() { return {2.0, -20.0, 2.0, -10.0}; }
Economics fico_econ() { return {1.0, -2.0, 7.0, -14.0}; }

Instance fig1_synthetic_baseline() {
    auto inst = synth_gaussian(GaussianShape{80.0, 60.0, 30.0, false, 0.7}, 100, synthetic_baseline_econ());
    inst.meta.provenance = "fig1-synthetic-baseline";
    return inst;
}

Instance fig1_synthetic_highrisk() {
    auto inst = synth_gaussian(GaussianShape{80.0, 60.0, 30.0, false, 0.7}, 100, synthetic_highrisk_econ());
    inst.meta.provenance = "fig1-synthetic-highrisk";
    return inst;
}

Instance fico_instance(const std::string& groups_csv) {
    const auto groups = load_group_csv(groups_csv, 100);
    Instance inst;
    inst.grid.x_max = 100;
    inst.p = SuccessProb::linear(100);
    inst.econ = fico_econ();
    inst.dist_a = groups.a;
    inst.dist_b = groups.b;
    inst.w_a = 0.7;
    inst.w_b = 0.3;
    inst.meta.provenance = "fico-groups";
    inst.validate();
    return inst;
}

Instance fig2_instance() {
    auto inst = synth_gaussian(GaussianShape{90.0, 70.0, 30.0, false, 0.7}, 100, synthetic_baseline_econ());
    inst.meta.provenance = "fig2-multistep";
    return inst;
}

std::string default_fico_csv() {
    const char* env = std::getenv("FAIRSEL_DATA_DIR");
    return std::string(env && *env ? env : FAIRSEL_DATA_DIR) + "/fico_groups.csv";
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig1-synthetic-baseline", "fig1-synthetic-highrisk", "fig1-fico",
                                                "fig2-multistep", "fig3-pos", "fig4-smallpop"};
    return names;
}

std::vector<double> cminus_sweep(const Economics& base) {
    const double tau = base.profit_threshold();
    if (!(tau < 1.0)) throw std::domain_error("profit threshold must be below 1");
    const double boundary = -tau * base.c_plus / (1.0 - tau);
    std::vector<double> out{base.c_minus};
    for (double k : {1.0, 1.1, 1.5, 2.0, 4.0, 10.0}) {
        const double v = round12(boundary * k);
        if (v < base.c_minus - 1e-9 && std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
}

std::vector<std::string> run_preset(const std::string& name, const PresetOptions& o) {
    const std::string fico = o.fico_csv.empty() ? default_fico_csv() : o.fico_csv;
    if (name == "fig1-synthetic-baseline") return write_pof_preset(fig1_synthetic_baseline(), o);
    if (name == "fig1-synthetic-highrisk") return write_pof_preset(fig1_synthetic_highrisk(), o);
    if (name == "fig1-fico") return write_pof_preset(fico_instance(fico), o);
    if (name == "fig2-multistep") return write_multi_preset(fig2_instance(), o, o.full_scale ? 1000000 : 100000, 100);
    if (name == "fig4-smallpop") return write_multi_preset(fig2_instance(), o, 10000, 50);
    if (name == "fig3-pos") {
        std::vector<std::string> out;
        const std::vector<std::pair<std::string, Instance>> bases{{"synthetic", fig1_synthetic_baseline()},
                                                                  {"fico", fico_instance(fico)}};
        for (const auto& [label, base] : bases) {
            for (double cm : cminus_sweep(base.econ)) {
                Instance inst = base;
                inst.econ.c_minus = cm;
                std::ostringstream csv;
                write_pos_csv(csv, pos_sweep(inst, unit_grid(), {1, 10}, false, o.threads));
                const std::string path = join(o.out_dir, "pos_" + label + "_cminus_" + slug(cm) + ".csv");
                write_text_file(path, csv.str());
                out.push_back(path);
            }
        }
        return out;
    }
    throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace fairsel
