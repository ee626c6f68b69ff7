#include "fairsel/multi_step.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include "fairsel/lp.hpp"
#include "fairsel/single_step.hpp"

namespace fairsel {

namespace {

constexpr double kAtTop = 1e-9;

bool investable(Category c) { return c == Category::C1 || c == Category::C3; }

// Number of successes in m trials from one uniform, by CDF inversion over
// the rarer outcome. Falls back to m draws when the base term underflows.
int binomial(int m, double p, Rng& rng) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return m;
    const bool flip = p > 0.5;
    const double q = flip ? 1.0 - p : p;
    double term = std::pow(1.0 - q, m);
    if (!(term > 0.0)) {
        int wins = 0;
        for (int k = 0; k < m; ++k) wins += rng.bernoulli(p) ? 1 : 0;
        return wins;
    }
    const double u = rng.uniform();
    const double ratio = q / (1.0 - q);
    double cdf = term;
    int k = 0;
    while (u >= cdf && k < m) {
        term *= ratio * static_cast<double>(m - k) / static_cast<double>(k + 1);
        ++k;
        cdf += term;
    }
    return flip ? m - k : k;
}

int bin_of(double score, int x_max) {
    return std::clamp(static_cast<int>(std::lround(score)), 0, x_max);
}

// Group pmfs of the current scores, binned to the grid.
Instance empirical_instance(const Population& pop, const Instance& inst) {
    if (pop.n_a == 0 || pop.n_b == 0) throw std::invalid_argument("fair policies need both groups populated");
    Instance emp = inst;
    emp.meta = {};
    const auto n = static_cast<std::size_t>(inst.grid.size());
    emp.dist_a.pmf.assign(n, 0.0);
    emp.dist_b.pmf.assign(n, 0.0);
    for (const auto& a : pop.agents) {
        auto& pmf = a.group == Group::A ? emp.dist_a.pmf : emp.dist_b.pmf;
        pmf[static_cast<std::size_t>(bin_of(a.score, inst.grid.x_max))] += 1.0;
    }
    for (double& v : emp.dist_a.pmf) v /= pop.n_a;
    for (double& v : emp.dist_b.pmf) v /= pop.n_b;
    return emp;
}

// Zero-gap policy on the binned population: minimize the expected post-step
// gap, then maximize utility within that gap.
Policy zero_gap_policy(const Instance& emp, double& min_gap) {
    const auto eu = utility_table(emp);
    const auto ed = delta_table(emp);
    const auto mask = restrict_non_degrading(emp);
    const auto n = static_cast<std::size_t>(emp.grid.size());
    const double gap0 = emp.dist_a.mean() - emp.dist_b.mean();

    std::vector<double> drift(2 * n), value(2 * n), upper(2 * n, 1.0);
    for (std::size_t x = 0; x < n; ++x) {
        drift[x] = emp.dist_a.pmf[x] * ed[x];
        drift[n + x] = -emp.dist_b.pmf[x] * ed[x];
        value[x] = emp.w_a * emp.dist_a.pmf[x] * eu[x];
        value[n + x] = emp.w_b * emp.dist_b.pmf[x] * eu[x];
        if (mask.pinned_a[x]) upper[x] = 0.0;
        if (mask.pinned_b[x]) upper[n + x] = 0.0;
    }
    const double span =
        emp.grid.x_max + 2.0 * std::max(std::abs(emp.econ.c_plus), std::abs(emp.econ.c_minus));

    // phase 1: the gap is span * s with s in [0, 1]
    lp::LpProblem p1;
    p1.objective.assign(2 * n + 1, 0.0);
    p1.objective.back() = -1.0;
    p1.upper = upper;
    p1.upper.push_back(1.0);
    std::vector<double> up(drift), down(drift);
    for (double& v : down) v = -v;
    up.push_back(-span);
    down.push_back(-span);
    p1.rows = {up, down};
    p1.rhs = {-gap0, gap0};
    const auto s1 = lp::solve(p1);
    if (!s1.optimal()) throw lp::SolverError("zero-gap phase 1 reported infeasible");
    min_gap = std::max(0.0, span * s1.values.back());

    Policy pol = Policy::zeros(static_cast<int>(n));
    const auto fill = [&](const std::vector<double>& v) {
        for (std::size_t x = 0; x < n; ++x) {
            pol.pi_a[x] = std::clamp(v[x], 0.0, 1.0);
            pol.pi_b[x] = std::clamp(v[n + x], 0.0, 1.0);
        }
    };

    lp::LpProblem p2;
    p2.objective = value;
    p2.upper = upper;
    std::vector<double> neg(drift);
    for (double& v : neg) v = -v;
    p2.rows = {drift, neg};
    const double budget = min_gap + 1e-9;
    p2.rhs = {budget - gap0, budget + gap0};
    const auto s2 = lp::solve(p2);
    if (s2.optimal()) {
        fill(s2.values);
    } else {
        fill(s1.values);  // tolerance edge: keep the gap-minimizing point
    }
    return pol;
}

StepMetrics combine(const std::vector<const StepMetrics*>& rows, bool want_sd) {
    StepMetrics out;
    const double k = static_cast<double>(rows.size());
    if (rows.empty()) return out;
    out.t = rows.front()->t;
    const auto field = [&](auto get) {
        double m = 0.0;
        for (const auto* r : rows) m += get(*r);
        m /= k;
        if (!want_sd) return m;
        if (rows.size() < 2) return 0.0;
        double ss = 0.0;
        for (const auto* r : rows) ss += (get(*r) - m) * (get(*r) - m);
        return std::sqrt(ss / (k - 1.0));
    };
    out.mean_a = field([](const StepMetrics& r) { return r.mean_a; });
    out.mean_b = field([](const StepMetrics& r) { return r.mean_b; });
    out.gap = field([](const StepMetrics& r) { return r.gap; });
    out.step_utility = field([](const StepMetrics& r) { return r.step_utility; });
    out.cum_utility = field([](const StepMetrics& r) { return r.cum_utility; });
    out.frac_xmax_a = field([](const StepMetrics& r) { return r.frac_xmax_a; });
    out.frac_xmax_b = field([](const StepMetrics& r) { return r.frac_xmax_b; });
    out.selected_count = std::lround(field([](const StepMetrics& r) { return static_cast<double>(r.selected_count); }));
    for (const auto* r : rows) out.infeasible = out.infeasible || r->infeasible;
    if (std::all_of(rows.begin(), rows.end(), [](const StepMetrics* r) { return r->min_gap.has_value(); }))
        out.min_gap = field([](const StepMetrics& r) { return *r.min_gap; });
    for (const auto* r : rows) {
        if (!r->min_delta_selected) continue;
        out.min_delta_selected = out.min_delta_selected ? std::min(*out.min_delta_selected, *r->min_delta_selected)
                                                        : *r->min_delta_selected;
    }
    return out;
}

bool integer_moves(const Instance& inst) {
    return inst.econ.c_plus == std::round(inst.econ.c_plus) && inst.econ.c_minus == std::round(inst.econ.c_minus);
}

SeedRun run_seed(const SimConfig& cfg, const Instance& inst, std::uint64_t seed) {
    SeedRun out;
    out.seed = seed;
    Population pop = make_population(inst, cfg.n_agents, seed);
    out.initial = measure(pop, inst);

    std::vector<std::size_t> tracked;
    std::map<int, std::vector<double>> paths;
    std::vector<int> start_bin;
    const bool deviation = cfg.trace_cascade && cfg.opportunities == 1 && integer_moves(inst);
    if (cfg.trace_cascade) {
        for (std::size_t i = 0; i < pop.agents.size(); ++i) {
            if (!investable(categorize(pop.agents[i].score, inst))) continue;
            tracked.push_back(i);
            const int b = bin_of(pop.agents[i].score, inst.grid.x_max);
            start_bin.push_back(b);
            if (deviation && !paths.count(b)) paths[b] = expected_investment_path(inst, b, cfg.horizon);
        }
        out.tracked_agents = static_cast<long>(tracked.size());
    }

    double cum = 0.0;
    out.steps.reserve(static_cast<std::size_t>(cfg.horizon));
    for (int t = 1; t <= cfg.horizon; ++t) {
        Rng sel_rng(seed, static_cast<std::uint64_t>(t), 1);
        Rng out_rng(seed, static_cast<std::uint64_t>(t), 2);
        bool infeasible = false;
        std::optional<double> min_gap;
        const auto mask = select(cfg.policy, pop, inst, cfg.alpha, sel_rng, cfg.omega_grid_size, &infeasible, &min_gap);
        StepMetrics m = advance(pop, mask, inst, cfg.opportunities, out_rng);
        m.t = t;
        cum += m.step_utility;
        m.cum_utility = cum;
        m.infeasible = infeasible;
        m.min_gap = min_gap;
        out.steps.push_back(m);

        if (cfg.trace_cascade) {
            CascadeStep cs;
            cs.t = t;
            long alive = 0, top = 0;
            double dev = 0.0;
            for (std::size_t j = 0; j < tracked.size(); ++j) {
                const auto& a = pop.agents[tracked[j]];
                if (a.score >= inst.grid.x_max - kAtTop) ++top;
                if (a.ever_failed) continue;
                ++alive;
                if (deviation)
                    dev = std::max(dev, std::abs(a.score - paths[start_bin[j]][static_cast<std::size_t>(t)]));
            }
            const double denom = tracked.empty() ? 1.0 : static_cast<double>(tracked.size());
            cs.never_failed_frac = tracked.empty() ? 1.0 : alive / denom;
            cs.xmax_frac = tracked.empty() ? 0.0 : top / denom;
            if (deviation) cs.max_deviation = dev;
            out.cascade.push_back(cs);
        }
    }
    return out;
}

}  // namespace

const char* to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::Myopic: return "myopic";
        case PolicyKind::Investment: return "investment";
        case PolicyKind::SimpleInvestment: return "simple-investment";
        case PolicyKind::ThresholdFair: return "threshold-fair";
        case PolicyKind::ZeroGapLp: return "zero-gap-lp";
    }
    return "?";
}

PolicyKind parse_policy_kind(const std::string& name) {
    for (auto k : {PolicyKind::Myopic, PolicyKind::Investment, PolicyKind::SimpleInvestment,
                   PolicyKind::ThresholdFair, PolicyKind::ZeroGapLp})
        if (name == to_string(k)) return k;
    throw std::invalid_argument("unknown policy '" + name + "'");
}

Rng::Rng(std::uint64_t seed, std::uint64_t step, std::uint64_t purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                      static_cast<std::uint32_t>(purpose)};
    engine_.seed(seq);
}

void SimConfig::validate() const {
    if (n_agents < 1) throw std::invalid_argument("n_agents must be >= 1");
    if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
    if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
    if (opportunities < 1) throw std::invalid_argument("opportunities must be >= 1");
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    if (omega_grid_size < 1) throw std::invalid_argument("omega grid size must be >= 1");
}

Population make_population(const Instance& inst, int n_agents, std::uint64_t seed) {
    if (n_agents < 1) throw std::invalid_argument("n_agents must be >= 1");
    Population pop;
    pop.n_a = static_cast<int>(std::lround(n_agents * inst.w_a));
    pop.n_a = std::clamp(pop.n_a, 0, n_agents);
    pop.n_b = n_agents - pop.n_a;
    pop.agents.resize(static_cast<std::size_t>(n_agents));

    Rng rng(seed, 0, 0);
    for (Group g : {Group::A, Group::B}) {
        const auto& pmf = inst.dist(g).pmf;
        std::vector<double> cdf(pmf.size());
        double acc = 0.0;
        std::size_t last = 0;
        for (std::size_t x = 0; x < pmf.size(); ++x) {
            acc += pmf[x];
            cdf[x] = acc;
            if (pmf[x] > 0.0) last = x;
        }
        const std::size_t begin = g == Group::A ? 0 : static_cast<std::size_t>(pop.n_a);
        const std::size_t end = begin + static_cast<std::size_t>(pop.count(g));
        for (std::size_t i = begin; i < end; ++i) {
            const double u = rng.uniform() * acc;
            auto x = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            x = std::min(x, last);
            pop.agents[i] = {g, static_cast<double>(x), false, false};
        }
    }
    return pop;
}

std::vector<bool> select(PolicyKind kind, const Population& pop, const Instance& inst, double alpha, Rng& rng,
                         int omega_grid_size, bool* infeasible, std::optional<double>* min_gap) {
    if (pop.agents.empty()) throw std::invalid_argument("population is empty");
    std::vector<bool> mask(pop.agents.size(), false);
    if (infeasible) *infeasible = false;

    std::optional<Policy> fractional;
    if (kind == PolicyKind::ThresholdFair) {
        const Instance emp = empirical_instance(pop, inst);
        const auto sol = fair_opt_threshold(emp, alpha, omega_grid_size, restrict_non_degrading(emp));
        if (!sol.feasible) {
            if (infeasible) *infeasible = true;
            return mask;
        }
        fractional = sol.policy;
    } else if (kind == PolicyKind::ZeroGapLp) {
        const Instance emp = empirical_instance(pop, inst);
        double g = 0.0;
        fractional = zero_gap_policy(emp, g);
        if (min_gap) *min_gap = g;
    }

    for (std::size_t i = 0; i < pop.agents.size(); ++i) {
        const auto& a = pop.agents[i];
        const double eu = expected_utility(a.score, inst);
        const Category c = classify(eu, expected_delta(a.score, inst));
        if (c == Category::C4) continue;
        switch (kind) {
            case PolicyKind::Myopic: mask[i] = eu >= -kTieTolerance; break;
            case PolicyKind::Investment: mask[i] = investable(c) && !a.ever_failed; break;
            case PolicyKind::SimpleInvestment: mask[i] = investable(c); break;
            case PolicyKind::ThresholdFair:
            case PolicyKind::ZeroGapLp: {
                const double pi = fractional->of(a.group)[static_cast<std::size_t>(bin_of(a.score, inst.grid.x_max))];
                if (pi >= 1.0)
                    mask[i] = true;
                else if (pi > 0.0)
                    mask[i] = rng.bernoulli(pi);
                break;
            }
        }
    }
    return mask;
}

StepMetrics advance(Population& pop, const std::vector<bool>& mask, const Instance& inst, int m, Rng& rng) {
    if (mask.size() != pop.agents.size()) throw std::invalid_argument("mask size does not match the population");
    if (m < 1) throw std::invalid_argument("opportunities must be >= 1");
    const auto& e = inst.econ;
    double utility = 0.0;
    long selected = 0;
    std::optional<double> min_delta;
    for (std::size_t i = 0; i < pop.agents.size(); ++i) {
        auto& a = pop.agents[i];
        a.selected_last = mask[i];
        if (!mask[i]) continue;
        ++selected;
        const double p = inst.p.at(a.score);
        double delta;
        if (m == 1) {
            const bool ok = rng.bernoulli(p);
            delta = ok ? e.c_plus : e.c_minus;
            utility += ok ? e.u_plus : e.u_minus;
            if (!ok) a.ever_failed = true;
        } else {
            const int wins = binomial(m, p, rng);
            const double frac = static_cast<double>(wins) / m;
            delta = frac * e.c_plus + (1.0 - frac) * e.c_minus;
            utility += frac * e.u_plus + (1.0 - frac) * e.u_minus;
            if (wins < m) a.ever_failed = true;
        }
        min_delta = min_delta ? std::min(*min_delta, delta) : delta;
        a.score = std::clamp(a.score + delta, 0.0, static_cast<double>(inst.grid.x_max));
    }
    StepMetrics out = measure(pop, inst);
    out.step_utility = utility / static_cast<double>(pop.agents.size());
    out.cum_utility = out.step_utility;
    out.selected_count = selected;
    out.min_delta_selected = min_delta;
    return out;
}

StepMetrics measure(const Population& pop, const Instance& inst) {
    double sum[2] = {0.0, 0.0};
    long top[2] = {0, 0};
    for (const auto& a : pop.agents) {
        const auto g = static_cast<std::size_t>(a.group);
        sum[g] += a.score;
        if (a.score >= inst.grid.x_max - kAtTop) ++top[g];
    }
    StepMetrics m;
    const double na = pop.n_a, nb = pop.n_b;
    m.mean_a = pop.n_a ? sum[0] / na : 0.0;
    m.mean_b = pop.n_b ? sum[1] / nb : 0.0;
    m.gap = std::abs(m.mean_a - m.mean_b);
    m.frac_xmax_a = pop.n_a ? top[0] / na : 0.0;
    m.frac_xmax_b = pop.n_b ? top[1] / nb : 0.0;
    return m;
}

Trajectory run(const SimConfig& config, const Instance& inst) {
    config.validate();
    Trajectory traj;
    traj.horizon = config.horizon;
    traj.policy = config.policy;
    traj.n_agents = config.n_agents;
    traj.runs.resize(config.seeds.size());

    unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads) : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(config.seeds.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    const auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < config.seeds.size();) {
            if (failed) return;
            try {
                traj.runs[i] = run_seed(config, inst, config.seeds[i]);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<const StepMetrics*> rows;
    for (const auto& r : traj.runs) rows.push_back(&r.initial);
    traj.initial_mean = combine(rows, false);
    for (int t = 0; t < config.horizon; ++t) {
        rows.clear();
        for (const auto& r : traj.runs) rows.push_back(&r.steps[static_cast<std::size_t>(t)]);
        traj.mean.push_back(combine(rows, false));
        traj.sd.push_back(combine(rows, true));
    }
    return traj;
}

std::optional<double> empirical_pof(const Trajectory& fair, const Trajectory& myopic) {
    if (fair.horizon != myopic.horizon) throw std::domain_error("trajectories have different horizons");
    if (fair.mean.empty()) return std::nullopt;
    const double den = myopic.mean.back().cum_utility;
    if (!(den > 0.0)) return std::nullopt;
    return std::clamp(1.0 - fair.mean.back().cum_utility / den, 0.0, 1.0);
}

CascadeReport cascade_diagnostics(const Trajectory& traj, const Instance& inst) {
    CascadeReport rep;
    rep.p_fail = assumptions_report(inst).p_fail;
    if (traj.runs.empty()) return rep;
    for (const auto& r : traj.runs)
        if (r.cascade.size() != static_cast<std::size_t>(traj.horizon))
            throw std::invalid_argument("trajectory was recorded without cascade tracing");

    const double k = static_cast<double>(traj.runs.size());
    const double spread = inst.econ.c_plus - inst.econ.c_minus;
    for (int t = 0; t < traj.horizon; ++t) {
        CascadeStep s;
        s.t = t + 1;
        s.never_failed_frac = 0.0;
        bool have_dev = true;
        double dev = 0.0;
        for (const auto& r : traj.runs) {
            const auto& c = r.cascade[static_cast<std::size_t>(t)];
            s.never_failed_frac += c.never_failed_frac / k;
            s.xmax_frac += c.xmax_frac / k;
            if (c.max_deviation)
                dev = std::max(dev, *c.max_deviation);
            else
                have_dev = false;
        }
        if (have_dev) {
            s.max_deviation = dev;
            const double tn = static_cast<double>(s.t) * traj.n_agents;
            const double lg = std::log(std::max(tn, 2.0));
            if (dev > spread * std::sqrt(static_cast<double>(s.t)) * lg * lg) rep.deviation_warning = true;
        }
        rep.steps.push_back(s);
    }
    rep.final_xmax_frac = rep.steps.empty() ? 0.0 : rep.steps.back().xmax_frac;
    rep.xmax_violation = rep.final_xmax_frac < 1.0 - 10.0 * rep.p_fail;
    return rep;
}

std::vector<double> expected_investment_path(const Instance& inst, int x0, int horizon) {
    if (!integer_moves(inst)) throw std::invalid_argument("expected path needs integer score moves");
    if (x0 < 0 || x0 > inst.grid.x_max) throw std::domain_error("start score outside the grid");
    const int x_max = inst.grid.x_max;
    const auto n = static_cast<std::size_t>(inst.grid.size());
    const auto cats = category_table(inst);
    const int up = static_cast<int>(inst.econ.c_plus);
    const int down = static_cast<int>(inst.econ.c_minus);

    std::vector<double> alive(n, 0.0), dead(n, 0.0), next(n);
    alive[static_cast<std::size_t>(x0)] = 1.0;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon) + 1);
    const auto expect = [&] {
        double e = 0.0;
        for (std::size_t x = 0; x < n; ++x) e += static_cast<double>(x) * (alive[x] + dead[x]);
        return e;
    };
    out.push_back(expect());
    for (int t = 1; t <= horizon; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t x = 0; x < n; ++x) {
            if (alive[x] == 0.0) continue;
            if (!investable(cats[x])) {
                next[x] += alive[x];
                continue;
            }
            const double p = inst.p.at(static_cast<int>(x));
            const auto hi = static_cast<std::size_t>(std::clamp(static_cast<int>(x) + up, 0, x_max));
            const auto lo = static_cast<std::size_t>(std::clamp(static_cast<int>(x) + down, 0, x_max));
            next[hi] += p * alive[x];
            dead[lo] += (1.0 - p) * alive[x];
        }
        alive.swap(next);
        out.push_back(expect());
    }
    return out;
}

}  // namespace fairsel
