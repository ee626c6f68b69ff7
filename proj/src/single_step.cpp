#include "fairsel/single_step.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fairsel/lp.hpp"

namespace fairsel {

namespace {

constexpr double kGapTol = 1e-9;
constexpr double kValueTol = 1e-12;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void require_alpha(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::domain_error("alpha must be finite and >= 0");
}

// One candidate threshold for one group: its weighted utility and unweighted
// mean shift.
struct Candidate {
    double drift = 0.0;
    double value = 0.0;
    GroupThreshold threshold;
};

std::vector<Candidate> group_candidates(const Instance& inst, Group g, const std::vector<double>& eu,
                                        const std::vector<double>& ed, const std::vector<double>& omegas,
                                        const VariableMask& mask) {
    const int n = inst.grid.size();
    const auto& d = inst.dist(g).pmf;
    const double w = inst.weight(g);
    std::vector<double> du(static_cast<std::size_t>(n)), dd(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x) {
        const auto i = static_cast<std::size_t>(x);
        const bool off = mask.pinned(g, x);
        du[i] = off ? 0.0 : d[i] * eu[i];
        dd[i] = off ? 0.0 : d[i] * ed[i];
    }
    // suffix sums over scores strictly above the cutoff
    std::vector<double> su(static_cast<std::size_t>(n) + 1, 0.0), sd(static_cast<std::size_t>(n) + 1, 0.0);
    for (int x = n - 1; x >= 0; --x) {
        const auto i = static_cast<std::size_t>(x);
        su[i] = su[i + 1] + du[i];
        sd[i] = sd[i + 1] + dd[i];
    }
    std::vector<Candidate> out;
    out.reserve(static_cast<std::size_t>(n) * omegas.size() + 1);
    out.push_back({0.0, 0.0, {n, 0.0}});
    for (int c = 0; c < n; ++c) {
        const auto i = static_cast<std::size_t>(c);
        for (double om : omegas)
            out.push_back({om * dd[i] + sd[i + 1], w * (om * du[i] + su[i + 1]), {c, om}});
    }
    return out;
}

// Range arg-max over values sorted by drift; ties go to the smaller position.
class RangeArgMax {
public:
    explicit RangeArgMax(const std::vector<double>& v) : v_(v) {
        const std::size_t n = v.size();
        levels_.push_back(std::vector<std::size_t>(n));
        std::iota(levels_[0].begin(), levels_[0].end(), std::size_t{0});
        for (std::size_t len = 2; len <= n; len *= 2) {
            const auto& prev = levels_.back();
            std::vector<std::size_t> cur(n - len + 1);
            for (std::size_t i = 0; i + len <= n; ++i) cur[i] = pick(prev[i], prev[i + len / 2]);
            levels_.push_back(std::move(cur));
        }
    }

    // inclusive [lo, hi]
    std::size_t query(std::size_t lo, std::size_t hi) const {
        const std::size_t len = hi - lo + 1;
        std::size_t lvl = 0;
        while ((std::size_t{2} << lvl) <= len) ++lvl;
        return pick(levels_[lvl][lo], levels_[lvl][hi + 1 - (std::size_t{1} << lvl)]);
    }

private:
    std::size_t pick(std::size_t a, std::size_t b) const {
        if (v_[a] > v_[b]) return a;
        if (v_[b] > v_[a]) return b;
        return std::min(a, b);
    }

    const std::vector<double>& v_;
    std::vector<std::vector<std::size_t>> levels_;
};

FairSolution finish(const Instance& inst, Policy policy, FairMethod method) {
    FairSolution s;
    s.value = policy_value(policy, inst);
    const auto pm = post_means(policy, inst);
    s.mu_a_prime = pm.mu_a_prime;
    s.mu_b_prime = pm.mu_b_prime;
    s.gap = pm.gap;
    s.policy = std::move(policy);
    s.feasible = true;
    s.method = method;
    return s;
}

FairSolution infeasible(const Instance& inst, FairMethod method) {
    FairSolution s;
    s.policy = Policy::zeros(inst.grid.size());
    s.feasible = false;
    s.method = method;
    return s;
}

}  // namespace

bool VariableMask::empty() const {
    return std::none_of(pinned_a.begin(), pinned_a.end(), [](bool b) { return b; }) &&
           std::none_of(pinned_b.begin(), pinned_b.end(), [](bool b) { return b; });
}

std::vector<int> VariableMask::pinned_scores(Group g) const {
    const auto& v = g == Group::A ? pinned_a : pinned_b;
    std::vector<int> out;
    for (std::size_t x = 0; x < v.size(); ++x)
        if (v[x]) out.push_back(static_cast<int>(x));
    return out;
}

const char* to_string(FairMethod m) { return m == FairMethod::Lp ? "lp" : "threshold"; }

OptimalPolicy optimal_policy(const Instance& inst) {
    const auto eu = utility_table(inst);
    int cutoff = inst.grid.size();
    for (int x = 0; x < inst.grid.size(); ++x) {
        if (eu[static_cast<std::size_t>(x)] >= -kTieTolerance) {
            cutoff = x;
            break;
        }
    }
    OptimalPolicy out;
    out.policy.a = {cutoff, 1.0};
    out.policy.b = {cutoff, 1.0};
    out.value = policy_value(out.policy.expand(inst.grid.size()), inst);
    return out;
}

VariableMask restrict_non_degrading(const Instance& inst) {
    const auto cats = category_table(inst);
    VariableMask m;
    m.pinned_a.assign(cats.size(), false);
    m.pinned_b.assign(cats.size(), false);
    for (std::size_t x = 0; x < cats.size(); ++x)
        m.pinned_a[x] = m.pinned_b[x] = cats[x] == Category::C4;
    return m;
}

FairSolution fair_opt_lp(const Instance& inst, double alpha, const VariableMask& mask) {
    require_alpha(alpha);
    const auto eu = utility_table(inst);
    const auto ed = delta_table(inst);
    const auto n = static_cast<std::size_t>(inst.grid.size());
    const double gap0 = inst.dist_a.mean() - inst.dist_b.mean();

    // the unconstrained optimum, when already fair, is returned as is
    Policy best = Policy::zeros(inst.grid.size());
    double best_drift = gap0;
    for (std::size_t x = 0; x < n; ++x) {
        if (eu[x] < -kTieTolerance) continue;
        if (!mask.pinned(Group::A, static_cast<int>(x))) {
            best.pi_a[x] = 1.0;
            best_drift += inst.dist_a.pmf[x] * ed[x];
        }
        if (!mask.pinned(Group::B, static_cast<int>(x))) {
            best.pi_b[x] = 1.0;
            best_drift -= inst.dist_b.pmf[x] * ed[x];
        }
    }
    if (std::abs(best_drift) <= alpha + lp::kFeasibilityTol) return finish(inst, std::move(best), FairMethod::Lp);

    lp::LpProblem prob;
    prob.objective.assign(2 * n, 0.0);
    prob.upper.assign(2 * n, 1.0);
    std::vector<double> drift_row(2 * n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        prob.objective[x] = inst.w_a * inst.dist_a.pmf[x] * eu[x];
        prob.objective[n + x] = inst.w_b * inst.dist_b.pmf[x] * eu[x];
        drift_row[x] = inst.dist_a.pmf[x] * ed[x];
        drift_row[n + x] = -inst.dist_b.pmf[x] * ed[x];
        if (mask.pinned(Group::A, static_cast<int>(x))) prob.upper[x] = 0.0;
        if (mask.pinned(Group::B, static_cast<int>(x))) prob.upper[n + x] = 0.0;
    }
    std::vector<double> neg_drift(drift_row), neg_value(prob.objective);
    for (double& v : neg_drift) v = -v;
    for (double& v : neg_value) v = -v;
    prob.rows = {drift_row, neg_drift, neg_value};
    prob.rhs = {alpha - gap0, alpha + gap0, 0.0};

    const auto sol = lp::solve(prob);
    if (!sol.optimal()) return infeasible(inst, FairMethod::Lp);

    Policy pol = Policy::zeros(static_cast<int>(n));
    for (std::size_t x = 0; x < n; ++x) {
        pol.pi_a[x] = clamp01(sol.values[x]);
        pol.pi_b[x] = clamp01(sol.values[n + x]);
    }
    return finish(inst, std::move(pol), FairMethod::Lp);
}

std::vector<double> omega_grid(int size) {
    if (size < 1) throw std::domain_error("omega grid size must be >= 1");
    if (size == 1) return {1.0};
    std::vector<double> out(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(i) / (size - 1);
    return out;
}

FairSolution fair_opt_threshold(const Instance& inst, double alpha, int omega_grid_size,
                                const VariableMask& mask) {
    require_alpha(alpha);
    const auto omegas = omega_grid(omega_grid_size);
    const auto eu = utility_table(inst);
    const auto ed = delta_table(inst);
    const double gap0 = inst.dist_a.mean() - inst.dist_b.mean();

    const auto ca = group_candidates(inst, Group::A, eu, ed, omegas, mask);
    auto cb = group_candidates(inst, Group::B, eu, ed, omegas, mask);
    std::stable_sort(cb.begin(), cb.end(),
                     [](const Candidate& l, const Candidate& r) { return l.drift < r.drift; });
    std::vector<double> drifts(cb.size()), values(cb.size());
    for (std::size_t i = 0; i < cb.size(); ++i) {
        drifts[i] = cb[i].drift;
        values[i] = cb[i].value;
    }
    const RangeArgMax best_b(values);

    bool found = false;
    double best = 0.0;
    ThresholdPolicy choice;
    for (const auto& a : ca) {
        // |gap0 + d_A - d_B| <= alpha  <=>  d_B in [gap0 + d_A - alpha, gap0 + d_A + alpha]
        const double lo = gap0 + a.drift - alpha - kGapTol;
        const double hi = gap0 + a.drift + alpha + kGapTol;
        const auto first = std::lower_bound(drifts.begin(), drifts.end(), lo);
        const auto last = std::upper_bound(drifts.begin(), drifts.end(), hi);
        if (first >= last) continue;
        const auto j = best_b.query(static_cast<std::size_t>(first - drifts.begin()),
                                    static_cast<std::size_t>(last - drifts.begin()) - 1);
        const double total = a.value + values[j];
        if (total < -kValueTol) continue;
        if (!found || total > best) {
            found = true;
            best = total;
            choice = {a.threshold, cb[j].threshold};
        }
    }
    if (!found) return infeasible(inst, FairMethod::Threshold);

    Policy pol = choice.expand(inst.grid.size());
    for (int x = 0; x < inst.grid.size(); ++x) {
        if (mask.pinned(Group::A, x)) pol.pi_a[static_cast<std::size_t>(x)] = 0.0;
        if (mask.pinned(Group::B, x)) pol.pi_b[static_cast<std::size_t>(x)] = 0.0;
    }
    auto s = finish(inst, std::move(pol), FairMethod::Threshold);
    s.thresholds = choice;
    return s;
}

PofReport price_of_fairness(const Instance& inst, double alpha, const PofOptions& options) {
    require_alpha(alpha);
    PofReport r;
    r.alpha = alpha;
    r.opt_value = optimal_policy(inst).value;
    const VariableMask mask = options.non_degrading ? restrict_non_degrading(inst) : VariableMask{};
    const FairSolution s = options.method == FairMethod::Lp
                               ? fair_opt_lp(inst, alpha, mask)
                               : fair_opt_threshold(inst, alpha, options.omega_grid_size, mask);
    r.feasible = s.feasible;
    if (s.feasible) {
        r.fair_value = s.value;
        if (r.opt_value > 0.0) r.pof = clamp01(1.0 - s.value / r.opt_value);
    }
    return r;
}

PosReport price_of_simplicity(const Instance& inst, double alpha, int omega_grid_size, bool non_degrading) {
    require_alpha(alpha);
    PosReport r;
    r.alpha = alpha;
    r.omega_grid_size = omega_grid_size;
    const VariableMask mask = non_degrading ? restrict_non_degrading(inst) : VariableMask{};
    const auto lp_sol = fair_opt_lp(inst, alpha, mask);
    const auto th_sol = fair_opt_threshold(inst, alpha, omega_grid_size, mask);
    if (lp_sol.feasible) r.lp_value = lp_sol.value;
    if (th_sol.feasible) r.threshold_value = th_sol.value;
    r.feasible = lp_sol.feasible && th_sol.feasible;
    if (r.feasible && lp_sol.value > 0.0) r.pos = clamp01(1.0 - th_sol.value / lp_sol.value);
    return r;
}

namespace {

int construction_grid(double epsilon) {
    if (epsilon >= 0.01) return 100;
    const double need = std::ceil(1.0 / epsilon);
    if (need > 100000) throw std::domain_error("epsilon too small for the score grid");
    return static_cast<int>(need);
}

Instance construction_base(int x_max, double scale) {
    Instance inst;
    inst.grid.x_max = x_max;
    inst.econ = {1.0, -1.1, scale, -scale};
    inst.w_a = inst.w_b = 0.5;
    inst.dist_a.pmf.assign(static_cast<std::size_t>(x_max) + 1, 0.0);
    inst.dist_b.pmf.assign(static_cast<std::size_t>(x_max) + 1, 0.0);
    return inst;
}

}  // namespace

Instance build_lb_general(double alpha, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < alpha && alpha < 1.0))
        throw std::domain_error("build_lb_general requires 0 < epsilon < alpha < 1");
    const int x_max = construction_grid(epsilon);
    const int units = std::max(1, static_cast<int>(std::lround(epsilon * x_max)));
    const int top = x_max;
    const int low = x_max - units;

    Instance inst = construction_base(x_max, x_max);
    const double tau = inst.econ.profit_threshold();
    std::vector<double> p(static_cast<std::size_t>(x_max) + 1);
    for (int x = 0; x <= x_max; ++x) {
        double v;
        if (x <= low)
            v = low == 0 ? tau : tau * x / low;
        else
            v = tau + (1.0 - tau) * (x - low) / static_cast<double>(top - low);
        p[static_cast<std::size_t>(x)] = x == low ? tau : (x == top ? 1.0 : v);
    }
    inst.p = SuccessProb::table(std::move(p));
    inst.dist_a.pmf[static_cast<std::size_t>(top)] = 1.0;
    inst.dist_b.pmf[static_cast<std::size_t>(low)] = 1.0;
    inst.meta.scale = x_max;
    inst.meta.epsilon = static_cast<double>(units) / x_max;
    inst.meta.provenance = "lb-general";
    return inst;
}

Instance build_lb_tv(double alpha, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 0.5)) throw std::domain_error("build_lb_tv requires 0 < epsilon <= 1/2");
    if (!(alpha >= 0.0)) throw std::domain_error("build_lb_tv requires alpha >= 0");
    const int x_max = 100;
    // The epsilon-mass points drive the post-selection means, so the score
    // moves are scaled by 1/epsilon to keep one unit of selection worth one
    // unit of the continuous score axis.
    Instance inst = construction_base(x_max, x_max / epsilon);
    std::vector<double> p(static_cast<std::size_t>(x_max) + 1, 0.5);
    p.front() = 0.0;
    p.back() = 1.0;
    inst.p = SuccessProb::table(std::move(p));
    const auto top = static_cast<std::size_t>(x_max);
    const auto mid = static_cast<std::size_t>(x_max - 1);
    inst.dist_a.pmf[top] = epsilon;
    inst.dist_a.pmf[0] = 1.0 - epsilon;
    inst.dist_b.pmf[mid] = epsilon;
    inst.dist_b.pmf[0] = 1.0 - epsilon;
    inst.meta.scale = x_max;
    inst.meta.epsilon = epsilon;
    inst.meta.provenance = "lb-tv";
    return inst;
}

double total_variation(const GroupDistribution& a, const GroupDistribution& b) {
    if (a.pmf.size() != b.pmf.size()) throw std::invalid_argument("distributions on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < a.pmf.size(); ++i) s += std::abs(a.pmf[i] - b.pmf[i]);
    return 0.5 * s;
}

SufficiencyReport sufficient_condition_check(const Instance& inst, double alpha, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::domain_error("epsilon must lie in (0, 1/2)");
    require_alpha(alpha);
    const auto eu = utility_table(inst);
    const auto ed = delta_table(inst);
    const auto cats = category_table(inst);
    const auto& da = inst.dist_a.pmf;
    const auto& db = inst.dist_b.pmf;

    double util_a = 0.0, util_b = 0.0, drift_b = 0.0;
    for (std::size_t x = 0; x < cats.size(); ++x) {
        if (cats[x] != Category::C1) continue;
        util_a += da[x] * eu[x];
        util_b += db[x] * eu[x];
        drift_b += db[x] * ed[x];
    }
    const double target = inst.dist_a.mean() - inst.dist_b.mean() - alpha;

    SufficiencyReport r;
    r.epsilon = epsilon;
    r.alpha = alpha;
    r.condition1 = util_b >= epsilon * util_a;
    r.condition2a = drift_b >= target;

    // Greedy C3 subset in group B: best drift per unit of utility lost first.
    struct Item {
        int x;
        double ratio;
    };
    std::vector<Item> items;
    for (std::size_t x = 0; x < cats.size(); ++x) {
        if (cats[x] != Category::C3 || !(db[x] > 0.0)) continue;
        const double loss = std::abs(eu[x]);
        const double ratio = loss <= kTieTolerance ? std::numeric_limits<double>::infinity() : ed[x] / loss;
        items.push_back({static_cast<int>(x), ratio});
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& l, const Item& r) { return l.ratio > r.ratio; });
    const double budget = epsilon * util_b;
    double spent = 0.0, drift = drift_b;
    bool met = drift >= target;
    for (const auto& it : items) {
        if (met) break;
        const auto i = static_cast<std::size_t>(it.x);
        const double cost = db[i] * std::abs(eu[i]);
        if (spent + cost > budget) break;
        spent += cost;
        drift += db[i] * ed[i];
        r.chosen_c3_subset.insert(it.x);
        met = drift >= target;
    }
    r.condition2b = met;
    if (r.condition1 && (r.condition2a || r.condition2b)) r.implied_pof_bound = 1.0 - epsilon / 4.0;
    return r;
}

}  // namespace fairsel
