#include "fairsel/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fairsel {

SuccessProb SuccessProb::linear(int x_max) {
    if (x_max < 1) throw std::invalid_argument("x_max must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(x_max) + 1);
    for (int x = 0; x <= x_max; ++x) v[static_cast<std::size_t>(x)] = static_cast<double>(x) / x_max;
    return SuccessProb(Kind::Linear, std::move(v));
}

SuccessProb SuccessProb::table(std::vector<double> values) {
    if (values.size() < 2) throw std::invalid_argument("success table needs at least two grid points");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0 && values[i] <= 1.0))
            throw std::invalid_argument("success probability at score " + std::to_string(i) +
                                        " outside [0,1]");
    }
    return SuccessProb(Kind::Table, std::move(values));
}

double SuccessProb::at(double x) const {
    const int top = x_max();
    if (x <= 0.0) return values_.front();
    if (x >= top) return values_.back();
    const double fl = std::floor(x);
    const auto lo = static_cast<std::size_t>(fl);
    const double frac = x - fl;
    if (frac == 0.0) return values_[lo];
    return values_[lo] + frac * (values_[lo + 1] - values_[lo]);
}

bool SuccessProb::monotone() const {
    return std::is_sorted(values_.begin(), values_.end());
}

void Economics::validate() const {
    if (!std::isfinite(u_plus) || !std::isfinite(u_minus) || !std::isfinite(c_plus) ||
        !std::isfinite(c_minus))
        throw std::invalid_argument("economics must be finite");
    if (u_plus < 0.0) throw std::invalid_argument("u_plus must be >= 0");
    if (u_minus > 0.0) throw std::invalid_argument("u_minus must be <= 0");
    if (u_plus - u_minus <= 0.0) throw std::invalid_argument("u_plus - u_minus must be > 0");
    if (c_plus < 0.0) throw std::invalid_argument("c_plus must be >= 0");
    if (c_minus >= 0.0) throw std::invalid_argument("c_minus must be < 0");
}

double GroupDistribution::mean() const {
    double m = 0.0;
    for (std::size_t x = 0; x < pmf.size(); ++x) m += static_cast<double>(x) * pmf[x];
    return m;
}

void GroupDistribution::validate(int grid_size) const {
    if (static_cast<int>(pmf.size()) != grid_size)
        throw std::invalid_argument("distribution has " + std::to_string(pmf.size()) +
                                    " entries, grid has " + std::to_string(grid_size));
    double total = 0.0;
    for (std::size_t x = 0; x < pmf.size(); ++x) {
        if (!(pmf[x] >= 0.0) || !std::isfinite(pmf[x]))
            throw std::invalid_argument("negative or non-finite pmf entry at score " + std::to_string(x));
        total += pmf[x];
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("pmf sums to " + std::to_string(total) + ", expected 1");
}

void Instance::validate() const {
    if (grid.x_max < 1) throw std::invalid_argument("x_max must be >= 1");
    if (p.x_max() != grid.x_max) throw std::invalid_argument("success table does not match the grid");
    econ.validate();
    dist_a.validate(grid.size());
    dist_b.validate(grid.size());
    if (w_a < 0.0 || w_b < 0.0) throw std::invalid_argument("group weights must be >= 0");
    if (std::abs(w_a + w_b - 1.0) > 1e-12) throw std::invalid_argument("group weights must sum to 1");
}

Policy Policy::zeros(int grid_size) { return constant(grid_size, 0.0); }

Policy Policy::constant(int grid_size, double value) {
    const auto n = static_cast<std::size_t>(grid_size);
    return {std::vector<double>(n, value), std::vector<double>(n, value)};
}

std::vector<double> GroupThreshold::expand(int grid_size) const {
    std::vector<double> pi(static_cast<std::size_t>(grid_size), 0.0);
    for (int x = std::max(cutoff, 0); x < grid_size; ++x)
        pi[static_cast<std::size_t>(x)] = x == cutoff ? omega : 1.0;
    return pi;
}

const char* to_string(Category c) {
    switch (c) {
        case Category::C1: return "C1";
        case Category::C2: return "C2";
        case Category::C3: return "C3";
        case Category::C4: return "C4";
    }
    return "?";
}

namespace {

void check_score(double x, const Instance& inst) {
    if (!std::isfinite(x) || !inst.grid.contains(x))
        throw std::domain_error("score " + std::to_string(x) + " outside [0, " +
                                std::to_string(inst.grid.x_max) + "]");
}

}  // namespace

double expected_utility(double x, const Instance& inst) {
    check_score(x, inst);
    const double p = inst.p.at(x);
    return p * inst.econ.u_plus + (1.0 - p) * inst.econ.u_minus;
}

double expected_delta(double x, const Instance& inst) {
    check_score(x, inst);
    const double p = inst.p.at(x);
    return p * inst.econ.c_plus + (1.0 - p) * inst.econ.c_minus;
}

Category classify(double eu, double ed) {
    const bool profitable = eu >= -kTieTolerance;
    const bool improving = ed >= -kTieTolerance;
    if (profitable) return improving ? Category::C1 : Category::C2;
    return improving ? Category::C3 : Category::C4;
}

Category categorize(double x, const Instance& inst) {
    return classify(expected_utility(x, inst), expected_delta(x, inst));
}

std::vector<double> utility_table(const Instance& inst) {
    std::vector<double> t(static_cast<std::size_t>(inst.grid.size()));
    for (int x = 0; x <= inst.grid.x_max; ++x) t[static_cast<std::size_t>(x)] = expected_utility(x, inst);
    return t;
}

std::vector<double> delta_table(const Instance& inst) {
    std::vector<double> t(static_cast<std::size_t>(inst.grid.size()));
    for (int x = 0; x <= inst.grid.x_max; ++x) t[static_cast<std::size_t>(x)] = expected_delta(x, inst);
    return t;
}

std::vector<Category> category_table(const Instance& inst) {
    std::vector<Category> t(static_cast<std::size_t>(inst.grid.size()));
    for (int x = 0; x <= inst.grid.x_max; ++x) t[static_cast<std::size_t>(x)] = categorize(x, inst);
    return t;
}

double policy_value(const Policy& policy, const Instance& inst) {
    const auto eu = utility_table(inst);
    double total = 0.0;
    for (Group g : {Group::A, Group::B}) {
        const auto& pi = policy.of(g);
        const auto& d = inst.dist(g).pmf;
        double s = 0.0;
        for (std::size_t x = 0; x < eu.size(); ++x) s += pi[x] * d[x] * eu[x];
        total += inst.weight(g) * s;
    }
    return total;
}

PostMeans post_means(const Policy& policy, const Instance& inst) {
    const auto ed = delta_table(inst);
    PostMeans out;
    double means[2];
    for (Group g : {Group::A, Group::B}) {
        const auto& pi = policy.of(g);
        const auto& d = inst.dist(g).pmf;
        double m = inst.dist(g).mean();
        for (std::size_t x = 0; x < ed.size(); ++x) m += pi[x] * d[x] * ed[x];
        means[static_cast<int>(g)] = m;
    }
    out.mu_a_prime = means[0];
    out.mu_b_prime = means[1];
    out.gap = std::abs(means[0] - means[1]);
    return out;
}

bool is_alpha_fair(const Policy& policy, const Instance& inst, double alpha) {
    if (!(alpha >= 0.0)) throw std::domain_error("alpha must be >= 0");
    return post_means(policy, inst).gap <= alpha + kTieTolerance;
}

AssumptionsReport assumptions_report(const Instance& inst, std::optional<double> beta_hint,
                                     std::optional<double> stability_n) {
    AssumptionsReport r;
    r.a1_monotone_p = inst.p.monotone();
    r.profit_threshold = inst.econ.profit_threshold();
    r.maintenance_threshold = inst.econ.maintenance_threshold();
    r.a2_threshold_order = r.profit_threshold >= r.maintenance_threshold - kTieTolerance;

    const auto cats = category_table(inst);
    const auto ed = delta_table(inst);
    const int n = inst.grid.size();

    for (Group g : {Group::A, Group::B}) {
        const auto& d = inst.dist(g).pmf;
        auto& row = r.stats[static_cast<std::size_t>(g)];
        for (int x = 0; x < n; ++x) {
            auto& s = row[static_cast<std::size_t>(cats[static_cast<std::size_t>(x)]) - 1];
            s.gamma += x * d[static_cast<std::size_t>(x)];
            s.mass += d[static_cast<std::size_t>(x)];
        }
        for (auto& s : row) {
            s.empty = !(s.mass > 0.0);
            s.mu = s.empty ? 0.0 : s.gamma / s.mass;
        }
    }
    const auto invest_gamma = [&](Group g) {
        return r.stat(g, Category::C1).gamma + r.stat(g, Category::C3).gamma;
    };
    r.beta = invest_gamma(Group::A) - invest_gamma(Group::B);

    bool integer_drift = true;
    for (int x = 0; x < n; ++x) {
        const auto c = cats[static_cast<std::size_t>(x)];
        if (c != Category::C1 && c != Category::C3) continue;
        r.p_fail = std::max(r.p_fail, 1.0 - inst.p.at(x));
        const double drift = ed[static_cast<std::size_t>(x)];
        if (!(drift >= 1.0 - 1e-9 && std::abs(drift - std::round(drift)) <= 1e-9)) integer_drift = false;
    }
    r.a7_integer_drift = integer_drift;

    r.stability_n = stability_n;
    if (stability_n) {
        const double beta = beta_hint.value_or(r.beta);
        r.a5_holds = beta > 0.0 && r.p_fail <= beta / (*stability_n * inst.grid.x_max) + kTieTolerance;
    }

    r.a6_pmax_one = inst.p.at(inst.grid.x_max) == 1.0;
    bool decay = inst.econ.c_plus > 0.0;
    for (int x = 0; decay && x < n; ++x) {
        const double next = std::min<double>(x + inst.econ.c_plus, inst.grid.x_max);
        const double lhs = 1.0 - inst.p.at(next);
        const double rhs = (1.0 - inst.p.at(x)) / 3.0;
        if (lhs > rhs * (1.0 + 1e-12) + kTieTolerance) decay = false;
    }
    r.a6_geometric_decay = decay;
    return r;
}

}  // namespace fairsel
