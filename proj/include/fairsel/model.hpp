#pragma once

// Instance and policy data model for the two-group selection problem, plus
// the closed-form primitives every solver and simulator builds on.

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace fairsel {

inline constexpr double kTieTolerance = 1e-12;

enum class Group { A = 0, B = 1 };

/// Integer score grid 0..x_max.
struct ScoreGrid {
    int x_max = 1;

    int size() const { return x_max + 1; }
    bool contains(double x) const { return x >= -kTieTolerance && x <= x_max + kTieTolerance; }
};

/// Group-agnostic success probability. Grid points are exact table lookups;
/// real-valued scores interpolate linearly between neighbouring grid points.
class SuccessProb {
public:
    enum class Kind { Linear, Table };

    static SuccessProb linear(int x_max);
    static SuccessProb table(std::vector<double> values);

    Kind kind() const { return kind_; }
    const std::vector<double>& values() const { return values_; }
    int x_max() const { return static_cast<int>(values_.size()) - 1; }

    double at(int x) const { return values_[static_cast<std::size_t>(x)]; }
    double at(double x) const;

    bool monotone() const;

    friend bool operator==(const SuccessProb&, const SuccessProb&) = default;

private:
    SuccessProb(Kind kind, std::vector<double> values) : kind_(kind), values_(std::move(values)) {}

    Kind kind_ = Kind::Linear;
    std::vector<double> values_;
};

/// Decision-maker payoffs (u_plus / u_minus) and individual score moves
/// (c_plus / c_minus) on success and failure.
struct Economics {
    double u_plus = 0.0;
    double u_minus = -1.0;
    double c_plus = 0.0;
    double c_minus = -1.0;

    /// Smallest success probability with non-negative expected utility.
    double profit_threshold() const { return -u_minus / (u_plus - u_minus); }
    /// Smallest success probability with non-negative expected score change.
    double maintenance_threshold() const { return -c_minus / (c_plus - c_minus); }

    void validate() const;

    friend bool operator==(const Economics&, const Economics&) = default;
};

struct GroupDistribution {
    std::vector<double> pmf;

    double mean() const;
    void validate(int grid_size) const;

    friend bool operator==(const GroupDistribution&, const GroupDistribution&) = default;
};

struct InstanceMetadata {
    std::optional<double> scale;    // grid units per unit of a continuous [0,1] score axis
    std::optional<double> epsilon;  // construction parameter after grid rounding
    std::string provenance;

    friend bool operator==(const InstanceMetadata&, const InstanceMetadata&) = default;
};

struct Instance {
    ScoreGrid grid;
    SuccessProb p = SuccessProb::linear(1);
    Economics econ;
    GroupDistribution dist_a;
    GroupDistribution dist_b;
    double w_a = 0.5;
    double w_b = 0.5;
    InstanceMetadata meta;

    const GroupDistribution& dist(Group g) const { return g == Group::A ? dist_a : dist_b; }
    double weight(Group g) const { return g == Group::A ? w_a : w_b; }

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;

    friend bool operator==(const Instance& a, const Instance& b) {
        return a.grid.x_max == b.grid.x_max && a.p == b.p && a.econ == b.econ &&
               a.dist_a == b.dist_a && a.dist_b == b.dist_b && a.w_a == b.w_a && a.w_b == b.w_b &&
               a.meta == b.meta;
    }
};

/// Per-group selection probabilities over the grid.
struct Policy {
    std::vector<double> pi_a;
    std::vector<double> pi_b;

    static Policy zeros(int grid_size);
    static Policy constant(int grid_size, double value);

    std::vector<double>& of(Group g) { return g == Group::A ? pi_a : pi_b; }
    const std::vector<double>& of(Group g) const { return g == Group::A ? pi_a : pi_b; }
};

/// Select everything above `cutoff`, a fraction `omega` at it, nothing below.
/// cutoff == x_max + 1 denotes the empty selection.
struct GroupThreshold {
    int cutoff = 0;
    double omega = 1.0;

    std::vector<double> expand(int grid_size) const;
};

struct ThresholdPolicy {
    GroupThreshold a;
    GroupThreshold b;

    Policy expand(int grid_size) const { return {a.expand(grid_size), b.expand(grid_size)}; }
};

enum class Category { C1 = 1, C2 = 2, C3 = 3, C4 = 4 };

const char* to_string(Category c);

double expected_utility(double x, const Instance& inst);
double expected_delta(double x, const Instance& inst);
Category categorize(double x, const Instance& inst);

/// Sign-based classification shared by categorize and the cached tables.
Category classify(double eu, double ed);

/// E[u(x)] and E[delta(x)] at every grid score.
std::vector<double> utility_table(const Instance& inst);
std::vector<double> delta_table(const Instance& inst);
std::vector<Category> category_table(const Instance& inst);

double policy_value(const Policy& policy, const Instance& inst);

struct PostMeans {
    double mu_a_prime = 0.0;
    double mu_b_prime = 0.0;
    double gap = 0.0;
};

PostMeans post_means(const Policy& policy, const Instance& inst);

bool is_alpha_fair(const Policy& policy, const Instance& inst, double alpha);

struct CategoryStats {
    double gamma = 0.0;  // score mass: sum over the category of x * D_g(x)
    double mass = 0.0;   // sum over the category of D_g(x)
    double mu = 0.0;     // gamma / mass, 0 when the category is empty
    bool empty = true;
};

struct AssumptionsReport {
    bool a1_monotone_p = false;
    bool a2_threshold_order = false;
    double profit_threshold = 0.0;
    double maintenance_threshold = 0.0;
    // stats[group][category - 1]
    std::array<std::array<CategoryStats, 4>, 2> stats{};
    double beta = 0.0;
    double p_fail = 0.0;
    std::optional<double> stability_n;
    std::optional<bool> a5_holds;
    bool a6_geometric_decay = false;
    bool a6_pmax_one = false;
    bool a7_integer_drift = false;

    const CategoryStats& stat(Group g, Category c) const {
        return stats[static_cast<std::size_t>(g)][static_cast<std::size_t>(c) - 1];
    }
};

/// beta_hint overrides the realized advantage in the stability check; the
/// stability check is only evaluated when stability_n is given.
AssumptionsReport assumptions_report(const Instance& inst,
                                     std::optional<double> beta_hint = std::nullopt,
                                     std::optional<double> stability_n = std::nullopt);

}  // namespace fairsel
