#pragma once

// Single-step policy optimization: the unconstrained optimum, the optimal
// alpha-fair policy (LP and group-wise threshold search), Price of Fairness,
// Price of Simplicity, the lower-bound constructions and the sufficient
// condition for a small Price of Fairness.

#include <optional>
#include <set>
#include <vector>

#include "fairsel/model.hpp"

namespace fairsel {

/// Per-variable restriction for the fair solvers: true pins pi_g(x) to 0.
struct VariableMask {
    std::vector<bool> pinned_a;
    std::vector<bool> pinned_b;

    bool empty() const;
    bool pinned(Group g, int x) const {
        const auto& v = g == Group::A ? pinned_a : pinned_b;
        return !v.empty() && v[static_cast<std::size_t>(x)];
    }
    std::vector<int> pinned_scores(Group g) const;
};

enum class FairMethod { Lp, Threshold };

const char* to_string(FairMethod m);

struct FairSolution {
    Policy policy;
    double value = 0.0;
    double mu_a_prime = 0.0;
    double mu_b_prime = 0.0;
    double gap = 0.0;
    bool feasible = false;
    FairMethod method = FairMethod::Lp;
    std::optional<ThresholdPolicy> thresholds;  // set by the threshold search
};

struct OptimalPolicy {
    ThresholdPolicy policy;
    double value = 0.0;
};

/// Group-agnostic threshold at the profit threshold, omega = 1.
OptimalPolicy optimal_policy(const Instance& inst);

/// Mask pinning every C4 grid score to zero in both groups.
VariableMask restrict_non_degrading(const Instance& inst);

FairSolution fair_opt_lp(const Instance& inst, double alpha, const VariableMask& mask = {});

/// Exhaustive search over (cutoff, omega) pairs for each group, omega on a
/// uniform grid of omega_grid_size points in [0,1] ({1} when the size is 1).
/// The empty selection is always a candidate.
FairSolution fair_opt_threshold(const Instance& inst, double alpha, int omega_grid_size = 101,
                                const VariableMask& mask = {});

std::vector<double> omega_grid(int size);

struct PofReport {
    double alpha = 0.0;
    double opt_value = 0.0;
    std::optional<double> fair_value;
    std::optional<double> pof;
    bool feasible = false;
};

struct PofOptions {
    FairMethod method = FairMethod::Lp;
    int omega_grid_size = 101;
    bool non_degrading = false;
};

PofReport price_of_fairness(const Instance& inst, double alpha, const PofOptions& options = {});

struct PosReport {
    double alpha = 0.0;
    int omega_grid_size = 0;
    std::optional<double> lp_value;
    std::optional<double> threshold_value;
    std::optional<double> pos;
    bool feasible = false;
};

PosReport price_of_simplicity(const Instance& inst, double alpha, int omega_grid_size,
                              bool non_degrading = false);

/// Two half-weight point masses a scaled epsilon apart: A where success is
/// certain, B at the zero-utility score. alpha only enters the domain check.
Instance build_lb_general(double alpha, double epsilon);

/// Three-point construction with total variation distance epsilon between the
/// groups; the shared bottom score is the only C4 score.
Instance build_lb_tv(double alpha, double epsilon);

double total_variation(const GroupDistribution& a, const GroupDistribution& b);

struct SufficiencyReport {
    double epsilon = 0.0;
    double alpha = 0.0;
    bool condition1 = false;
    bool condition2a = false;
    bool condition2b = false;
    std::set<int> chosen_c3_subset;
    std::optional<double> implied_pof_bound;

    bool satisfied() const { return implied_pof_bound.has_value(); }
};

SufficiencyReport sufficient_condition_check(const Instance& inst, double alpha, double epsilon);

}  // namespace fairsel
