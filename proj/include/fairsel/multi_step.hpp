#pragma once

// Agent-based simulation of repeated selection: populations drawn from an
// instance, per-step selection under one of five policies, stochastic score
// updates and per-step metrics aggregated across seeds.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fairsel/model.hpp"

namespace fairsel {

enum class PolicyKind { Myopic, Investment, SimpleInvestment, ThresholdFair, ZeroGapLp };

const char* to_string(PolicyKind k);
/// Accepts myopic, investment, simple-investment, threshold-fair, zero-gap-lp.
PolicyKind parse_policy_kind(const std::string& name);

/// Seeded stream keyed by (seed, step, purpose). Uniforms use the top 53 bits
/// so draws are identical across standard libraries.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t step, std::uint64_t purpose);

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

struct Agent {
    Group group = Group::A;
    double score = 0.0;
    bool ever_failed = false;
    bool selected_last = false;
};

struct Population {
    std::vector<Agent> agents;  // all A agents first, then all B agents
    int n_a = 0;
    int n_b = 0;

    int count(Group g) const { return g == Group::A ? n_a : n_b; }
};

struct SimConfig {
    int n_agents = 100000;
    int horizon = 100;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    int opportunities = 1;
    PolicyKind policy = PolicyKind::Myopic;
    double alpha = 0.0;  // ThresholdFair gap budget in grid units
    int omega_grid_size = 101;
    bool trace_cascade = false;
    int threads = 0;  // 0 means hardware concurrency

    void validate() const;
};

struct StepMetrics {
    int t = 0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double gap = 0.0;
    double step_utility = 0.0;  // realized utility per agent in the population
    double cum_utility = 0.0;
    double frac_xmax_a = 0.0;
    double frac_xmax_b = 0.0;
    long selected_count = 0;
    bool infeasible = false;              // ThresholdFair found no fair threshold pair
    std::optional<double> min_gap;        // ZeroGapLp phase-1 optimum
    std::optional<double> min_delta_selected;  // smallest unclipped score move among selected agents
};

struct CascadeStep {
    int t = 0;
    double never_failed_frac = 1.0;  // among agents initially in C1 or C3
    double xmax_frac = 0.0;          // among agents initially in C1 or C3
    std::optional<double> max_deviation;  // |score - expected score| over never-failed agents
};

struct SeedRun {
    std::uint64_t seed = 0;
    StepMetrics initial;  // t = 0, before any selection
    std::vector<StepMetrics> steps;
    std::vector<CascadeStep> cascade;
    long tracked_agents = 0;
};

struct Trajectory {
    int horizon = 0;
    PolicyKind policy = PolicyKind::Myopic;
    std::vector<SeedRun> runs;
    StepMetrics initial_mean;
    std::vector<StepMetrics> mean;  // per step, across seeds
    std::vector<StepMetrics> sd;    // sample standard deviation, 0 for one seed
    int n_agents = 0;
};

Population make_population(const Instance& inst, int n_agents, std::uint64_t seed);

/// Selection mask for the current population. `infeasible` and `min_gap`,
/// when given, receive the per-step flags of the fair policies.
std::vector<bool> select(PolicyKind kind, const Population& pop, const Instance& inst, double alpha,
                         Rng& rng, int omega_grid_size = 101, bool* infeasible = nullptr,
                         std::optional<double>* min_gap = nullptr);

/// Applies one round of outcomes to the selected agents. The returned metrics
/// have t = 0 and cum_utility equal to the step utility.
StepMetrics advance(Population& pop, const std::vector<bool>& mask, const Instance& inst, int m, Rng& rng);

StepMetrics measure(const Population& pop, const Instance& inst);

Trajectory run(const SimConfig& config, const Instance& inst);

/// 1 - cum_fair(T) / cum_myopic(T) over the aggregate means, clamped to [0,1].
std::optional<double> empirical_pof(const Trajectory& fair, const Trajectory& myopic);

struct CascadeReport {
    std::vector<CascadeStep> steps;  // across-seed mean per step
    double p_fail = 0.0;
    double final_xmax_frac = 0.0;
    bool xmax_violation = false;       // final x_max fraction below 1 - 10 p_fail
    bool deviation_warning = false;    // deviation above (C+ - C-) sqrt(t) log^2(t n)
};

/// Needs a trajectory recorded with trace_cascade.
CascadeReport cascade_diagnostics(const Trajectory& traj, const Instance& inst);

/// Expected score at steps 0..horizon for an agent starting at grid score x0
/// under the never-failed investment rule; integer score moves only.
std::vector<double> expected_investment_path(const Instance& inst, int x0, int horizon);

}  // namespace fairsel
