#pragma once

// Small dense linear programs over box-bounded variables:
//
//     maximize  c . v   subject to  G v <= h,  0 <= v <= upper.
//
// Sized for a few hundred variables and a handful of rows.

#include <stdexcept>
#include <string>
#include <vector>

namespace fairsel::lp {

struct LpProblem {
    std::vector<double> objective;          // c, length n
    std::vector<std::vector<double>> rows;  // G, k rows of length n
    std::vector<double> rhs;                // h, length k
    std::vector<double> upper;              // per-variable upper bound; empty means all 1

    std::size_t num_vars() const { return objective.size(); }
};

enum class Status { Optimal, Infeasible };

struct LpSolution {
    Status status = Status::Infeasible;
    std::vector<double> values;
    double objective = 0.0;
    int iterations = 0;

    bool optimal() const { return status == Status::Optimal; }
};

/// Numerical breakdown or a malformed problem. Never raised for plain infeasibility.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kPivotTol = 1e-11;

/// Bounded-variable two-phase primal simplex with Bland's least-index rule.
/// Deterministic for a fixed input.
LpSolution solve(const LpProblem& problem);

}  // namespace fairsel::lp
