#include "fairsel/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fairsel::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCostTol = 1e-9;
constexpr double kRatioTieTol = 1e-12;

void check_shape(const LpProblem& p) {
    const std::size_t n = p.num_vars();
    if (p.rows.size() != p.rhs.size()) throw SolverError("constraint rows and rhs lengths differ");
    if (!p.upper.empty() && p.upper.size() != n) throw SolverError("upper bounds have the wrong length");
    for (double c : p.objective)
        if (!std::isfinite(c)) throw SolverError("non-finite objective coefficient");
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        if (p.rows[i].size() != n) throw SolverError("constraint row " + std::to_string(i) + " has the wrong length");
        if (!std::isfinite(p.rhs[i])) throw SolverError("non-finite rhs");
        for (double g : p.rows[i])
            if (!std::isfinite(g)) throw SolverError("non-finite constraint coefficient");
    }
    for (double u : p.upper)
        if (!(u >= 0.0) || !std::isfinite(u)) throw SolverError("upper bounds must be finite and >= 0");
}

// Dense tableau over [structural | slack | artificial] columns. Row i reads
// sign_i * (G_i v + s_i) + a_i = sign_i * h_i with a non-negative right side.
class Simplex {
public:
    Simplex(std::vector<std::vector<double>> rows, std::vector<double> rhs, std::vector<double> upper)
        : n_(upper.size()), k_(rows.size()), cols_(n_ + 2 * k_) {
        a_.assign(k_, std::vector<double>(cols_, 0.0));
        b_.assign(k_, 0.0);
        ub_.assign(cols_, kInf);
        at_upper_.assign(cols_, false);
        is_basic_.assign(cols_, false);
        basis_.assign(k_, 0);
        for (std::size_t j = 0; j < n_; ++j) ub_[j] = upper[j];
        for (std::size_t i = 0; i < k_; ++i) {
            const double sign = rhs[i] >= 0.0 ? 1.0 : -1.0;
            for (std::size_t j = 0; j < n_; ++j) a_[i][j] = sign * rows[i][j];
            a_[i][n_ + i] = sign;
            a_[i][n_ + k_ + i] = 1.0;
            b_[i] = sign * rhs[i];
            const std::size_t start = sign > 0.0 ? n_ + i : n_ + k_ + i;
            if (sign > 0.0) ub_[n_ + k_ + i] = 0.0;
            basis_[i] = start;
            is_basic_[start] = true;
        }
        t_ = a_;
        beta_ = b_;
    }

    // Returns false when the rows cannot be satisfied.
    bool phase_one() {
        std::vector<double> cost(cols_, 0.0);
        for (std::size_t i = 0; i < k_; ++i)
            if (ub_[n_ + k_ + i] > 0.0) cost[n_ + k_ + i] = -1.0;
        run(cost);
        double residual = 0.0, scale = 1.0;
        for (std::size_t i = 0; i < k_; ++i) {
            scale = std::max(scale, std::abs(b_[i]));
            if (basis_[i] >= n_ + k_) residual += std::max(beta_[i], 0.0);
        }
        for (std::size_t j = n_ + k_; j < cols_; ++j) {
            if (!is_basic_[j] && at_upper_[j]) residual += ub_[j];
            ub_[j] = 0.0;
            at_upper_[j] = false;
        }
        return residual <= kFeasibilityTol * scale;
    }

    void phase_two(const std::vector<double>& objective) {
        std::vector<double> cost(cols_, 0.0);
        std::copy(objective.begin(), objective.end(), cost.begin());
        run(cost);
    }

    std::vector<double> structural_values() const {
        std::vector<double> x(cols_, 0.0);
        for (std::size_t j = 0; j < cols_; ++j)
            if (!is_basic_[j] && at_upper_[j]) x[j] = ub_[j];
        for (std::size_t i = 0; i < k_; ++i) x[basis_[i]] = beta_[i];
        refine_basic(x);
        x.resize(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            if (x[j] < 0.0 && x[j] > -1e-9) x[j] = 0.0;
            if (x[j] > ub_[j] && x[j] < ub_[j] + 1e-9) x[j] = ub_[j];
        }
        return x;
    }

    int iterations() const { return iterations_; }

private:
    void run(const std::vector<double>& cost) {
        const int limit = static_cast<int>(200 * (cols_ + k_)) + 1000;
        std::vector<double> y(k_);
        for (;;) {
            if (++iterations_ > limit) throw SolverError("simplex iteration limit exceeded");
            for (std::size_t i = 0; i < k_; ++i) y[i] = cost[basis_[i]];

            std::size_t entering = cols_;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (is_basic_[j] || ub_[j] <= 0.0) continue;
                double d = cost[j];
                for (std::size_t i = 0; i < k_; ++i) d -= y[i] * t_[i][j];
                if ((!at_upper_[j] && d > kCostTol) || (at_upper_[j] && d < -kCostTol)) {
                    entering = j;
                    break;
                }
            }
            if (entering == cols_) return;

            const double sigma = at_upper_[entering] ? -1.0 : 1.0;
            double theta = ub_[entering];
            std::size_t leave = k_;
            bool leave_to_upper = false;
            for (std::size_t i = 0; i < k_; ++i) {
                const double coef = t_[i][entering];
                if (std::abs(coef) <= kPivotTol) continue;
                const double rate = -sigma * coef;
                double lim;
                bool to_upper;
                if (rate < 0.0) {
                    lim = beta_[i] / -rate;
                    to_upper = false;
                } else {
                    const double ubb = ub_[basis_[i]];
                    if (!std::isfinite(ubb)) continue;
                    lim = (ubb - beta_[i]) / rate;
                    to_upper = true;
                }
                lim = std::max(lim, 0.0);
                const bool better = lim < theta - kRatioTieTol;
                const bool tie = !better && leave < k_ && std::abs(lim - theta) <= kRatioTieTol &&
                                 basis_[i] < basis_[leave];
                if (better || tie) {
                    theta = lim;
                    leave = i;
                    leave_to_upper = to_upper;
                }
            }
            if (!std::isfinite(theta)) throw SolverError("unbounded direction in a boxed problem");

            for (std::size_t i = 0; i < k_; ++i) beta_[i] += -sigma * t_[i][entering] * theta;

            if (leave == k_) {
                at_upper_[entering] = !at_upper_[entering];
                continue;
            }
            const double start = at_upper_[entering] ? ub_[entering] : 0.0;
            pivot(leave, entering);
            const std::size_t leaving = basis_[leave];
            at_upper_[leaving] = leave_to_upper;
            is_basic_[leaving] = false;
            basis_[leave] = entering;
            is_basic_[entering] = true;
            at_upper_[entering] = false;
            beta_[leave] = start + sigma * theta;
        }
    }

    void pivot(std::size_t r, std::size_t c) {
        const double piv = t_[r][c];
        if (std::abs(piv) < kPivotTol)
            throw SolverError("pivot magnitude " + std::to_string(piv) + " below tolerance");
        for (double& v : t_[r]) v /= piv;
        for (std::size_t i = 0; i < k_; ++i) {
            if (i == r) continue;
            const double f = t_[i][c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols_; ++j) t_[i][j] -= f * t_[r][j];
            t_[i][c] = 0.0;
        }
    }

    // Re-solve B x_B = b - N x_N against the original rows to shed drift.
    void refine_basic(std::vector<double>& x) const {
        if (k_ == 0) return;
        std::vector<std::vector<double>> m(k_, std::vector<double>(k_ + 1, 0.0));
        for (std::size_t i = 0; i < k_; ++i) {
            double r = b_[i];
            for (std::size_t j = 0; j < cols_; ++j)
                if (!is_basic_[j]) r -= a_[i][j] * x[j];
            for (std::size_t q = 0; q < k_; ++q) m[i][q] = a_[i][basis_[q]];
            m[i][k_] = r;
        }
        for (std::size_t col = 0; col < k_; ++col) {
            std::size_t best = col;
            for (std::size_t i = col + 1; i < k_; ++i)
                if (std::abs(m[i][col]) > std::abs(m[best][col])) best = i;
            if (std::abs(m[best][col]) < 1e-14) return;
            std::swap(m[col], m[best]);
            for (std::size_t i = 0; i < k_; ++i) {
                if (i == col) continue;
                const double f = m[i][col] / m[col][col];
                for (std::size_t q = col; q <= k_; ++q) m[i][q] -= f * m[col][q];
            }
        }
        for (std::size_t q = 0; q < k_; ++q) x[basis_[q]] = m[q][k_] / m[q][q];
    }

    std::size_t n_, k_, cols_;
    std::vector<std::vector<double>> a_;  // original equality rows
    std::vector<double> b_;
    std::vector<std::vector<double>> t_;  // B^-1 A
    std::vector<double> beta_;            // basic values
    std::vector<double> ub_;
    std::vector<bool> at_upper_;
    std::vector<bool> is_basic_;
    std::vector<std::size_t> basis_;
    int iterations_ = 0;
};

}  // namespace

LpSolution solve(const LpProblem& problem) {
    check_shape(problem);
    const std::size_t n = problem.num_vars();
    std::vector<double> upper = problem.upper.empty() ? std::vector<double>(n, 1.0) : problem.upper;

    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (std::size_t i = 0; i < problem.rows.size(); ++i) {
        double scale = 0.0;
        for (double g : problem.rows[i]) scale = std::max(scale, std::abs(g));
        if (scale == 0.0) {
            if (problem.rhs[i] < -kFeasibilityTol * (1.0 + std::abs(problem.rhs[i])))
                return {Status::Infeasible, {}, 0.0, 0};
            continue;
        }
        std::vector<double> row(problem.rows[i]);
        for (double& g : row) g /= scale;
        rows.push_back(std::move(row));
        rhs.push_back(problem.rhs[i] / scale);
    }

    double cscale = 0.0;
    for (double c : problem.objective) cscale = std::max(cscale, std::abs(c));
    std::vector<double> cost(problem.objective);
    if (cscale > 0.0)
        for (double& c : cost) c /= cscale;

    Simplex simplex(std::move(rows), std::move(rhs), upper);
    if (!simplex.phase_one()) return {Status::Infeasible, {}, 0.0, simplex.iterations()};
    simplex.phase_two(cost);

    LpSolution out;
    out.status = Status::Optimal;
    out.values = simplex.structural_values();
    out.iterations = simplex.iterations();
    for (std::size_t j = 0; j < n; ++j) out.objective += problem.objective[j] * out.values[j];
    return out;
}

}  // namespace fairsel::lp
