#pragma once

// Instance generators, group-distribution CSV ingestion, instance JSON files
// and the result CSV writers.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fairsel/model.hpp"
#include "fairsel/multi_step.hpp"
#include "fairsel/single_step.hpp"

namespace fairsel {

/// Malformed input files. Carries the 1-based row when one applies.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what, std::optional<long> row = std::nullopt)
        : std::runtime_error(what), row_(row) {}
    std::optional<long> row() const { return row_; }

private:
    std::optional<long> row_;
};

struct GaussianShape {
    double mean_a = 80.0;
    double mean_b = 60.0;
    double variance = 30.0;
    bool variance_is_sigma = false;  // read `variance` as a standard deviation
    double w_a = 0.7;
};

/// Discretized Gaussian pmf on 0..x_max: density at each integer, normalized.
std::vector<double> discretized_gaussian(double mean, double sd, int x_max);

enum class PKind { Linear, Table };

Instance synth_gaussian(const GaussianShape& shape, int x_max, const Economics& econ,
                        PKind p_kind = PKind::Linear);

/// 1 - p(x) = p_fail * 3^(-x / c_plus), with p(x_max) = 1. The economics'
/// c_plus / c_minus are replaced by the given moves.
Instance synth_geometric_failure(double p_fail, double c_plus, double c_minus, int x_max, const Economics& econ,
                                 const GaussianShape& shape);

/// Lowers (or raises, below one unit) each p(x) so the expected score move is
/// a positive integer: E[delta(x)] = max(1, floor(E[delta(x)])).
Instance integer_drift_variant(const Instance& inst);

struct GroupCsv {
    GroupDistribution a;
    GroupDistribution b;
    std::vector<std::string> warnings;
};

/// Header `group,score,pmf`. Scores outside 0..x_max are an error; missing
/// scores get mass 0; each group is renormalized to sum to 1.
GroupCsv load_group_csv(const std::string& path, int x_max);
GroupCsv parse_group_csv(std::istream& in, int x_max);

std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);
Instance read_instance(const std::string& path);
void write_instance(const std::string& path, const Instance& inst);

inline constexpr const char* kPofHeader = "alpha,opt_value,fair_value,pof,feasible";
inline constexpr const char* kPosHeader = "alpha,omega_grid,lp_value,threshold_value,pos,feasible";
inline constexpr const char* kTrajHeader = "seed,t,mean_a,mean_b,gap,step_utility,cum_utility,frac_xmax_a,frac_xmax_b";

/// Rows carry alpha as given on the command line (fraction of the range).
struct PofRow {
    double alpha = 0.0;
    PofReport report;
};

struct PosRow {
    double alpha = 0.0;
    PosReport report;
};

void write_pof_csv(std::ostream& out, const std::vector<PofRow>& rows);
void write_pos_csv(std::ostream& out, const std::vector<PosRow>& rows);
/// One row per seed and step, then `agg` (mean) and `agg_sd` rows per step.
void write_traj_csv(std::ostream& out, const Trajectory& traj);

/// Writes through a temporary file and renames it into place.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Compact decimal form used in every CSV cell.
std::string format_number(double v);

}  // namespace fairsel
