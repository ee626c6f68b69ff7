#pragma once

// Sweeps and named experiment presets shared by the command-line tool, the
// Python module and the acceptance checks.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fairsel/data_io.hpp"
#include "fairsel/multi_step.hpp"
#include "fairsel/single_step.hpp"

namespace fairsel {

/// "lo:hi:step", inclusive of hi when it lies on the grid. A single number is
/// a one-point grid. Values are rounded to 12 decimals.
std::vector<double> parse_alpha_grid(const std::string& text);

/// alphas are fractions of the score range and get scaled by x_max.
std::vector<PofRow> pof_sweep(const Instance& inst, const std::vector<double>& alphas, const PofOptions& options,
                              int threads = 0);

/// One row per (alpha, omega size), alpha-major.
std::vector<PosRow> pos_sweep(const Instance& inst, const std::vector<double>& alphas,
                              const std::vector<int>& omega_sizes, bool non_degrading, int threads = 0);

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

Economics synthetic_baseline_econ();
Economics synthetic_highrisk_econ();
Economics fico_econ();

Instance fig1_synthetic_baseline();
Instance fig1_synthetic_highrisk();
/// Builds the FICO-style instance from a group CSV on a 0..100 grid.
Instance fico_instance(const std::string& groups_csv);
Instance fig2_instance();

/// Bundled group CSV; the FAIRSEL_DATA_DIR environment variable overrides
/// the build-time data directory.
std::string default_fico_csv();

const std::vector<std::string>& preset_names();

struct PresetOptions {
    std::string out_dir = ".";
    std::string fico_csv;  // empty means the bundled file
    bool full_scale = false;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    int n_agents = 0;  // 0 keeps the preset default
    int steps = 0;     // 0 keeps the preset default
    int threads = 0;
};

/// Writes the preset's instance JSON and result CSVs under out_dir and returns
/// the written paths in order.
std::vector<std::string> run_preset(const std::string& name, const PresetOptions& options);

/// Candidate C- values of the robustness sweep for one base instance: the
/// base value first, then decreasing values past the ordering boundary.
std::vector<double> cminus_sweep(const Economics& base);

}  // namespace fairsel
