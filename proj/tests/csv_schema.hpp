#pragma once

// Column-typed checker for the result CSV files.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace csv_schema {

enum class Kind { Number, OptionalNumber, Integer, Boolean, SeedLabel };

struct Column {
    std::string name;
    Kind kind;
};

struct Result {
    long rows = 0;
    std::vector<std::string> errors;
};

inline std::vector<Column> pof() {
    return {{"alpha", Kind::Number},
            {"opt_value", Kind::Number},
            {"fair_value", Kind::OptionalNumber},
            {"pof", Kind::OptionalNumber},
            {"feasible", Kind::Boolean}};
}

inline std::vector<Column> pos() {
    return {{"alpha", Kind::Number},         {"omega_grid", Kind::Integer},
            {"lp_value", Kind::OptionalNumber}, {"threshold_value", Kind::OptionalNumber},
            {"pos", Kind::OptionalNumber},   {"feasible", Kind::Boolean}};
}

inline std::vector<Column> traj() {
    std::vector<Column> c{{"seed", Kind::SeedLabel}, {"t", Kind::Integer}};
    for (const char* n : {"mean_a", "mean_b", "gap", "step_utility", "cum_utility", "frac_xmax_a", "frac_xmax_b"})
        c.push_back({n, Kind::Number});
    return c;
}

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline bool is_number(const std::string& s) {
    if (s.empty()) return false;
    std::size_t used = 0;
    try {
        const double v = std::stod(s, &used);
        return used == s.size() && std::isfinite(v);
    } catch (...) {
        return false;
    }
}

inline bool is_integer(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

inline bool cell_ok(const std::string& s, Kind k) {
    switch (k) {
        case Kind::Number: return is_number(s);
        case Kind::OptionalNumber: return s.empty() || is_number(s);
        case Kind::Integer: return is_integer(s);
        case Kind::Boolean: return s == "true" || s == "false";
        case Kind::SeedLabel: return is_integer(s) || s == "agg" || s == "agg_sd";
    }
    return false;
}

inline Result check(const std::string& text, const std::vector<Column>& cols) {
    Result r;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        r.errors.push_back("missing header");
        return r;
    }
    const auto head = split(line);
    if (head.size() != cols.size()) {
        r.errors.push_back("header has " + std::to_string(head.size()) + " columns");
        return r;
    }
    for (std::size_t i = 0; i < cols.size(); ++i)
        if (head[i] != cols[i].name) r.errors.push_back("column " + std::to_string(i) + " is '" + head[i] + "'");
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        ++r.rows;
        const auto cells = split(line);
        if (cells.size() != cols.size()) {
            r.errors.push_back("row " + std::to_string(row) + ": wrong field count");
            continue;
        }
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (!cell_ok(cells[i], cols[i].kind))
                r.errors.push_back("row " + std::to_string(row) + ": bad " + cols[i].name + " '" + cells[i] + "'");
    }
    return r;
}

}  // namespace csv_schema
