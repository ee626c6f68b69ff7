#include "fairsel/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fairsel {

namespace {

using ojson = nlohmann::ordered_json;

double density_sd(const GaussianShape& s) { return s.variance_is_sigma ? s.variance : std::sqrt(s.variance); }

void check_shape(const GaussianShape& s, int x_max) {
    if (x_max < 1) throw std::domain_error("x_max must be >= 1");
    if (!(s.variance > 0.0)) throw std::domain_error("variance must be > 0");
    if (!(0.0 <= s.mean_b && s.mean_b <= s.mean_a && s.mean_a <= x_max))
        throw std::domain_error("means must satisfy 0 <= mean_b <= mean_a <= x_max");
    if (!(s.w_a >= 0.0 && s.w_a <= 1.0)) throw std::domain_error("w_a must lie in [0,1]");
}

std::string trim(std::string s) {
    const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && ws(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && ws(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

template <class T>
const ojson& field(const ojson& j, const char* key) {
    if (!j.contains(key)) throw IoError(std::string("instance file is missing '") + key + "'");
    const auto& v = j.at(key);
    if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw IoError(std::string("'") + key + "' must be a number");
    } else if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw IoError(std::string("'") + key + "' must be an integer");
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array()) throw IoError(std::string("'") + key + "' must be an array");
        for (const auto& e : v)
            if (!e.is_number()) throw IoError(std::string("'") + key + "' must hold numbers only");
    } else {
        if (!v.is_object()) throw IoError(std::string("'") + key + "' must be an object");
    }
    return v;
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

std::vector<double> discretized_gaussian(double mean, double sd, int x_max) {
    if (!(sd > 0.0)) throw std::domain_error("standard deviation must be > 0");
    std::vector<double> pmf(static_cast<std::size_t>(x_max) + 1);
    double total = 0.0;
    for (int x = 0; x <= x_max; ++x) {
        const double z = (x - mean) / sd;
        pmf[static_cast<std::size_t>(x)] = std::exp(-0.5 * z * z);
        total += pmf[static_cast<std::size_t>(x)];
    }
    if (!(total > 0.0)) throw std::domain_error("distribution has no mass on the grid");
    for (double& v : pmf) v /= total;
    return pmf;
}

Instance synth_gaussian(const GaussianShape& shape, int x_max, const Economics& econ, PKind p_kind) {
    check_shape(shape, x_max);
    Instance inst;
    inst.grid.x_max = x_max;
    inst.p = SuccessProb::linear(x_max);
    if (p_kind == PKind::Table) inst.p = SuccessProb::table(inst.p.values());
    inst.econ = econ;
    const double sd = density_sd(shape);
    inst.dist_a.pmf = discretized_gaussian(shape.mean_a, sd, x_max);
    inst.dist_b.pmf = discretized_gaussian(shape.mean_b, sd, x_max);
    inst.w_a = shape.w_a;
    inst.w_b = 1.0 - shape.w_a;
    inst.meta.provenance = "gaussian";
    inst.validate();
    return inst;
}

Instance synth_geometric_failure(double p_fail, double c_plus, double c_minus, int x_max, const Economics& econ,
                                 const GaussianShape& shape) {
    if (!(p_fail > 0.0 && p_fail < 1.0)) throw std::domain_error("p_fail must lie in (0,1)");
    if (!(c_plus > 0.0)) throw std::domain_error("c_plus must be > 0");
    Instance inst = synth_gaussian(shape, x_max, econ, PKind::Table);
    inst.econ.c_plus = c_plus;
    inst.econ.c_minus = c_minus;
    std::vector<double> p(static_cast<std::size_t>(x_max) + 1);
    for (int x = 0; x < x_max; ++x) p[static_cast<std::size_t>(x)] = 1.0 - p_fail * std::pow(3.0, -x / c_plus);
    p.back() = 1.0;
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("geometric failure table leaves [0,1]");
    inst.p = SuccessProb::table(std::move(p));
    inst.meta.provenance = "geometric-failure";
    inst.validate();
    return inst;
}

Instance integer_drift_variant(const Instance& inst) {
    const auto& e = inst.econ;
    if (e.c_plus < 1.0) throw std::domain_error("integer drift needs c_plus >= 1");
    std::vector<double> p(inst.p.values());
    for (int x = 0; x <= inst.grid.x_max; ++x) {
        const auto i = static_cast<std::size_t>(x);
        const double drift = p[i] * e.c_plus + (1.0 - p[i]) * e.c_minus;
        const double k = std::max(1.0, std::floor(drift + 1e-12));
        p[i] = std::clamp((k - e.c_minus) / (e.c_plus - e.c_minus), 0.0, 1.0);
    }
    Instance out = inst;
    out.p = SuccessProb::table(std::move(p));
    out.meta.provenance = inst.meta.provenance + "+integer-drift";
    return out;
}

GroupCsv parse_group_csv(std::istream& in, int x_max) {
    if (x_max < 1) throw IoError("x_max must be >= 1");
    GroupCsv out;
    const auto n = static_cast<std::size_t>(x_max) + 1;
    out.a.pmf.assign(n, 0.0);
    out.b.pmf.assign(n, 0.0);
    std::vector<bool> seen_a(n, false), seen_b(n, false);

    std::string line;
    long row = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++row;
        if (row == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto cells = split(body);
        if (!header) {
            if (cells != std::vector<std::string>{"group", "score", "pmf"})
                throw IoError("row " + std::to_string(row) + ": expected header 'group,score,pmf'", row);
            header = true;
            continue;
        }
        const auto fail = [&](const std::string& why) -> IoError {
            return IoError("row " + std::to_string(row) + ": " + why, row);
        };
        if (cells.size() != 3) throw fail("expected 3 fields, found " + std::to_string(cells.size()));
        if (cells[0] != "A" && cells[0] != "B") throw fail("unknown group label '" + cells[0] + "'");
        int score = 0;
        const auto& s = cells[1];
        const auto rs = std::from_chars(s.data(), s.data() + s.size(), score);
        if (s.empty() || rs.ec != std::errc() || rs.ptr != s.data() + s.size())
            throw fail("score '" + s + "' is not an integer");
        if (score < 0 || score > x_max)
            throw fail("score " + std::to_string(score) + " outside 0.." + std::to_string(x_max));
        const auto& ps = cells[2];
        char* end = nullptr;
        const double pmf = std::strtod(ps.c_str(), &end);
        if (ps.empty() || end != ps.c_str() + ps.size() || !std::isfinite(pmf))
            throw fail("pmf '" + ps + "' is not a number");
        if (pmf < 0.0) throw fail("negative pmf");
        auto& seen = cells[0] == "A" ? seen_a : seen_b;
        if (seen[static_cast<std::size_t>(score)]) throw fail("duplicate score " + std::to_string(score));
        seen[static_cast<std::size_t>(score)] = true;
        (cells[0] == "A" ? out.a.pmf : out.b.pmf)[static_cast<std::size_t>(score)] = pmf;
    }
    if (!header) throw IoError("empty group file: header 'group,score,pmf' required");

    for (auto* d : {&out.a, &out.b}) {
        const char* name = d == &out.a ? "A" : "B";
        double total = 0.0;
        for (double v : d->pmf) total += v;
        if (std::abs(total - 1.0) > 1e-6 + 1e-12)
            throw IoError(std::string("group ") + name + " pmf sums to " + format_number(total) +
                          ", outside 1 +/- 1e-6");
        if (std::abs(total - 1.0) > 1e-12)
            out.warnings.push_back(std::string("group ") + name + " pmf summed to " + format_number(total) +
                                   "; renormalized");
        for (double& v : d->pmf) v /= total;
    }
    return out;
}

GroupCsv load_group_csv(const std::string& path, int x_max) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open group file '" + path + "'");
    return parse_group_csv(in, x_max);
}

std::string instance_to_json(const Instance& inst) {
    ojson j;
    j["x_max"] = inst.grid.x_max;
    j["w_a"] = inst.w_a;
    j["w_b"] = inst.w_b;
    j["u_plus"] = inst.econ.u_plus;
    j["u_minus"] = inst.econ.u_minus;
    j["c_plus"] = inst.econ.c_plus;
    j["c_minus"] = inst.econ.c_minus;
    ojson p;
    if (inst.p.kind() == SuccessProb::Kind::Linear) {
        p["kind"] = "linear";
    } else {
        p["kind"] = "table";
        p["values"] = inst.p.values();
    }
    j["p"] = p;
    j["dist_a"] = inst.dist_a.pmf;
    j["dist_b"] = inst.dist_b.pmf;
    ojson meta = ojson::object();
    if (inst.meta.scale) meta["scale"] = *inst.meta.scale;
    if (inst.meta.epsilon) meta["epsilon"] = *inst.meta.epsilon;
    if (!inst.meta.provenance.empty()) meta["provenance"] = inst.meta.provenance;
    if (!meta.empty()) j["metadata"] = meta;
    return j.dump(2) + "\n";
}

Instance instance_from_json(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("instance JSON parse error at byte ") + std::to_string(e.byte) + ": " + e.what());
    }
    if (!j.is_object()) throw IoError("instance file must hold a JSON object");

    Instance inst;
    inst.grid.x_max = field<int>(j, "x_max").get<int>();
    if (inst.grid.x_max < 1) throw IoError("x_max must be >= 1");
    inst.w_a = field<double>(j, "w_a").get<double>();
    inst.w_b = field<double>(j, "w_b").get<double>();
    inst.econ.u_plus = field<double>(j, "u_plus").get<double>();
    inst.econ.u_minus = field<double>(j, "u_minus").get<double>();
    inst.econ.c_plus = field<double>(j, "c_plus").get<double>();
    inst.econ.c_minus = field<double>(j, "c_minus").get<double>();

    const auto& p = field<ojson>(j, "p");
    if (!p.contains("kind") || !p.at("kind").is_string()) throw IoError("'p.kind' must be \"linear\" or \"table\"");
    const auto kind = p.at("kind").get<std::string>();
    try {
        if (kind == "linear") {
            inst.p = SuccessProb::linear(inst.grid.x_max);
        } else if (kind == "table") {
            inst.p = SuccessProb::table(field<std::vector<double>>(p, "values").get<std::vector<double>>());
        } else {
            throw IoError("unknown p.kind '" + kind + "'");
        }
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("p: ") + e.what());
    }
    inst.dist_a.pmf = field<std::vector<double>>(j, "dist_a").get<std::vector<double>>();
    inst.dist_b.pmf = field<std::vector<double>>(j, "dist_b").get<std::vector<double>>();

    if (j.contains("metadata")) {
        const auto& m = field<ojson>(j, "metadata");
        if (m.contains("scale")) inst.meta.scale = field<double>(m, "scale").get<double>();
        if (m.contains("epsilon")) inst.meta.epsilon = field<double>(m, "epsilon").get<double>();
        if (m.contains("provenance")) {
            if (!m.at("provenance").is_string()) throw IoError("'metadata.provenance' must be a string");
            inst.meta.provenance = m.at("provenance").get<std::string>();
        }
    }
    try {
        inst.validate();
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("invalid instance: ") + e.what());
    }
    return inst;
}

Instance read_instance(const std::string& path) { return instance_from_json(read_text_file(path)); }

void write_instance(const std::string& path, const Instance& inst) { write_text_file(path, instance_to_json(inst)); }

std::string format_number(double v) {
    if (v == 0.0) return "0";  // folds -0
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void write_pof_csv(std::ostream& out, const std::vector<PofRow>& rows) {
    out << kPofHeader << '\n';
    for (const auto& r : rows)
        out << format_number(r.alpha) << ',' << format_number(r.report.opt_value) << ','
            << opt_cell(r.report.fair_value) << ',' << opt_cell(r.report.pof) << ','
            << (r.report.feasible ? "true" : "false") << '\n';
}

void write_pos_csv(std::ostream& out, const std::vector<PosRow>& rows) {
    out << kPosHeader << '\n';
    for (const auto& r : rows)
        out << format_number(r.alpha) << ',' << r.report.omega_grid_size << ',' << opt_cell(r.report.lp_value) << ','
            << opt_cell(r.report.threshold_value) << ',' << opt_cell(r.report.pos) << ','
            << (r.report.feasible ? "true" : "false") << '\n';
}

void write_traj_csv(std::ostream& out, const Trajectory& traj) {
    out << kTrajHeader << '\n';
    const auto line = [&](const std::string& seed, const StepMetrics& m) {
        out << seed << ',' << m.t << ',' << format_number(m.mean_a) << ',' << format_number(m.mean_b) << ','
            << format_number(m.gap) << ',' << format_number(m.step_utility) << ',' << format_number(m.cum_utility)
            << ',' << format_number(m.frac_xmax_a) << ',' << format_number(m.frac_xmax_b) << '\n';
    };
    for (const auto& r : traj.runs)
        for (const auto& m : r.steps) line(std::to_string(r.seed), m);
    for (const auto& m : traj.mean) line("agg", m);
    for (const auto& m : traj.sd) line("agg_sd", m);
}

void write_text_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + path + "'");
        out << content;
        if (!out) throw IoError("write failed for '" + path + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot move output into place at '" + path + "': " + ec.message());
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace fairsel
