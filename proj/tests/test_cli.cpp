#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "csv_schema.hpp"
#include "fairsel/data_io.hpp"
#include "fairsel/experiments.hpp"
#include "run_cmd.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = FAIRSEL_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("fairsel_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

CmdResult cli(const std::string& args) { return run_cmd(kCli + " " + args); }

std::vector<std::vector<std::string>> rows_of(const std::string& csv) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(csv_schema::split(line));
    return rows;
}

std::string gen_baseline(const TempDir& dir) {
    const std::string path = dir / "baseline.json";
    REQUIRE(cli("gen gaussian --out " + path).code == 0);
    return path;
}

}  // namespace

TEST_CASE("check") {
    TempDir dir;
    const auto inst = gen_baseline(dir);
    const auto r = cli("check --instance " + inst);
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["a2_threshold_order"] == true);
    CHECK(j["categories"]["A"].contains("C3"));

    const std::string bad = dir / "violating.json";
    REQUIRE(cli("gen gaussian --c-minus -20 --out " + bad).code == 0);
    const auto v = cli("check --instance " + bad);
    REQUIRE(v.code == 0);
    CHECK(json::parse(v.out)["a2_threshold_order"] == false);

    CHECK(cli("check --instance " + (dir / "missing.json")).code == 2);
    std::ofstream(dir / "garbage.json") << "{not json";
    CHECK(cli("check --instance " + (dir / "garbage.json")).code == 2);
    CHECK(cli("check").code == 2);
    CHECK(cli("frobnicate").code == 2);
}

TEST_CASE("gen") {
    TempDir dir;
    REQUIRE(cli("gen geometric --p-fail 0.01 --c-minus -1 --mean-a 90 --mean-b 70 --out " + (dir / "g.json")).code == 0);
    const auto g = fairsel::read_instance(dir / "g.json");
    CHECK(g.meta.provenance == "geometric-failure");
    REQUIRE(cli("gen from-csv --csv " + fairsel::default_fico_csv() + " --u-plus 1 --u-minus -2 --c-plus 7 --c-minus -14 --out " +
                (dir / "f.json"))
                .code == 0);
    CHECK(fairsel::read_instance(dir / "f.json").econ.c_minus == -14.0);
    CHECK(cli("gen from-csv --csv " + (dir / "none.csv")).code == 2);
    CHECK(cli("gen gaussian --mean-a 10 --mean-b 60").code == 2);
    CHECK(cli("gen lognormal").code == 2);
}

TEST_CASE("single") {
    TempDir dir;
    const auto inst = gen_baseline(dir);
    const auto r = cli("single --instance " + inst + " --alpha-grid 0:1:0.05");
    REQUIRE(r.code == 0);
    CHECK(csv_schema::check(r.out, csv_schema::pof()).errors.empty());
    const auto rows = rows_of(r.out);
    REQUIRE(rows.size() == 21);
    CHECK(rows.back()[0] == "1");
    CHECK(std::stod(rows.back()[3]) == 0.0);
    double prev = 2.0;
    for (const auto& row : rows) {
        if (row[3].empty()) continue;
        const double pof = std::stod(row[3]);
        CHECK(pof <= prev + 1e-12);
        prev = pof;
    }
    const auto t = cli("single --instance " + inst + " --alpha-grid 0:1:0.25 --method threshold --omega-grid 10");
    REQUIRE(t.code == 0);
    CHECK(rows_of(t.out).size() == 5);
    CHECK(cli("single --instance " + inst + " --alpha-grid 0:2:0.5").code == 2);
    CHECK(cli("single --instance " + inst + " --method simplex").code == 2);
}

TEST_CASE("pos") {
    TempDir dir;
    const auto inst = gen_baseline(dir);
    const auto r = cli("pos --instance " + inst + " --alpha-grid 0:1:0.1 --omega-grid 1,10");
    REQUIRE(r.code == 0);
    CHECK(csv_schema::check(r.out, csv_schema::pos()).errors.empty());
    const auto rows = rows_of(r.out);
    REQUIRE(rows.size() == 22);
    for (const auto& row : rows) {
        if (row[4].empty()) continue;
        const double pos = std::stod(row[4]);
        CHECK(pos >= 0.0);
        CHECK(pos <= 1.0);
    }
    CHECK(cli("pos --instance " + inst + " --omega-grid 0").code == 2);
}

TEST_CASE("multi") {
    TempDir dir;
    const auto inst = gen_baseline(dir);
    const std::string base = "multi --instance " + inst + " --n 2000 --steps 10 --seed 7 --policy ";
    for (const char* p : {"myopic", "investment", "simple-investment", "threshold-fair", "zero-gap-lp"}) {
        const auto a = cli(base + p);
        const auto b = cli(base + p);
        REQUIRE(a.code == 0);
        CHECK(a.out == b.out);
        const auto s = csv_schema::check(a.out, csv_schema::traj());
        CHECK(s.errors.empty());
        CHECK(s.rows == 10 + 2 * 10);
    }
    CHECK(cli(base + "greedy").code == 2);
    CHECK(cli("multi --instance " + inst + " --n 0").code == 2);
    CHECK(cli("multi --instance " + inst + " --seeds 1,x").code == 2);
}

TEST_CASE("lb") {
    TempDir dir;
    const auto g = cli("lb general --alpha 0.3 --eps 0.01 --out " + dir.path.string());
    REQUIRE(g.code == 0);
    const auto gj = json::parse(g.out);
    CHECK(gj["pof"].get<double>() >= 0.66);
    CHECK(fs::exists(dir / "instance.json"));
    CHECK(json::parse(fairsel::read_text_file(dir / "pof.json")) == gj);

    const auto t = cli("lb tv --alpha 0.3 --eps 0.01 --out " + dir.path.string());
    REQUIRE(t.code == 0);
    const auto tj = json::parse(t.out);
    CHECK(std::abs(tj["tv_distance"].get<double>() - 0.01) <= 1e-12);
    CHECK(tj["c4_max_selection"].get<double>() == 0.0);
    CHECK(tj["non_degrading"] == true);

    CHECK(cli("lb general --alpha 0.3").code == 2);
    CHECK(cli("lb cubic --alpha 0.3 --eps 0.01").code == 2);
    CHECK(cli("lb general --alpha 0.3 --eps 2").code == 2);
}

TEST_CASE("presets write schema-conformant files") {
    TempDir dir;
    const auto check_file = [](const std::string& path) {
        const auto text = fairsel::read_text_file(path);
        const auto name = fs::path(path).filename().string();
        if (name == "instance.json") {
            CHECK_NOTHROW(fairsel::instance_from_json(text));
            return;
        }
        const auto cols = name.rfind("pof", 0) == 0    ? csv_schema::pof()
                          : name.rfind("pos", 0) == 0  ? csv_schema::pos()
                                                       : csv_schema::traj();
        const auto r = csv_schema::check(text, cols);
        INFO(path);
        CHECK(r.errors.empty());
        CHECK(r.rows > 0);
    };
    for (const auto& name : fairsel::preset_names()) {
        const auto out = dir / name;
        fs::create_directories(out);
        const std::string extra = name.rfind("fig2", 0) == 0 || name.rfind("fig4", 0) == 0 ? " --n 500 --steps 5" : "";
        const auto r = cli("preset " + name + " --out " + out + extra);
        INFO(name);
        REQUIRE(r.code == 0);
        std::istringstream lines(r.out);
        std::string path;
        int files = 0;
        while (std::getline(lines, path)) {
            ++files;
            check_file(path);
        }
        CHECK(files >= 2);
    }
    CHECK(cli("preset fig9").code == 2);
}
