#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string cli = TDQMC_CLI_PATH;

int run_cmd(const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("tdqmc_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_config(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

const char* kQuickN1 = R"({
  "name": "quick-n1",
  "params": {"n_particles": 1, "dimension": 1},
  "grid": {"half_extent": 8.0, "points_per_axis": 192},
  "walkers": 150, "dtau": 0.02, "steps": 520, "seed": 11
})";

const char* kQuickN2 = R"({
  "name": "quick-n2",
  "params": {"n_particles": 2, "dimension": 1},
  "grid": {"half_extent": 8.0, "points_per_axis": 128},
  "walkers": 80, "dtau": 0.02, "steps": 520, "seed": 11,
  "scan": [0.8, 1.2]
})";

} // namespace

TEST_CASE("fig1 export: both curves equal 1 at contact") {
    const fs::path dir = fresh_dir("fig1");
    REQUIRE(run_cmd("fig1 --out " + dir.string()) == 0);
    std::ifstream in(dir / "fig1.csv");
    REQUIRE(in.good());
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(header == "r,v_long_range,v_short_range");
    CHECK(first == "0,1,1");
    fs::remove_all(dir);
}

TEST_CASE("run: result files with the harmonic baseline energy" * doctest::timeout(300)) {
    const fs::path dir = fresh_dir("run");
    write_config(dir / "cfg.json", kQuickN1);
    REQUIRE(run_cmd("run --config " + (dir / "cfg.json").string() + " --out " + dir.string()) ==
            0);
    const json res = json::parse(slurp(dir / "result.json"));
    const double e = res.at("energy").get<double>();
    const double err = res.at("energy_err").get<double>();
    CHECK(std::abs(e - 0.5) < 1e-3 + 3 * err);
    CHECK(res.at("validation_ok").get<bool>());
    CHECK(res.contains("config_hash"));
    const std::string trace = slurp(dir / "energy_trace.csv");
    CHECK(trace.find("step,tau,energy,stderr,s,sigma,clamped") != std::string::npos);
    CHECK(trace.find("# config_hash=") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("malformed config exits with code 2") {
    const fs::path dir = fresh_dir("bad");
    write_config(dir / "bad.json", "{\"params\": {\"n_particles\": 0}}");
    CHECK(run_cmd("run --config " + (dir / "bad.json").string()) == 2);
    write_config(dir / "junk.json", "not json");
    CHECK(run_cmd("run --config " + (dir / "junk.json").string()) == 2);
    CHECK(run_cmd("run --config " + (dir / "missing.json").string()) == 2);
    fs::remove_all(dir);
}

TEST_CASE("reruns are byte-identical per seed across worker counts"
          * doctest::timeout(600)) {
    const fs::path dir = fresh_dir("det");
    write_config(dir / "cfg.json", kQuickN2);
    const fs::path out1 = dir / "a", out2 = dir / "b", out3 = dir / "c";
    REQUIRE(run_cmd("run --config " + (dir / "cfg.json").string() + " --threads 1 --out " +
                    out1.string()) == 0);
    REQUIRE(run_cmd("run --config " + (dir / "cfg.json").string() + " --threads 1 --out " +
                    out2.string()) == 0);
    REQUIRE(run_cmd("run --config " + (dir / "cfg.json").string() + " --threads 2 --out " +
                    out3.string()) == 0);
    const std::string t1 = slurp(out1 / "energy_trace.csv");
    CHECK(t1 == slurp(out2 / "energy_trace.csv"));
    CHECK(t1 == slurp(out3 / "energy_trace.csv"));
    fs::remove_all(dir);
}

TEST_CASE("scan emits the alpha table and summary" * doctest::timeout(600)) {
    const fs::path dir = fresh_dir("scan");
    write_config(dir / "cfg.json", kQuickN2);
    REQUIRE(run_cmd("scan --config " + (dir / "cfg.json").string() + " --out " + dir.string()) ==
            0);
    const std::string csv = slurp(dir / "alpha_scan.csv");
    CHECK(csv.find("alpha,energy,stderr,entropy,s,sigma") != std::string::npos);
    const json res = json::parse(slurp(dir / "result.json"));
    CHECK(res.contains("alpha_opt"));
    CHECK(res.at("alpha_meaningful").get<bool>());
    fs::remove_all(dir);
}

TEST_CASE("fig2-scatter writes paired walker coordinates" * doctest::timeout(300)) {
    const fs::path dir = fresh_dir("fig2");
    write_config(dir / "cfg.json", kQuickN2);
    REQUIRE(run_cmd("fig2-scatter --config " + (dir / "cfg.json").string() + " --out " +
                    dir.string()) == 0);
    std::ifstream in(dir / "scatter.csv");
    REQUIRE(in.good());
    std::string line;
    int rows = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.rfind("# sigma=", 0) == 0) header_seen = true;
        if (!line.empty() && line[0] != '#' && line.find("k,") != 0) ++rows;
    }
    CHECK(header_seen);
    CHECK(rows == 80);
    fs::remove_all(dir);
}

TEST_CASE("oracle subcommand writes the exact reference" * doctest::timeout(600)) {
    const fs::path dir = fresh_dir("oracle");
    write_config(dir / "cfg.json", R"({
      "name": "o2", "params": {"n_particles": 2, "dimension": 1},
      "grid": {"half_extent": 8.0, "points_per_axis": 64},
      "walkers": 50, "dtau": 0.02, "steps": 520,
      "oracle": {"points_per_axis": 64}
    })");
    REQUIRE(run_cmd("oracle --config " + (dir / "cfg.json").string() + " --out " +
                    dir.string()) == 0);
    const json res = json::parse(slurp(dir / "oracle.json"));
    CHECK(res.at("energy").get<double>() == doctest::Approx(1.77081).epsilon(1e-4));
    CHECK(res.at("linear_entropy").get<double>() == doctest::Approx(0.00862).epsilon(0.02));
    fs::remove_all(dir);
}
