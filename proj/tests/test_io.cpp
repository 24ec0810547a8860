#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tdqmc/io.hpp"

using namespace tdqmc;

TEST_CASE("experiment JSON round-trips losslessly") {
    Experiment exp;
    exp.name = "n3-short";
    exp.config.params = PhysicalParams{3, 1, 3.0, 1.0};
    exp.config.grid = Grid{8.0, 192, 1};
    exp.config.walkers = 250;
    exp.config.dtau = 0.0125;
    exp.config.steps = 900;
    exp.config.alpha = 1.3;
    exp.config.schedule = NoiseSchedule{1.1, 0.2, 1.0};
    exp.config.seed = 987654321;
    exp.scan = std::vector<double>{0.8, 1.0, 1.2};
    exp.scan_common_seed = false;
    exp.oracle_points = 48;

    const std::string text = experiment_to_json_text(exp);
    const Experiment back = experiment_from_json_text(text);
    CHECK(back.name == exp.name);
    CHECK(back.config.params.n_particles == 3);
    CHECK(back.config.params.screening == 3.0);
    CHECK(back.config.grid.points_per_axis == 192);
    CHECK(back.config.walkers == 250);
    CHECK(back.config.dtau == exp.config.dtau);
    CHECK(back.config.alpha == exp.config.alpha);
    CHECK(back.config.schedule.base_amplitude == 1.1);
    CHECK(back.config.seed == exp.config.seed);
    REQUIRE(back.scan.has_value());
    CHECK(back.scan->size() == 3);
    CHECK(!back.scan_common_seed);
    CHECK(back.oracle_points == 48);
    CHECK(config_hash(back) == config_hash(exp));
    CHECK(experiment_to_json_text(back) == text);
}

TEST_CASE("config errors carry field-level messages") {
    CHECK_THROWS_WITH_AS(experiment_from_json_text("{"), doctest::Contains("malformed"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(experiment_from_json_text(R"({"walkers": "many"})"),
                         doctest::Contains("walkers"), ConfigError);
    CHECK_THROWS_WITH_AS(experiment_from_json_text(R"({"mode": "quantum"})"),
                         doctest::Contains("mode"), ConfigError);
    CHECK_THROWS_AS(experiment_from_json_text(R"({"params": {"n_particles": 0}})"), ConfigError);
}

TEST_CASE("physics hash distinguishes physics, ignores run parameters") {
    Experiment a;
    a.config.params = PhysicalParams{2, 1, 0.0, 1.0};
    a.config.grid = Grid{8.0, 128, 1};
    a.config.steps = 600;
    a.config.dtau = 0.02;
    Experiment b = a;
    b.config.seed = 777;
    b.config.walkers = 999;
    CHECK(physics_hash(a) == physics_hash(b));
    CHECK(config_hash(a) != config_hash(b));
    Experiment c = a;
    c.config.params.screening = 3.0;
    CHECK(physics_hash(a) != physics_hash(c));
}

TEST_CASE("default alpha grid spans 0.4 to 2.0 in steps of 0.1") {
    const std::vector<double> g = default_alpha_grid();
    REQUIRE(g.size() == 17);
    CHECK(g.front() == doctest::Approx(0.4));
    CHECK(g.back() == doctest::Approx(2.0));
    for (std::size_t i = 1; i < g.size(); ++i)
        CHECK(g[i] - g[i - 1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("oracle file with mismatched physics is refused") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "tdqmc_io_test";
    fs::create_directories(dir);
    Experiment exp;
    exp.config.params = PhysicalParams{2, 1, 0.0, 1.0};
    exp.config.grid = Grid{8.0, 64, 1};
    exp.config.steps = 600;
    exp.config.dtau = 0.02;
    OracleResult oracle{1.7708, 0.0086, 64};
    write_oracle_json(dir / "oracle.json", exp, oracle);
    const auto back = read_oracle_json(dir / "oracle.json", exp);
    REQUIRE(back.has_value());
    CHECK(back->energy == doctest::Approx(1.7708));

    Experiment other = exp;
    other.config.params.screening = 3.0;
    CHECK_THROWS_AS(read_oracle_json(dir / "oracle.json", other), ConfigError);
    CHECK(!read_oracle_json(dir / "missing.json", exp).has_value());
    fs::remove_all(dir);
}
