// Command-line driver: single runs, alpha scans, exact references, paper-style
// figure data exports. All quantities in atomic units.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "tdqmc/io.hpp"
#include "tdqmc/model.hpp"
#include "tdqmc/oracle.hpp"
#include "tdqmc/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
    if (needs_config)
        cmd->add_option("--config", args.config_path, "experiment JSON file")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override the run seed");
    cmd->add_option("--threads", args.threads, "worker threads (0 = auto)");
}

tdqmc::Experiment load_experiment(const CommonArgs& args) {
    tdqmc::Experiment exp = tdqmc::experiment_from_json_file(args.config_path);
    if (args.seed) exp.config.seed = *args.seed;
    if (args.threads) {
        exp.config.threads = *args.threads;
    } else if (const char* env = std::getenv("TDQMC_THREADS")) {
        exp.config.threads = std::atoi(env);
    }
    return exp;
}

fs::path ensure_out(const CommonArgs& args) {
    fs::path dir(args.out_dir);
    fs::create_directories(dir);
    return dir;
}

void check_run_validation(const tdqmc::RunResult& result) {
    if (!result.validation_ok)
        throw tdqmc::NumericalError("run failed validation: " + result.validation_message);
}

int cmd_run(const CommonArgs& args) {
    const tdqmc::Experiment exp = load_experiment(args);
    const fs::path dir = ensure_out(args);
    const tdqmc::RunResult result = tdqmc::relax_ground_state(exp.config);
    tdqmc::write_result_json(dir / "result.json", exp, result);
    tdqmc::write_energy_trace_csv(dir / "energy_trace.csv", exp, result);
    std::cout << "E = " << result.energy << " +- " << result.energy_err
              << "  S_L = " << result.linear_entropy << "\n";
    check_run_validation(result);
    return 0;
}

int cmd_scan(const CommonArgs& args) {
    const tdqmc::Experiment exp = load_experiment(args);
    const fs::path dir = ensure_out(args);
    const std::vector<double> alphas = exp.scan ? *exp.scan : tdqmc::default_alpha_grid();
    const tdqmc::ScanResult scan = tdqmc::alpha_scan(exp.config, alphas, exp.scan_common_seed);
    tdqmc::write_alpha_scan_csv(dir / "alpha_scan.csv", exp, scan);
    tdqmc::write_scan_summary_json(dir / "result.json", exp, scan);
    std::cout << "alpha_opt = " << scan.alpha_opt
              << "  E = " << scan.rows[scan.opt_index].energy << "\n";
    if (!scan.note.empty()) std::cout << scan.note << "\n";
    return 0;
}

int cmd_oracle(const CommonArgs& args) {
    const tdqmc::Experiment exp = load_experiment(args);
    const fs::path dir = ensure_out(args);
    const tdqmc::OracleResult oracle = tdqmc::run_oracle(exp);
    tdqmc::write_oracle_json(dir / "oracle.json", exp, oracle);
    std::cout << "oracle E = " << oracle.energy << "  S_L = " << oracle.linear_entropy << "\n";
    return 0;
}

int cmd_compare(const CommonArgs& args) {
    const tdqmc::Experiment exp = load_experiment(args);
    const fs::path dir = ensure_out(args);
    // reuse an oracle reference already in the output directory when its
    // physics hash matches; recompute otherwise
    std::optional<tdqmc::OracleResult> oracle =
        tdqmc::read_oracle_json(dir / "oracle.json", exp);
    if (!oracle) {
        oracle = tdqmc::run_oracle(exp);
        tdqmc::write_oracle_json(dir / "oracle.json", exp, *oracle);
    }
    const std::vector<double> alphas = exp.scan ? *exp.scan : tdqmc::default_alpha_grid();
    const tdqmc::ScanResult scan = tdqmc::alpha_scan(exp.config, alphas, exp.scan_common_seed);
    tdqmc::write_alpha_scan_csv(dir / "alpha_scan.csv", exp, scan);

    const tdqmc::ScanRow& best = scan.rows[scan.opt_index];
    json j;
    j["schema_version"] = 1;
    j["config_hash"] = tdqmc::hash_hex(tdqmc::config_hash(exp));
    j["physics_hash"] = tdqmc::hash_hex(tdqmc::physics_hash(exp));
    j["n_particles"] = exp.config.params.n_particles;
    j["screening"] = exp.config.params.screening;
    j["alpha_opt"] = scan.alpha_opt;
    j["tdqmc_energy"] = best.energy;
    j["tdqmc_energy_err"] = best.energy_err;
    j["tdqmc_entropy"] = best.entropy;
    j["oracle_energy"] = oracle->energy;
    j["oracle_entropy"] = oracle->linear_entropy;
    j["energy_rel_err"] = (best.energy - oracle->energy) / oracle->energy;
    j["entropy_abs_err"] = best.entropy - oracle->linear_entropy;
    std::ofstream out(dir / "compare.json");
    out << j.dump(2) << "\n";
    std::cout << "alpha_opt = " << scan.alpha_opt << "  E = " << best.energy
              << "  oracle = " << oracle->energy
              << "  rel err = " << j["energy_rel_err"].get<double>() * 100.0 << "%\n";
    return 0;
}

int cmd_fig1(const CommonArgs& args) {
    const fs::path dir = ensure_out(args);
    std::ofstream out(dir / "fig1.csv");
    out << "r,v_long_range,v_short_range\n";
    const tdqmc::PhysicalParams pl = tdqmc::long_range(2, 1);
    const tdqmc::PhysicalParams ps = tdqmc::short_range(2, 1);
    for (int i = 0; i <= 300; ++i) {
        const double r = 6.0 * i / 300.0;
        out << tdqmc::format_double(r) << ',' << tdqmc::format_double(pair_potential_r(r, pl))
            << ',' << tdqmc::format_double(pair_potential_r(r, ps)) << "\n";
    }
    std::cout << "wrote fig1.csv\n";
    return 0;
}

int cmd_fig2(const CommonArgs& args) {
    const tdqmc::Experiment exp = load_experiment(args);
    const fs::path dir = ensure_out(args);
    if (exp.config.params.n_particles < 2)
        throw tdqmc::ConfigError("fig2-scatter needs at least 2 particles");
    const tdqmc::RunResult result = tdqmc::relax_ground_state(exp.config);
    std::ofstream out(dir / "scatter.csv");
    out << "# config_hash=" << tdqmc::hash_hex(tdqmc::config_hash(exp)) << "\n";
    out << "# sigma=" << tdqmc::format_double(result.sigma[0])
        << " s=" << tdqmc::format_double(result.s[0]) << "\n";
    const int d = exp.config.params.dimension;
    if (d == 1)
        out << "k,x1,x2\n";
    else
        out << "k,x1,y1,x2,y2\n";
    const int M = exp.config.walkers;
    for (int k = 0; k < M; ++k) {
        out << k;
        for (int i = 0; i < 2; ++i) {
            const auto r = result.clouds[i].walker(k);
            for (int c = 0; c < d; ++c) out << ',' << tdqmc::format_double(r[c]);
        }
        out << "\n";
    }
    check_run_validation(result);
    std::cout << "wrote scatter.csv\n";
    return 0;
}

int cmd_fig3(const CommonArgs& args, const std::string& sweep_path) {
    std::ifstream in(sweep_path);
    if (!in) throw tdqmc::ConfigError("cannot open sweep file: " + sweep_path);
    json sw;
    try {
        in >> sw;
    } catch (const json::exception& e) {
        throw tdqmc::ConfigError(std::string("malformed sweep JSON: ") + e.what());
    }
    if (!sw.contains("base")) throw tdqmc::ConfigError("sweep file needs a 'base' experiment");
    const std::string base_text = sw.at("base").dump();
    std::vector<int> n_values = sw.value("n_values", std::vector<int>{1, 2, 3, 4, 5, 6});
    std::vector<double> a_values = sw.value("a_values", std::vector<double>{0.0, 3.0});
    const int oracle_n_max = sw.value("oracle_n_max", 4);

    const fs::path dir = ensure_out(args);
    std::ofstream out(dir / "fig3.csv");
    out << "dimension,a,n_particles,alpha_opt,energy,energy_err,entropy,s,sigma,"
           "oracle_energy,oracle_entropy\n";
    for (double a : a_values) {
        for (int N : n_values) {
            tdqmc::Experiment exp = tdqmc::experiment_from_json_text(base_text);
            exp.config.params.n_particles = N;
            exp.config.params.screening = a;
            if (args.seed) exp.config.seed = *args.seed;
            if (args.threads) exp.config.threads = *args.threads;
            const std::vector<double> alphas =
                exp.scan ? *exp.scan : tdqmc::default_alpha_grid();
            const tdqmc::ScanResult scan =
                tdqmc::alpha_scan(exp.config, alphas, exp.scan_common_seed);
            const tdqmc::ScanRow& best = scan.rows[scan.opt_index];
            std::string oe = "", os = "";
            const int axes = N * exp.config.params.dimension;
            if (N <= oracle_n_max && axes <= 4) {
                const tdqmc::OracleResult oracle = tdqmc::run_oracle(exp);
                oe = tdqmc::format_double(oracle.energy);
                os = tdqmc::format_double(oracle.linear_entropy);
            }
            out << exp.config.params.dimension << ',' << tdqmc::format_double(a) << ',' << N << ','
                << tdqmc::format_double(scan.alpha_opt) << ',' << tdqmc::format_double(best.energy)
                << ',' << tdqmc::format_double(best.energy_err) << ','
                << tdqmc::format_double(best.entropy) << ',' << tdqmc::format_double(best.s) << ','
                << tdqmc::format_double(best.sigma) << ',' << oe << ',' << os << "\n";
            out.flush();
            std::cout << "d=" << exp.config.params.dimension << " a=" << a << " N=" << N
                      << " alpha_opt=" << scan.alpha_opt << " E=" << best.energy << "\n";
        }
    }
    std::cout << "wrote fig3.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"TDQMC ground-state solver for bosonic quantum dots"};
    app.require_subcommand(1);

    CommonArgs run_args, scan_args, oracle_args, compare_args, fig1_args, fig2_args, fig3_args;
    std::string sweep_path;

    add_common(app.add_subcommand("run", "single relaxation run"), run_args);
    add_common(app.add_subcommand("scan", "alpha scan"), scan_args);
    add_common(app.add_subcommand("oracle", "exact small-system reference"), oracle_args);
    add_common(app.add_subcommand("compare", "scan vs oracle comparison"), compare_args);
    add_common(app.add_subcommand("fig1", "pair-potential curves export"), fig1_args, false);
    add_common(app.add_subcommand("fig2-scatter", "configuration-space walker scatter"),
               fig2_args);
    CLI::App* fig3 = app.add_subcommand("fig3", "full sweep driver (per-N table)");
    fig3->add_option("--sweep", sweep_path, "sweep JSON file")->required();
    add_common(fig3, fig3_args, false);

    try {
        app.parse(argc, argv);
        if (app.got_subcommand("run")) return cmd_run(run_args);
        if (app.got_subcommand("scan")) return cmd_scan(scan_args);
        if (app.got_subcommand("oracle")) return cmd_oracle(oracle_args);
        if (app.got_subcommand("compare")) return cmd_compare(compare_args);
        if (app.got_subcommand("fig1")) return cmd_fig1(fig1_args);
        if (app.got_subcommand("fig2-scatter")) return cmd_fig2(fig2_args);
        if (app.got_subcommand("fig3")) return cmd_fig3(fig3_args, sweep_path);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const tdqmc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const tdqmc::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
