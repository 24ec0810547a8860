#include "tdqmc/io.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

namespace tdqmc {

using nlohmann::json;

namespace {

RunMode mode_from_string(const std::string& s) {
    if (s == "standard") return RunMode::standard;
    if (s == "local") return RunMode::local_limit;
    if (s == "hartree") return RunMode::hartree;
    throw ConfigError("mode must be one of standard|local|hartree, got '" + s + "'");
}

std::string mode_to_string(RunMode m) {
    switch (m) {
        case RunMode::standard: return "standard";
        case RunMode::local_limit: return "local";
        case RunMode::hartree: return "hartree";
    }
    return "standard";
}

template <typename T>
T get_field(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("field '" + key + "': " + e.what());
    }
}

json physics_json(const Experiment& exp) {
    return json{{"params",
                 {{"n_particles", exp.config.params.n_particles},
                  {"dimension", exp.config.params.dimension},
                  {"screening", exp.config.params.screening},
                  {"softening", exp.config.params.softening}}},
                {"grid",
                 {{"half_extent", exp.config.grid.half_extent},
                  {"points_per_axis", exp.config.grid.points_per_axis}}},
                {"interaction_enabled", exp.config.interaction_enabled}};
}

json experiment_json(const Experiment& exp) {
    json j = physics_json(exp);
    j["schema_version"] = 1;
    j["name"] = exp.name;
    j["walkers"] = exp.config.walkers;
    j["dtau"] = exp.config.dtau;
    j["steps"] = exp.config.steps;
    j["alpha"] = exp.config.alpha;
    j["mode"] = mode_to_string(exp.config.mode);
    j["schedule"] = {{"base_amplitude", exp.config.schedule.base_amplitude},
                     {"decay_exponent", exp.config.schedule.decay_exponent},
                     {"reference_time", exp.config.schedule.reference_time}};
    j["drift_enabled"] = exp.config.drift_enabled;
    j["exact_potential"] = exp.config.exact_potential;
    j["seed"] = exp.config.seed;
    j["energy_window"] = exp.config.energy_window;
    j["threads"] = exp.config.threads;
    if (exp.scan) j["scan"] = *exp.scan;
    j["scan_common_seed"] = exp.scan_common_seed;
    j["oracle"] = {{"points_per_axis", exp.oracle_points}, {"tol", exp.oracle_tol}};
    return j;
}

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

Experiment experiment_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    const int version = get_field<int>(j, "schema_version", 1);
    if (version != 1) throw ConfigError("unsupported schema_version");

    Experiment exp;
    exp.name = get_field<std::string>(j, "name", "run");
    if (j.contains("params")) {
        const json& p = j.at("params");
        exp.config.params.n_particles = get_field<int>(p, "n_particles", 1);
        exp.config.params.dimension = get_field<int>(p, "dimension", 1);
        exp.config.params.screening = get_field<double>(p, "screening", 0.0);
        exp.config.params.softening = get_field<double>(p, "softening", 1.0);
    }
    const int d = exp.config.params.dimension;
    exp.config.grid.dimension = d;
    exp.config.grid.half_extent = (d == 1) ? 8.0 : 6.0;
    exp.config.grid.points_per_axis = (d == 1) ? 256 : 64;
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        exp.config.grid.half_extent =
            get_field<double>(g, "half_extent", exp.config.grid.half_extent);
        exp.config.grid.points_per_axis =
            get_field<int>(g, "points_per_axis", exp.config.grid.points_per_axis);
    }
    exp.config.walkers = get_field<int>(j, "walkers", d == 1 ? 1000 : 500);
    exp.config.dtau = get_field<double>(j, "dtau", 0.005);
    exp.config.steps = get_field<int>(j, "steps", 4000);
    exp.config.alpha = get_field<double>(j, "alpha", 1.0);
    exp.config.mode = mode_from_string(get_field<std::string>(j, "mode", "standard"));
    if (j.contains("schedule")) {
        const json& s = j.at("schedule");
        exp.config.schedule.base_amplitude = get_field<double>(s, "base_amplitude", 1.0);
        exp.config.schedule.decay_exponent = get_field<double>(s, "decay_exponent", 0.2);
        exp.config.schedule.reference_time = get_field<double>(s, "reference_time", 1.0);
    }
    exp.config.drift_enabled = get_field<bool>(j, "drift_enabled", true);
    exp.config.interaction_enabled = get_field<bool>(j, "interaction_enabled", true);
    exp.config.exact_potential = get_field<bool>(j, "exact_potential", false);
    exp.config.seed = get_field<std::uint64_t>(j, "seed", 1);
    exp.config.energy_window = get_field<int>(j, "energy_window", 0);
    exp.config.threads = get_field<int>(j, "threads", 0);
    if (j.contains("scan")) {
        try {
            exp.scan = j.at("scan").get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("field 'scan': ") + e.what());
        }
    }
    exp.scan_common_seed = get_field<bool>(j, "scan_common_seed", true);
    if (j.contains("oracle")) {
        const json& o = j.at("oracle");
        exp.oracle_points = get_field<int>(o, "points_per_axis", 64);
        exp.oracle_tol = get_field<double>(o, "tol", 1e-8);
    }
    exp.config.validate();
    return exp;
}

Experiment experiment_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return experiment_from_json_text(text);
}

std::string experiment_to_json_text(const Experiment& exp) {
    return experiment_json(exp).dump(2);
}

std::uint64_t config_hash(const Experiment& exp) {
    // worker count must not change output bytes
    json j = experiment_json(exp);
    j.erase("threads");
    return fnv1a(j.dump());
}
std::uint64_t physics_hash(const Experiment& exp) { return fnv1a(physics_json(exp).dump()); }

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> default_alpha_grid() {
    std::vector<double> alphas;
    for (int q = 4; q <= 20; ++q) alphas.push_back(q / 10.0);
    return alphas;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_result_json(const std::filesystem::path& path, const Experiment& exp,
                       const RunResult& result) {
    json j;
    j["schema_version"] = 1;
    j["config"] = json::parse(experiment_to_json_text(exp));
    j["config_hash"] = hash_hex(config_hash(exp));
    j["physics_hash"] = hash_hex(physics_hash(exp));
    j["seed"] = result.seed;
    j["energy"] = result.energy;
    j["energy_err"] = result.energy_err;
    j["linear_entropy"] = result.linear_entropy;
    j["s"] = result.s;
    j["sigma"] = result.sigma;
    j["clamp_count"] = result.clamp_count;
    j["clamp_fraction"] = result.clamp_fraction;
    j["node_count"] = result.node_count;
    j["validation_ok"] = result.validation_ok;
    j["validation_message"] = result.validation_message;
    j["wall_seconds"] = result.wall_seconds;
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

void write_energy_trace_csv(const std::filesystem::path& path, const Experiment& exp,
                            const RunResult& result) {
    std::ofstream out(path);
    out << "# config_hash=" << hash_hex(config_hash(exp)) << "\n";
    out << "step,tau,energy,stderr,s,sigma,clamped\n";
    for (std::size_t t = 0; t < result.trace.size(); ++t) {
        const StepStats& st = result.trace[t];
        out << t << ',' << format_double(st.tau) << ',' << format_double(st.energy) << ','
            << format_double(st.energy_err) << ',' << format_double(st.s_mean) << ','
            << format_double(st.sigma_mean) << ',' << st.clamped << "\n";
    }
}

void write_alpha_scan_csv(const std::filesystem::path& path, const Experiment& exp,
                          const ScanResult& scan) {
    std::ofstream out(path);
    out << "# config_hash=" << hash_hex(config_hash(exp)) << "\n";
    out << "alpha,energy,stderr,entropy,s,sigma\n";
    for (const ScanRow& row : scan.rows) {
        out << format_double(row.alpha) << ',' << format_double(row.energy) << ','
            << format_double(row.energy_err) << ',' << format_double(row.entropy) << ','
            << format_double(row.s) << ',' << format_double(row.sigma) << "\n";
    }
}

void write_scan_summary_json(const std::filesystem::path& path, const Experiment& exp,
                             const ScanResult& scan) {
    json j;
    j["schema_version"] = 1;
    j["config_hash"] = hash_hex(config_hash(exp));
    j["physics_hash"] = hash_hex(physics_hash(exp));
    j["alpha_opt"] = scan.alpha_opt;
    j["alpha_meaningful"] = scan.alpha_meaningful;
    j["nonconvex"] = scan.nonconvex;
    j["note"] = scan.note;
    const ScanRow& best = scan.rows[scan.opt_index];
    j["energy"] = best.energy;
    j["energy_err"] = best.energy_err;
    j["linear_entropy"] = best.entropy;
    j["s"] = best.s;
    j["sigma"] = best.sigma;
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

OracleResult run_oracle(const Experiment& exp) {
    Grid g = exp.config.grid;
    g.points_per_axis = exp.oracle_points;
    const ConfigWave psi = exact_ground_state(exp.config.params, g, exp.oracle_tol);
    OracleResult res;
    res.points_per_axis = exp.oracle_points;
    res.energy = exact_energy(psi, exp.config.params);
    res.linear_entropy = linear_entropy(exact_one_body_rdm(psi));
    return res;
}

void write_oracle_json(const std::filesystem::path& path, const Experiment& exp,
                       const OracleResult& oracle) {
    json j;
    j["schema_version"] = 1;
    j["config_hash"] = hash_hex(config_hash(exp));
    j["physics_hash"] = hash_hex(physics_hash(exp));
    j["energy"] = oracle.energy;
    j["linear_entropy"] = oracle.linear_entropy;
    j["points_per_axis"] = oracle.points_per_axis;
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

std::optional<OracleResult> read_oracle_json(const std::filesystem::path& path,
                                             const Experiment& exp) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed oracle file: " + std::string(e.what()));
    }
    if (get_field<std::string>(j, "physics_hash", "") != hash_hex(physics_hash(exp)))
        throw ConfigError("oracle file physics parameters do not match this config");
    OracleResult res;
    res.energy = get_field<double>(j, "energy", 0.0);
    res.linear_entropy = get_field<double>(j, "linear_entropy", 0.0);
    res.points_per_axis = get_field<int>(j, "points_per_axis", 0);
    return res;
}

} // namespace tdqmc
