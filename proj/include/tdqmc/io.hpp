#ifndef TDQMC_IO_HPP
#define TDQMC_IO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tdqmc/oracle.hpp"
#include "tdqmc/solver.hpp"

namespace tdqmc {

// Experiment = run configuration + optional alpha-scan list + oracle options,
// serialized as versioned JSON.
struct Experiment {
    std::string name = "run";
    RunConfig config;
    std::optional<std::vector<double>> scan;  // alpha grid for `scan`
    bool scan_common_seed = true;
    int oracle_points = 64;   // oracle grid override (per axis)
    double oracle_tol = 1e-8;
};

Experiment experiment_from_json_file(const std::filesystem::path& path);
Experiment experiment_from_json_text(const std::string& text);
std::string experiment_to_json_text(const Experiment& exp);

// FNV-1a over the canonical serialized config; physics_hash covers only the
// (params, grid) subset that `compare` refuses to join across.
std::uint64_t config_hash(const Experiment& exp);
std::uint64_t physics_hash(const Experiment& exp);
std::string hash_hex(std::uint64_t h);

// Default alpha grid 0.4 .. 2.0 in steps of 0.1.
std::vector<double> default_alpha_grid();

// Output writers. Every file embeds the config hash. CSV: header row,
// '.' decimal separator, locale-independent.
void write_result_json(const std::filesystem::path& path, const Experiment& exp,
                       const RunResult& result);
void write_energy_trace_csv(const std::filesystem::path& path, const Experiment& exp,
                            const RunResult& result);
void write_alpha_scan_csv(const std::filesystem::path& path, const Experiment& exp,
                          const ScanResult& scan);
void write_scan_summary_json(const std::filesystem::path& path, const Experiment& exp,
                             const ScanResult& scan);

struct OracleResult {
    double energy = 0.0;
    double linear_entropy = 0.0;
    int points_per_axis = 0;
};
OracleResult run_oracle(const Experiment& exp);
void write_oracle_json(const std::filesystem::path& path, const Experiment& exp,
                       const OracleResult& oracle);
// Returns nullopt when the file is missing; throws ConfigError when the
// physics hash does not match the experiment.
std::optional<OracleResult> read_oracle_json(const std::filesystem::path& path,
                                             const Experiment& exp);

std::string format_double(double v);  // locale-free shortest round-trip

} // namespace tdqmc

#endif
