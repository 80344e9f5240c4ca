#pragma once

// File-level entry points behind the `fedgrid` command line. Each subcommand
// maps onto one function here.

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fedgrid/simulation.hpp"

namespace fedgrid {

enum class ReportFormat { Json, Text, Csv };

ReportFormat parse_report_format(const std::string& name);

struct RunConfig {
    std::optional<std::filesystem::path> config_path;
    std::optional<std::filesystem::path> readings_path;
    std::filesystem::path out_dir = "fedgrid-run";
    std::optional<std::uint64_t> seed;
    std::optional<int> months;
    std::set<ReportFormat> formats{ReportFormat::Json, ReportFormat::Text, ReportFormat::Csv};
};

// Scenario plus simulation options resolved from a config file. The file is a
// scenario document (groups, irradiance_profile, unit_price, seed,
// noise_amplitude, consumption_profile) with an optional "simulation" object:
//   {months, ticks_per_month, fed_clients, demand_training, production_training}
struct ResolvedRun {
    ScenarioConfig scenario;
    SimulationOptions options;
};

ResolvedRun resolve_run(const RunConfig& config);
SimulationOptions simulation_options_from_json(const nlohmann::json& doc);
FedConfig fed_config_from_json(const nlohmann::json& doc, FedConfig defaults);

struct RunSummary {
    ModelState demand_model;
    ModelState production_model;
    Digest ledger_head{};
    std::size_t ledger_blocks = 0;
    std::vector<SurplusAlert> alerts;
    std::vector<std::filesystem::path> files;
    double wall_seconds = 0.0;
    double simulated_training_seconds = 0.0;
};

// Runs the simulation and writes every output file. On failure nothing is
// left behind in out_dir and a SimulationError names the failing phase.
RunSummary simulate(const RunConfig& config);

// Exit codes for verify.
inline constexpr int kVerifyOk = 0;
inline constexpr int kVerifyTampered = 1;
inline constexpr int kVerifyUnreadable = 2;

struct VerifyOutcome {
    int exit_code = kVerifyOk;
    std::string message;
};

VerifyOutcome verify_ledger(const std::filesystem::path& ledger_path);

// Available tables: table4, table5, table6, profit, co2, alerts, paper-check.
const std::vector<std::string>& report_table_names();

struct ReportOutput {
    std::string content;
    std::optional<std::filesystem::path> written;
    bool reproduced = true;  // paper-check only
};

// Renders `table`. With a run directory, tables are derived from that run and
// also written to <run_dir>/reports/; without one, the bundled survey inputs
// are used. Unknown names raise ReportError listing the available tables.
ReportOutput render_report(const std::optional<std::filesystem::path>& run_dir, const std::string& table,
                           ReportFormat format);

} // namespace fedgrid
