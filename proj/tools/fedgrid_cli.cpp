// fedgrid command line.

#include <iostream>

#include "CLI11.hpp"
#include "fedgrid/run.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 64;

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Federated smart-grid simulator with a hash-chained energy ledger"};
    app.require_subcommand(1);

    fedgrid::RunConfig run;
    std::string config_path;
    std::string readings_path;
    std::string out_dir = run.out_dir.string();
    std::uint64_t seed = 0;
    int months = 0;
    std::string format;

    auto* simulate = app.add_subcommand("simulate", "Run a full simulation into an output directory");
    simulate->add_option("--config", config_path, "Scenario/simulation JSON config")->check(CLI::ExistingFile);
    simulate->add_option("--readings", readings_path, "Ingest readings CSV instead of generating")
        ->check(CLI::ExistingFile);
    simulate->add_option("--out", out_dir, "Output directory")->capture_default_str();
    auto* seed_opt = simulate->add_option("--seed", seed, "Override the scenario seed");
    auto* months_opt = simulate->add_option("--months", months, "Months to simulate")->check(CLI::Range(1, 255));
    simulate->add_option("--format", format, "Report format to emit (json|text|csv); default all")
        ->check(CLI::IsMember({"json", "text", "csv"}));

    std::string ledger_path;
    auto* verify = app.add_subcommand("verify", "Check the integrity of an emitted ledger");
    verify->add_option("ledger", ledger_path, "Ledger JSON-lines file")->required();

    std::string table;
    std::string run_dir;
    std::string report_format = "text";
    auto* report = app.add_subcommand("report", "Render a report table");
    report->add_option("table", table, "table4, table5, table6, profit, co2, alerts or paper-check")->required();
    report->add_option("--run", run_dir, "Completed run directory (default: bundled survey inputs)")
        ->check(CLI::ExistingDirectory);
    report->add_option("--format", report_format, "json|text|csv")->check(CLI::IsMember({"json", "text", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*simulate) {
            if (!config_path.empty())
                run.config_path = config_path;
            if (!readings_path.empty())
                run.readings_path = readings_path;
            run.out_dir = out_dir;
            if (*seed_opt)
                run.seed = seed;
            if (*months_opt)
                run.months = months;
            if (!format.empty())
                run.formats = {fedgrid::parse_report_format(format)};

            const auto summary = fedgrid::simulate(run);
            std::cout << "ledger head " << fedgrid::to_hex(summary.ledger_head) << " (" << summary.ledger_blocks
                      << " blocks)\n"
                      << "surplus alerts: " << summary.alerts.size() << "\n"
                      << "simulated training time: " << summary.simulated_training_seconds << " s\n";
            for (const auto& f : summary.files)
                std::cout << "wrote " << f.string() << "\n";
            std::cerr << "wall clock " << summary.wall_seconds << " s\n";
            return 0;
        }

        if (*verify) {
            const auto outcome = fedgrid::verify_ledger(ledger_path);
            (outcome.exit_code == fedgrid::kVerifyOk ? std::cout : std::cerr) << outcome.message << "\n";
            return outcome.exit_code;
        }

        if (*report) {
            std::optional<std::filesystem::path> dir;
            if (!run_dir.empty())
                dir = run_dir;
            const auto out = fedgrid::render_report(dir, table, fedgrid::parse_report_format(report_format));
            std::cout << out.content;
            if (out.written)
                std::cerr << "wrote " << out.written->string() << "\n";
            return out.reproduced ? 0 : kExitFailure;
        }
    } catch (const fedgrid::ReportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
