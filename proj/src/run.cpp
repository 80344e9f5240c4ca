#include "fedgrid/run.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "fedgrid/reference_data.hpp"

namespace fedgrid {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write " + path.string());
    out << content;
    if (!out)
        throw Error("failed writing " + path.string());
}

nlohmann::json parse_json_file(const fs::path& path)
{
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

nlohmann::json model_json(const ModelState& m)
{
    return {{"weights", m.weights}, {"sample_count", m.sample_count}};
}

std::string trace_jsonl(const FedRunResult& run, std::span<const std::string> clients)
{
    std::string out;
    for (const auto& r : run.trace) {
        nlohmann::json selected = nlohmann::json::array();
        for (const auto j : r.selected_clients)
            selected.push_back(clients[j]);
        out += nlohmann::json{{"round", r.round},
                              {"selected_clients", selected},
                              {"global_loss", r.global_loss},
                              {"t_global_seconds", r.global_seconds}}
                   .dump();
        out += '\n';
    }
    return out;
}

std::string forecast_csv(const std::vector<ForecastLine>& forecast)
{
    std::string out = "month,demand_kwh,production_kwh\n";
    for (const auto& f : forecast)
        out += std::to_string(f.month) + "," + format_kwh(f.demand) + "," + format_kwh(f.production) + "\n";
    return out;
}

double total_seconds(const FedRunResult& run)
{
    double sum = 0.0;
    for (const auto& t : run.timings)
        sum += t.global_seconds;
    return sum;
}

// Writes into a staging directory and only moves files into place once all of
// them exist, so a failed run leaves out_dir as it was.
class StagedOutput {
public:
    explicit StagedOutput(fs::path out_dir) : out_dir_(std::move(out_dir)), created_(!fs::exists(out_dir_))
    {
        fs::create_directories(out_dir_);
        staging_ = out_dir_ / ".fedgrid-staging";
        fs::remove_all(staging_);
        fs::create_directories(staging_);
    }

    StagedOutput(const StagedOutput&) = delete;
    StagedOutput& operator=(const StagedOutput&) = delete;

    ~StagedOutput()
    {
        std::error_code ec;
        fs::remove_all(staging_, ec);
        if (!committed_ && created_)
            fs::remove_all(out_dir_, ec);
    }

    void add(const std::string& name, const std::string& content)
    {
        write_file(staging_ / name, content);
        names_.push_back(name);
    }

    std::vector<fs::path> commit()
    {
        std::vector<fs::path> paths;
        for (const auto& name : names_) {
            fs::rename(staging_ / name, out_dir_ / name);
            paths.push_back(out_dir_ / name);
        }
        committed_ = true;
        return paths;
    }

private:
    fs::path out_dir_;
    fs::path staging_;
    bool created_ = false;
    bool committed_ = false;
    std::vector<std::string> names_;
};

std::string table5_text(const ScenarioConfig& config)
{
    std::ostringstream os;
    os << "Per-house monthly consumption and potential\n";
    os << "Client  Size(m2)    Houses   Consumption kWh   Potential kWh\n";
    for (const auto& g : config.groups) {
        char line[160];
        std::snprintf(line, sizeof line, "%-7s %-10s %7lld %17s %15s\n", g.id.c_str(),
                      format_fixed(g.house_size_m2, 2).c_str(), static_cast<long long>(g.house_count),
                      format_kwh(kwh_to_wh(g.monthly_consumption_kwh)).c_str(),
                      format_kwh(kwh_to_wh(g.monthly_potential_kwh)).c_str());
        os << line;
    }
    return os.str();
}

nlohmann::json table5_json(const ScenarioConfig& config)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& g : config.groups) {
        rows.push_back({{"client", g.id},
                        {"house_size_m2", g.house_size_m2},
                        {"house_count", g.house_count},
                        {"consumption_kwh", g.monthly_consumption_kwh},
                        {"potential_kwh", g.monthly_potential_kwh}});
    }
    return {{"groups", rows}};
}

std::string table5_csv(const ScenarioConfig& config)
{
    std::string out = "client,house_size_m2,house_count,consumption_kwh,potential_kwh\n";
    for (const auto& g : config.groups)
        out += g.id + "," + format_fixed(g.house_size_m2, 2) + "," + std::to_string(g.house_count) + "," +
               format_kwh(kwh_to_wh(g.monthly_consumption_kwh)) + "," +
               format_kwh(kwh_to_wh(g.monthly_potential_kwh)) + "\n";
    return out;
}

std::string potential_csv(const PotentialReport& r)
{
    std::string out = "client,house_size_m2,roof_area_m2,monthly_kwh,yearly_kwh\n";
    auto row = [&](const PotentialLine& l) {
        out += l.client + "," + l.house_size + "," + format_fixed(l.roof_area_m2, 2) + "," + format_kwh(l.monthly) +
               "," + format_kwh(l.yearly) + "\n";
    };
    for (const auto& g : r.groups)
        row(g);
    row(r.total);
    return out;
}

std::string share_csv(const ConsumptionShareReport& r)
{
    std::string out = "client,house_size_m2,consumption_kwh,potential_kwh,share_percent\n";
    auto row = [&](const ShareLine& l, int decimals) {
        out += l.client + "," + l.house_size + "," + format_kwh(l.consumption) + "," + format_kwh(l.potential) + "," +
               format_fixed(l.rounded_share, decimals) + "\n";
    };
    for (const auto& g : r.groups)
        row(g, r.rounding.group_decimals);
    row(r.total, r.rounding.total_decimals);
    return out;
}

std::string co2_csv(const CO2Report& r)
{
    return "energy_kwh,factor_t_per_kwh,reduction_t,published_reduction_t,published_implied_factor\n" +
           format_fixed(r.energy_kwh, 3) + "," + format_fixed(r.factor, 6) + "," + format_fixed(r.reduction_tonnes, 6) +
           "," + format_fixed(r.published_tonnes, 4) + "," + format_fixed(r.published_implied_factor, 6) + "\n";
}

std::string alerts_text(const std::vector<SurplusAlert>& alerts)
{
    std::string out = "Surplus alerts\n";
    for (const auto& a : alerts)
        out += "  period " + std::to_string(a.period) + "  surplus " + format_kwh(a.surplus) + " kWh\n";
    return out;
}

std::string alerts_csv(const std::vector<SurplusAlert>& alerts)
{
    std::string out = "period,surplus_kwh\n";
    for (const auto& a : alerts)
        out += std::to_string(a.period) + "," + format_kwh(a.surplus) + "\n";
    return out;
}

nlohmann::json alerts_json(const std::vector<SurplusAlert>& alerts)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& a : alerts)
        out.push_back({{"period", a.period}, {"surplus_kwh", static_cast<double>(a.surplus) / 1000.0}});
    return out;
}

const char* extension(ReportFormat f)
{
    switch (f) {
    case ReportFormat::Json: return "json";
    case ReportFormat::Text: return "txt";
    case ReportFormat::Csv: return "csv";
    }
    return "out";
}

std::string render(ReportFormat f, const nlohmann::json& json, const std::string& text, const std::string& csv)
{
    switch (f) {
    case ReportFormat::Json: return json.dump(2) + "\n";
    case ReportFormat::Text: return text;
    case ReportFormat::Csv: return csv;
    }
    return text;
}

} // namespace

ReportFormat parse_report_format(const std::string& name)
{
    if (name == "json")
        return ReportFormat::Json;
    if (name == "text")
        return ReportFormat::Text;
    if (name == "csv")
        return ReportFormat::Csv;
    throw ValidationError("format", "must be one of json, text, csv (got '" + name + "')");
}

FedConfig fed_config_from_json(const nlohmann::json& doc, FedConfig cfg)
{
    if (!doc.is_object())
        throw ValidationError("training", "must be an object");
    auto num = [&](const char* key, auto& target) {
        if (!doc.contains(key))
            return;
        if (!doc.at(key).is_number())
            throw ValidationError(key, "must be a number");
        target = doc.at(key).get<std::remove_reference_t<decltype(target)>>();
    };
    num("participation_rate", cfg.participation_rate);
    num("rounds", cfg.rounds);
    num("local_epochs", cfg.local_epochs);
    num("batch_size", cfg.batch_size);
    num("learning_rate", cfg.learning_rate);
    num("round_delay", cfg.round_delay);
    num("server_seconds", cfg.server_seconds);
    num("local_seconds", cfg.local_seconds);
    return cfg;
}

SimulationOptions simulation_options_from_json(const nlohmann::json& doc)
{
    SimulationOptions options;
    if (!doc.is_object())
        throw ValidationError("simulation", "must be an object");
    if (doc.contains("months"))
        options.months = doc.at("months").get<int>();
    if (doc.contains("ticks_per_month"))
        options.ticks_per_month = doc.at("ticks_per_month").get<int>();
    if (doc.contains("fed_clients"))
        options.fed_clients = doc.at("fed_clients").get<std::vector<std::string>>();
    if (doc.contains("demand_training"))
        options.demand_training = fed_config_from_json(doc.at("demand_training"), options.demand_training);
    if (doc.contains("production_training"))
        options.production_training = fed_config_from_json(doc.at("production_training"), options.production_training);
    return options;
}

ResolvedRun resolve_run(const RunConfig& config)
{
    ResolvedRun run{default_scenario_config(), SimulationOptions{}};
    try {
        if (config.config_path) {
            const auto doc = parse_json_file(*config.config_path);
            run.scenario = scenario_config_from_json(doc);
            if (doc.contains("simulation"))
                run.options = simulation_options_from_json(doc.at("simulation"));
        }
        if (config.seed)
            run.scenario.seed = *config.seed;
        if (config.months)
            run.options.months = *config.months;
        if (config.readings_path)
            run.options.ingested = readings_from_csv(read_file(*config.readings_path));
        validate(run.options);
    } catch (const nlohmann::json::exception& e) {
        throw SimulationError("config", e.what());
    } catch (const Error& e) {
        throw SimulationError("config", e.what());
    }
    return run;
}

RunSummary simulate(const RunConfig& config)
{
    const auto started = std::chrono::steady_clock::now();
    const ResolvedRun run = resolve_run(config);

    Scenario scenario;
    try {
        scenario = build_scenario(run.scenario);
    } catch (const Error& e) {
        throw SimulationError("scenario", e.what());
    }

    const SimulationResult result = run_simulation(scenario, run.options);

    RunSummary summary;
    summary.demand_model = result.demand->global;
    summary.production_model = result.production->global;
    summary.ledger_head = result.ledger.head().hash;
    summary.ledger_blocks = result.ledger.size();
    summary.alerts = result.alerts;
    summary.simulated_training_seconds = total_seconds(*result.demand) + total_seconds(*result.production);

    try {
        StagedOutput out(config.out_dir);
        nlohmann::json resolved = to_json(run.scenario);
        resolved["simulation"] = {{"months", run.options.months},
                                  {"ticks_per_month", run.options.ticks_per_month},
                                  {"fed_clients", run.options.fed_clients}};
        out.add("scenario.json", resolved.dump(2) + "\n");
        out.add("readings.csv", readings_to_csv(result.readings));
        out.add("ledger.jsonl", ledger_to_jsonl(result.ledger.blocks()));
        out.add("training_demand.jsonl", trace_jsonl(*result.demand, run.options.fed_clients));
        out.add("training_production.jsonl", trace_jsonl(*result.production, run.options.fed_clients));
        if (config.formats.count(ReportFormat::Json))
            out.add("report.json", to_json(result.report).dump(2) + "\n");
        if (config.formats.count(ReportFormat::Text))
            out.add("report.txt", to_text(result.report));
        if (config.formats.count(ReportFormat::Csv)) {
            if (result.report.profit)
                out.add("profit.csv", profit_csv(*result.report.profit));
            out.add("forecast.csv", forecast_csv(result.report.forecast));
        }
        out.add("summary.json", nlohmann::json{{"ledger_head", to_hex(summary.ledger_head)},
                                               {"ledger_blocks", summary.ledger_blocks},
                                               {"demand_model", model_json(summary.demand_model)},
                                               {"production_model", model_json(summary.production_model)},
                                               {"alerts", alerts_json(summary.alerts)},
                                               {"simulated_training_seconds", summary.simulated_training_seconds}}
                                        .dump(2) +
                                    "\n");
        summary.files = out.commit();
    } catch (const std::exception& e) {
        throw SimulationError("output", e.what());
    }

    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return summary;
}

VerifyOutcome verify_ledger(const fs::path& ledger_path)
{
    std::vector<Block> chain;
    try {
        chain = ledger_from_jsonl(read_file(ledger_path));
    } catch (const ParseError& e) {
        return {kVerifyUnreadable, std::string("unreadable ledger: ") + e.what()};
    }
    const auto report = validate_chain(chain);
    if (!report) {
        std::string where = report.block_index ? "block " + std::to_string(*report.block_index) + ": " : "";
        return {kVerifyTampered, "integrity violation at " + where + report.reason};
    }
    return {kVerifyOk, "ledger valid: " + std::to_string(chain.size()) + " blocks, head " + to_hex(chain.back().hash)};
}

const std::vector<std::string>& report_table_names()
{
    static const std::vector<std::string> names{"table4", "table5", "table6", "profit", "co2", "alerts", "paper-check"};
    return names;
}

ReportOutput render_report(const std::optional<fs::path>& run_dir, const std::string& table, ReportFormat format)
{
    const auto& names = report_table_names();
    if (std::find(names.begin(), names.end(), table) == names.end()) {
        std::string list;
        for (const auto& n : names)
            list += (list.empty() ? "" : ", ") + n;
        throw ReportError("unknown table '" + table + "'; available: " + list);
    }

    ReportOutput output;
    if (table == "paper-check") {
        const auto t4 = check_potential_table();
        const auto t6 = check_share_table();
        output.reproduced = t4.reproduced() && t6.reproduced();
        output.content = render(format, nlohmann::json::array({to_json(t4), to_json(t6)}), to_text(t4) + to_text(t6),
                                to_text(t4) + to_text(t6));
        return output;
    }

    ScenarioConfig scenario_config = default_scenario_config();
    std::optional<RegionReport> run_report;
    if (run_dir) {
        scenario_config = scenario_config_from_json(parse_json_file(*run_dir / "scenario.json"));
        const auto readings = readings_from_csv(read_file(*run_dir / "readings.csv"));
        int months = 0;
        for (const auto& r : readings)
            months = std::max(months, r.period);
        if (months == 0)
            throw ReportError("run directory has no readings");
        run_report = region_report(build_scenario(scenario_config), readings, months);
    }

    if (table == "table4") {
        const auto r = run_report ? run_report->potentials : bundled_potential_report();
        output.content = render(format, to_json(r), to_text(r), potential_csv(r));
    } else if (table == "table5") {
        output.content = render(format, table5_json(scenario_config), table5_text(scenario_config),
                                table5_csv(scenario_config));
    } else if (table == "table6") {
        const auto r = run_report ? run_report->shares : bundled_share_report();
        output.content = render(format, to_json(r), to_text(r), share_csv(r));
    } else if (table == "co2") {
        const auto r = run_report ? run_report->co2
                                  : co2_report(static_cast<double>(reference::kShareTotalPotentialKwh));
        output.content = render(format, to_json(r), to_text(r), co2_csv(r));
    } else if (table == "profit") {
        if (!run_report || !run_report->profit)
            throw ReportError("profit needs a run directory with at least 12 simulated months");
        const auto& r = *run_report->profit;
        output.content = render(format, to_json(r), to_text(r), profit_csv(r));
    } else if (table == "alerts") {
        if (!run_report)
            throw ReportError("alerts needs a run directory");
        output.content = render(format, alerts_json(run_report->alerts), alerts_text(run_report->alerts),
                                alerts_csv(run_report->alerts));
    }

    if (run_dir) {
        const fs::path dir = *run_dir / "reports";
        fs::create_directories(dir);
        const fs::path path = dir / (table + "." + extension(format));
        write_file(path, output.content);
        output.written = path;
    }
    return output;
}

} // namespace fedgrid
