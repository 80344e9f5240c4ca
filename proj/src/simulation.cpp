#include "fedgrid/simulation.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace fedgrid {

namespace {

constexpr int kMaxMonths = 255;  // period is a u8 on the wire
constexpr int kMaxTicksPerMonth = 744;

struct HouseSeries {
    std::vector<double> consumed_kwh;
    std::vector<double> produced_kwh;
};

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return mix64(seed ^ mix64(stream)); }

// readings indexed [month-1][house position in scenario.houses]
std::vector<std::vector<MeterReading>> readings_by_month(const Scenario& scenario, const SimulationOptions& options)
{
    std::vector<std::vector<MeterReading>> months(static_cast<std::size_t>(options.months));
    if (!options.ingested) {
        for (int i = 1; i <= options.months; ++i) {
            auto generated = generate_readings(scenario, calendar_month(i));
            for (auto& r : generated)
                r.period = i;
            months[static_cast<std::size_t>(i - 1)] = std::move(generated);
        }
        return months;
    }

    std::map<HouseId, std::size_t> position;
    for (std::size_t i = 0; i < scenario.houses.size(); ++i)
        position.emplace(scenario.houses[i].id, i);
    for (auto& m : months)
        m.resize(scenario.houses.size());
    std::vector<std::vector<bool>> seen(months.size(), std::vector<bool>(scenario.houses.size(), false));

    for (const auto& r : *options.ingested) {
        if (r.period < 1 || r.period > options.months)
            continue;
        const auto it = position.find(r.house_id);
        if (it == position.end())
            throw SimulationError("readings", "reading for unknown house " + std::to_string(r.house_id));
        const auto m = static_cast<std::size_t>(r.period - 1);
        if (seen[m][it->second])
            throw SimulationError("readings", "duplicate reading for house " + std::to_string(r.house_id) +
                                                  " month " + std::to_string(r.period));
        seen[m][it->second] = true;
        months[m][it->second] = r;
    }
    for (std::size_t m = 0; m < months.size(); ++m) {
        const auto missing = std::find(seen[m].begin(), seen[m].end(), false);
        if (missing != seen[m].end()) {
            const auto house = scenario.houses[static_cast<std::size_t>(missing - seen[m].begin())].id;
            throw SimulationError("readings", "no reading for house " + std::to_string(house) + " month " +
                                                  std::to_string(m + 1));
        }
    }
    return months;
}

std::vector<ForecastLine> forecast_next_year(const Scenario& scenario, std::span<const MeterReading> readings,
                                             std::span<const std::string> client_groups, int months,
                                             const ModelState& demand, const ModelState& production)
{
    std::set<std::size_t> groups;
    for (const auto& id : client_groups)
        groups.insert(scenario.group_index(id));

    std::map<HouseId, const MeterReading*> last;
    for (const auto& r : readings)
        if (r.period == months)
            last[r.house_id] = &r;

    std::vector<ForecastLine> out;
    for (int k = 1; k <= kMonths; ++k)
        out.push_back({calendar_month(months + k), 0, 0});

    for (const auto& house : scenario.houses) {
        if (!groups.count(house.group))
            continue;
        const MeterReading& r = *last.at(house.id);
        double prev_demand = static_cast<double>(r.consumed) / 1000.0;
        double prev_production = static_cast<double>(r.produced) / 1000.0;
        for (int k = 0; k < kMonths; ++k) {
            const int month = out[static_cast<std::size_t>(k)].month;
            const double d = predict(demand, series_features(month, prev_demand)) * kEnergyScaleKwh;
            const double p = predict(production, series_features(month, prev_production)) * kEnergyScaleKwh;
            out[static_cast<std::size_t>(k)].demand += kwh_to_wh(d);
            out[static_cast<std::size_t>(k)].production += kwh_to_wh(p);
            prev_demand = d;
            prev_production = p;
        }
    }
    return out;
}

} // namespace

void validate(const SimulationOptions& options)
{
    if (options.months < 1 || options.months > kMaxMonths)
        throw ValidationError("months", "must lie in 1..255");
    if (options.ticks_per_month < 1 || options.ticks_per_month > kMaxTicksPerMonth)
        throw ValidationError("ticks_per_month", "must lie in 1..744");
    if (options.fed_clients.empty())
        throw ValidationError("fed_clients", "at least one federated client group is required");
    validate(options.demand_training);
    validate(options.production_training);
}

std::vector<MeterReading> split_reading(const MeterReading& reading, int ticks)
{
    std::vector<MeterReading> parts;
    parts.reserve(static_cast<std::size_t>(ticks));
    const WattHours n = ticks;
    for (WattHours k = 0; k < n; ++k) {
        MeterReading part = reading;
        part.consumed = reading.consumed / n + (k < reading.consumed % n ? 1 : 0);
        part.produced = reading.produced / n + (k < reading.produced % n ? 1 : 0);
        parts.push_back(part);
    }
    return parts;
}

std::vector<EnergyTransaction> contract_orders(std::span<const MeterReading> readings, PriceMilli price,
                                               std::uint64_t tick)
{
    std::vector<EnergyTransaction> orders;
    for (const auto& r : readings) {
        switch (classify_role(r)) {
        case Role::Prosumer: orders.push_back(announce_surplus(r, price, tick)); break;
        case Role::Consumer: orders.push_back(place_demand(r, price, tick)); break;
        case Role::Balanced: break;
        }
    }
    return orders;
}

std::vector<ClientDataset> build_client_datasets(const Scenario& scenario, std::span<const MeterReading> readings,
                                                 std::span<const std::string> client_groups, int months,
                                                 SeriesKind kind)
{
    std::map<HouseId, std::vector<double>> series;
    for (const auto& house : scenario.houses)
        series[house.id].assign(static_cast<std::size_t>(months), 0.0);
    for (const auto& r : readings) {
        if (r.period < 1 || r.period > months)
            continue;
        const WattHours v = kind == SeriesKind::Demand ? r.consumed : r.produced;
        series.at(r.house_id)[static_cast<std::size_t>(r.period - 1)] = static_cast<double>(v) / 1000.0;
    }

    std::vector<ClientDataset> datasets;
    for (const auto& id : client_groups) {
        const std::size_t g = scenario.group_index(id);
        ClientDataset data;
        data.feature_count = kSeriesFeatureCount;
        for (const auto& house : scenario.houses) {
            if (house.group != g)
                continue;
            const WattHours baseline = kind == SeriesKind::Demand ? house.base_consumption : house.base_potential;
            append_series(data, series.at(house.id), static_cast<double>(baseline) / 1000.0);
        }
        datasets.push_back(std::move(data));
    }
    return datasets;
}

RegionReport region_report(const Scenario& scenario, std::span<const MeterReading> readings, int months)
{
    RegionReport report;

    std::vector<WattHours> consumed(scenario.groups.size(), 0);
    std::vector<WattHours> produced(scenario.groups.size(), 0);
    std::vector<MonthTotals> monthly(static_cast<std::size_t>(months));
    for (int m = 0; m < months; ++m)
        monthly[static_cast<std::size_t>(m)].month = m + 1;

    std::map<HouseId, std::size_t> group_of;
    for (const auto& h : scenario.houses)
        group_of.emplace(h.id, h.group);
    for (const auto& r : readings) {
        if (r.period < 1 || r.period > months)
            continue;
        const std::size_t g = group_of.at(r.house_id);
        consumed[g] += r.consumed;
        produced[g] += r.produced;
        monthly[static_cast<std::size_t>(r.period - 1)].consumed += r.consumed;
        monthly[static_cast<std::size_t>(r.period - 1)].produced += r.produced;
    }

    std::vector<PotentialInput> potentials;
    std::vector<ShareInput> shares;
    for (std::size_t g = 0; g < scenario.groups.size(); ++g) {
        const auto& group = scenario.groups[g];
        const std::string size = format_fixed(group.house_size_m2, 2);
        potentials.push_back({group.id, size, group.avg_pv_area_m2 * static_cast<double>(group.house_count),
                              kwh_to_wh(group.monthly_potential_kwh) * group.house_count});
        const WattHours mean_potential = produced[g] / months;
        if (mean_potential > 0)
            shares.push_back({group.id, size, consumed[g] / months, mean_potential});
    }
    report.potentials = potential_report(potentials);
    report.shares = consumption_share_report(shares);

    WattHours total_produced = 0;
    for (const auto& t : monthly) {
        total_produced += t.produced;
        if (auto alert = surplus_alert(t.month, t.produced, t.consumed))
            report.alerts.push_back(*alert);
    }

    if (months >= kMonths) {
        std::vector<MonthTotals> last_year(monthly.end() - kMonths, monthly.end());
        for (auto& t : last_year)
            t.month = calendar_month(t.month);
        report.profit = profit_series(last_year, scenario.unit_price);
    }
    report.co2 = co2_report(static_cast<double>(total_produced) / 1000.0);
    return report;
}

SimulationResult run_simulation(const Scenario& scenario, const SimulationOptions& options)
{
    try {
        validate(options);
        for (const auto& id : options.fed_clients)
            scenario.group_index(id);
    } catch (const ValidationError& e) {
        throw SimulationError("config", e.what());
    }

    SimulationResult result;
    const auto months = readings_by_month(scenario, options);
    const SmartContract contract{scenario.unit_price};

    for (int i = 1; i <= options.months; ++i) {
        const auto& month_readings = months[static_cast<std::size_t>(i - 1)];
        result.readings.insert(result.readings.end(), month_readings.begin(), month_readings.end());

        std::vector<std::vector<MeterReading>> tick_readings(static_cast<std::size_t>(options.ticks_per_month));
        for (const auto& r : month_readings) {
            auto parts = split_reading(r, options.ticks_per_month);
            for (std::size_t k = 0; k < parts.size(); ++k)
                tick_readings[k].push_back(parts[k]);
        }

        for (int k = 0; k < options.ticks_per_month; ++k) {
            const std::uint64_t tick =
                static_cast<std::uint64_t>(i - 1) * static_cast<std::uint64_t>(options.ticks_per_month) +
                static_cast<std::uint64_t>(k) + 1;
            const auto& readings = tick_readings[static_cast<std::size_t>(k)];

            // Everything for the block is prepared before the ledger is touched.
            std::vector<EnergyTransaction> offers;
            std::vector<EnergyTransaction> requests;
            SettlementResult settled;
            try {
                for (auto& tx : contract_orders(readings, contract.unit_price, tick))
                    (tx.kind == TxKind::Offer ? offers : requests).push_back(tx);
                std::vector<EnergyTransaction> orders = offers;
                orders.insert(orders.end(), requests.begin(), requests.end());
                if (const auto violation = check_role_consistency(orders, readings))
                    throw ContractViolation(*violation);
                settled = settle(offers, requests, result.grid, contract);
            } catch (const Error& e) {
                throw SimulationError("contract", "month " + std::to_string(i) + ": " + e.what());
            }

            std::vector<EnergyTransaction> block_txs;
            block_txs.reserve(offers.size() + requests.size() + settled.settlements.size());
            block_txs.insert(block_txs.end(), offers.begin(), offers.end());
            block_txs.insert(block_txs.end(), requests.begin(), requests.end());
            std::sort(block_txs.begin(), block_txs.end(),
                      [](const auto& a, const auto& b) { return a.tx_id < b.tx_id; });
            block_txs.insert(block_txs.end(), settled.settlements.begin(), settled.settlements.end());

            try {
                result.ledger.append(std::move(block_txs), tick);
            } catch (const Error& e) {
                throw SimulationError("ledger", e.what());
            }
            result.grid = std::move(settled.grid);
            result.ticks.push_back({tick, i, settled.flows});
        }
    }

    try {
        result.report = region_report(scenario, result.readings, options.months);
        result.alerts = result.report.alerts;
    } catch (const Error& e) {
        throw SimulationError("report", e.what());
    }

    if (options.train) {
        try {
            const auto demand_data = build_client_datasets(scenario, result.readings, options.fed_clients,
                                                           options.months, SeriesKind::Demand);
            const auto production_data = build_client_datasets(scenario, result.readings, options.fed_clients,
                                                               options.months, SeriesKind::Production);
            FedConfig demand_cfg = options.demand_training;
            FedConfig production_cfg = options.production_training;
            demand_cfg.total_clients = demand_data.size();
            production_cfg.total_clients = production_data.size();
            Rng demand_rng(stream_seed(scenario.seed, 1));
            Rng production_rng(stream_seed(scenario.seed, 2));
            result.demand = run_rounds(demand_cfg, demand_data, demand_rng);
            result.production = run_rounds(production_cfg, production_data, production_rng);
            result.report.forecast = forecast_next_year(scenario, result.readings, options.fed_clients, options.months,
                                                        result.demand->global, result.production->global);
        } catch (const Error& e) {
            throw SimulationError("training", e.what());
        }
    }
    return result;
}

} // namespace fedgrid
