#pragma once

// In-memory simulation of a region: monthly readings feed the smart contract
// and the ledger, then two federated models (demand, production) are trained
// on the accumulated per-house series and used for a one-year forecast.

#include <optional>
#include <string>
#include <vector>

#include "fedgrid/accounting.hpp"
#include "fedgrid/chain.hpp"
#include "fedgrid/errors.hpp"
#include "fedgrid/fedlearn.hpp"
#include "fedgrid/grid_model.hpp"

namespace fedgrid {

// Error raised by a simulation phase ("readings", "contract", "ledger",
// "training", "report", "output", ...).
class SimulationError : public Error {
public:
    SimulationError(std::string phase, const std::string& what)
        : Error("[" + phase + "] " + what), phase_(std::move(phase)) {}

    const std::string& phase() const noexcept { return phase_; }

private:
    std::string phase_;
};

struct SimulationOptions {
    int months = 12;
    int ticks_per_month = 1;
    std::vector<std::string> fed_clients{"A", "B", "C", "D"};
    FedConfig demand_training{};
    FedConfig production_training{.learning_rate = 0.01};
    bool train = true;
    // When set, readings are taken from here instead of being generated.
    std::optional<std::vector<MeterReading>> ingested;
};

void validate(const SimulationOptions& options);

struct TickRecord {
    std::uint64_t tick = 0;
    int month = 0;
    PeriodFlows flows;
};

struct SimulationResult {
    std::vector<MeterReading> readings;  // one per house and simulated month
    Ledger ledger;
    GridAccount grid;
    std::vector<TickRecord> ticks;
    std::vector<SurplusAlert> alerts;
    std::optional<FedRunResult> demand;
    std::optional<FedRunResult> production;
    RegionReport report;
};

// Splits a reading into `ticks` sub-readings whose energies sum exactly to the original.
std::vector<MeterReading> split_reading(const MeterReading& reading, int ticks);

// Offers and requests for one settlement tick; balanced readings produce nothing.
std::vector<EnergyTransaction> contract_orders(std::span<const MeterReading> readings, PriceMilli price,
                                               std::uint64_t tick);

// Per-client datasets for the chosen groups, built from monthly readings.
enum class SeriesKind { Demand, Production };
std::vector<ClientDataset> build_client_datasets(const Scenario& scenario, std::span<const MeterReading> readings,
                                                 std::span<const std::string> client_groups, int months,
                                                 SeriesKind kind);

SimulationResult run_simulation(const Scenario& scenario, const SimulationOptions& options);

// Region report from readings alone (no training, so no forecast).
RegionReport region_report(const Scenario& scenario, std::span<const MeterReading> readings, int months);

} // namespace fedgrid
