#pragma once

// Region model: client groups, houses, meter readings, billing arithmetic and
// prosumer/consumer classification.
//
// Energy is carried as integer watt-hours everywhere inside the simulator so
// that ledger conservation checks are exact. kWh only appears at I/O edges.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace fedgrid {

using WattHours = std::int64_t;
using HouseId = std::uint64_t;
// Price in thousandths of a currency unit per kWh.
using PriceMilli = std::int64_t;
// Cash amounts in millionths of a currency unit; Wh x PriceMilli lands here exactly.
using MicroCurrency = std::int64_t;

inline constexpr int kMonths = 12;
using MonthlyProfile = std::array<double, kMonths>;

struct ClientGroup {
    std::string id;
    double house_size_m2 = 0.0;
    std::int64_t house_count = 0;
    double avg_pv_area_m2 = 0.0;
    double monthly_potential_kwh = 0.0;
    double monthly_consumption_kwh = 0.0;
};

struct House {
    HouseId id = 0;
    std::size_t group = 0;  // index into Scenario::groups
    double pv_area_m2 = 0.0;
    WattHours base_consumption = 0;
    WattHours base_potential = 0;
};

struct MeterReading {
    HouseId house_id = 0;
    int period = 1;
    WattHours consumed = 0;
    WattHours produced = 0;

    friend bool operator==(const MeterReading&, const MeterReading&) = default;
};

enum class Role { Prosumer, Consumer, Balanced };

const char* to_string(Role role) noexcept;

struct ScenarioConfig {
    std::vector<ClientGroup> groups;
    MonthlyProfile irradiance_profile{};
    MonthlyProfile consumption_profile{};
    double unit_price = 0.0;
    std::uint64_t seed = 0;
    double noise_amplitude = 0.0;
};

struct Scenario {
    std::vector<ClientGroup> groups;
    std::vector<House> houses;
    MonthlyProfile irradiance_profile{};
    MonthlyProfile consumption_profile{};
    PriceMilli unit_price = 0;
    std::uint64_t seed = 0;
    double noise_amplitude = 0.0;

    const ClientGroup& group_of(const House& house) const { return groups.at(house.group); }
    // Index of the group with the given id; throws ValidationError if absent.
    std::size_t group_index(const std::string& id) const;
};

// Default irradiance and consumption multipliers for the bundled region.
MonthlyProfile default_irradiance_profile();
MonthlyProfile default_consumption_profile();

// Bundled survey region: five groups (D, C, B, A, E) with the house counts,
// rooftop PV areas and per-house monthly figures of the field study.
ScenarioConfig default_scenario_config();

ScenarioConfig scenario_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ScenarioConfig& config);

// Validates config and enumerates houses; ids start at 1 (0 is reserved for the grid).
Scenario build_scenario(const ScenarioConfig& config);

double monthly_watt_hours(double load_watts, double hours_per_day, double days);
double units_consumed(double total_watt_hours);
double billing_cost(double units, double unit_price);

Role classify_role(const MeterReading& reading) noexcept;

// One reading per house for calendar month 1..12. Pure in (scenario, month).
std::vector<MeterReading> generate_readings(const Scenario& scenario, int month);

// Calendar month (1..12) of a 1-based simulated month index.
constexpr int calendar_month(int period) noexcept { return (period - 1) % kMonths + 1; }

WattHours kwh_to_wh(double kwh);
PriceMilli price_to_milli(double price);

// Readings CSV: house_id,month,consumed_kwh,produced_kwh with three fractional digits.
std::string format_kwh(WattHours wh);
WattHours parse_kwh(const std::string& text);
std::string readings_to_csv(const std::vector<MeterReading>& readings);
std::vector<MeterReading> readings_from_csv(const std::string& text);

} // namespace fedgrid
