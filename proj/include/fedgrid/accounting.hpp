#pragma once

// Energy accounting reports: consumption shares, yearly potentials, monthly
// profit and CO2 reduction. Everything is derived from integer watt-hour
// totals; conversion to kWh happens only when rendering.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedgrid/chain.hpp"
#include "fedgrid/grid_model.hpp"
#include "json.hpp"

namespace fedgrid {

struct ShareRounding {
    int group_decimals = 0;
    int total_decimals = 1;
};

// 100 * consumed / potential. Throws ReportError when potential <= 0.
double consumption_share(double consumed, double potential);

// Half-away-from-zero rounding at the given number of decimals.
double round_to(double value, int decimals);
std::string format_fixed(double value, int decimals);
std::string format_micro(MicroCurrency amount);

std::int64_t yearly_potential(std::int64_t monthly);

struct ShareInput {
    std::string client;
    std::string house_size;
    WattHours consumption = 0;
    WattHours potential = 0;
};

struct ShareLine {
    std::string client;
    std::string house_size;
    WattHours consumption = 0;
    WattHours potential = 0;
    double share = 0.0;          // unrounded percent
    double rounded_share = 0.0;  // at the row's reporting precision
};

struct ConsumptionShareReport {
    std::vector<ShareLine> groups;
    ShareLine total;  // column sums of groups
    ShareRounding rounding;
};

ConsumptionShareReport consumption_share_report(std::span<const ShareInput> rows, ShareRounding rounding = {});

struct PotentialInput {
    std::string client;
    std::string house_size;
    double roof_area_m2 = 0.0;
    WattHours monthly = 0;
};

struct PotentialLine {
    std::string client;
    std::string house_size;
    double roof_area_m2 = 0.0;
    WattHours monthly = 0;
    WattHours yearly = 0;
};

struct PotentialReport {
    std::vector<PotentialLine> groups;
    PotentialLine total;
};

PotentialReport potential_report(std::span<const PotentialInput> rows);

struct MonthTotals {
    int month = 0;
    WattHours produced = 0;
    WattHours consumed = 0;
};

struct ProfitLine {
    int month = 0;
    WattHours production = 0;
    WattHours consumption = 0;
    WattHours gain = 0;
    MicroCurrency profit = 0;
};

struct ProfitSeries {
    PriceMilli unit_price = 0;
    std::vector<ProfitLine> months;  // ordered 1..12

    WattHours total_gain() const noexcept;
};

// Requires exactly one entry per calendar month 1..12; otherwise ReportError
// naming the missing (or repeated) months.
ProfitSeries profit_series(std::span<const MonthTotals> totals, PriceMilli unit_price);
std::string profit_csv(const ProfitSeries& series);

double co2_reduction(double energy_kwh, double factor_tonnes_per_kwh = 6.9e-4);

struct CO2Report {
    double energy_kwh = 0.0;
    double factor = 0.0;
    double reduction_tonnes = 0.0;
    double published_tonnes = 0.0;
    double published_implied_factor = 0.0;
};

// Reduction for the given energy plus the published figure for the surveyed
// region and the emission factor that figure actually implies.
CO2Report co2_report(double energy_kwh, double factor_tonnes_per_kwh = 6.9e-4);

struct ForecastLine {
    int month = 0;
    WattHours demand = 0;
    WattHours production = 0;
};

struct RegionReport {
    PotentialReport potentials;
    ConsumptionShareReport shares;
    std::optional<ProfitSeries> profit;
    CO2Report co2;
    std::vector<SurplusAlert> alerts;
    std::vector<ForecastLine> forecast;
};

nlohmann::json to_json(const ConsumptionShareReport& report);
nlohmann::json to_json(const PotentialReport& report);
nlohmann::json to_json(const ProfitSeries& series);
nlohmann::json to_json(const CO2Report& report);
nlohmann::json to_json(const RegionReport& report);

std::string to_text(const ConsumptionShareReport& report);
std::string to_text(const PotentialReport& report);
std::string to_text(const ProfitSeries& series);
std::string to_text(const CO2Report& report);
std::string to_text(const RegionReport& report);

// Recomputation of the bundled survey tables.
struct CheckLine {
    std::string item;
    std::string expected;
    std::string computed;
    bool match = false;
    std::string note;  // non-empty for a documented discrepancy in the source data
};

struct SurveyCheck {
    std::string table;
    std::vector<CheckLine> lines;

    // True when every line matches or carries a documented note.
    bool reproduced() const noexcept;
};

PotentialReport bundled_potential_report();
ConsumptionShareReport bundled_share_report(ShareRounding rounding = {});
SurveyCheck check_potential_table();
SurveyCheck check_share_table();
std::string to_text(const SurveyCheck& check);
nlohmann::json to_json(const SurveyCheck& check);

} // namespace fedgrid
