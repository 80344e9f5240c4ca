#pragma once

// Survey tables for the bundled study region, kept verbatim so that
// report generation can be checked against the published figures.

#include <array>
#include <cstdint>
#include <string_view>

namespace fedgrid::reference {

struct PotentialRow {
    std::string_view client;
    std::string_view house_size;
    std::int64_t roof_area_m2;
    std::int64_t monthly_kwh;
    std::int64_t yearly_kwh;
};

// Solar production estimate per client group (region totals below).
inline constexpr std::array<PotentialRow, 5> kPotentialTable{{
    {"E", "Other", 336, 57'265, 687'180},
    {"D", "126.47", 10'200, 718'225, 8'618'700},
    {"C", "177.05", 11'200, 527'145, 6'325'740},
    {"B", "252.93", 10'500, 475'123, 5'701'476},
    {"A", "505.86", 3'600, 1'321'286, 15'855'432},
}};
inline constexpr std::int64_t kPotentialTotalRoofM2 = 35'836;
inline constexpr std::int64_t kPotentialTotalMonthlyKwh = 3'099'044;
inline constexpr std::int64_t kPotentialTotalYearlyKwh = 37'188'528;

struct HouseholdRow {
    std::string_view client;
    double house_size_m2;
    std::int64_t house_count;
    double avg_pv_area_m2;
    std::int64_t consumption_kwh;
    std::int64_t potential_kwh;
};

// Per-house monthly consumption and potential, with house counts and PV areas.
inline constexpr std::array<HouseholdRow, 4> kHouseholdTable{{
    {"D", 126.47, 600, 17.0, 188, 1'187},
    {"C", 177.05, 400, 28.0, 270, 1'930},
    {"B", 252.93, 350, 30.0, 310, 2'112},
    {"A", 505.86, 100, 36.0, 500, 11'909},
}};

struct ShareRow {
    std::string_view client;
    std::string_view house_size;
    std::int64_t consumption_kwh;
    std::int64_t potential_kwh;
    std::string_view printed_share;
};

// Monthly consumption of all houses against monthly potential.
inline constexpr std::array<ShareRow, 4> kShareTable{{
    {"D", "126.47", 111'735, 779'235, "14%"},
    {"C", "177.05", 90'321, 697'786, "13%"},
    {"B", "252.93", 95'290, 595'140, "16%"},
    {"A", "505.86", 56'767, 1'795'341, "3%"},
}};
// Printed totals row. The consumption figure is 31 kWh above the column sum.
inline constexpr std::int64_t kShareTotalConsumptionKwh = 354'144;
inline constexpr std::int64_t kShareTotalPotentialKwh = 3'867'502;
inline constexpr std::string_view kShareTotalPrinted = "9.2%";

// Tonnes of CO2 per kWh of conventional generation.
inline constexpr double kCo2TonnesPerKwh = 6.9e-4;
// Printed reduction for 3,867,502 kWh; equals that energy x 6.0e-4, not x 6.9e-4.
inline constexpr double kCo2PrintedTonnes = 2'320.5012;

struct EmissionEntry {
    std::string_view source;
    std::string_view printed_value;
};

// Reference only; the published units ("%" under a g/kWh heading) are not usable.
inline constexpr std::array<EmissionEntry, 5> kEmissionTable{{
    {"Fossil Fuels", "500%"},
    {"Solar", "95%"},
    {"Wind", "9.2%"},
    {"Hydro", "11%"},
    {"Biogas", "10%"},
}};

} // namespace fedgrid::reference
