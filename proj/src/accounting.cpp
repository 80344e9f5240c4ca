#include "fedgrid/accounting.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "fedgrid/errors.hpp"
#include "fedgrid/reference_data.hpp"

namespace fedgrid {

namespace {

double to_kwh(WattHours wh) { return static_cast<double>(wh) / 1000.0; }

std::string with_thousands(std::int64_t v)
{
    std::string digits = std::to_string(v < 0 ? -v : v);
    for (int i = static_cast<int>(digits.size()) - 3; i > 0; i -= 3)
        digits.insert(static_cast<std::size_t>(i), ",");
    return (v < 0 ? "-" : "") + digits;
}

nlohmann::json line_json(const ShareLine& l, int decimals)
{
    return {{"client", l.client},
            {"house_size_m2", l.house_size},
            {"consumption_kwh", to_kwh(l.consumption)},
            {"potential_kwh", to_kwh(l.potential)},
            {"share_percent", l.share},
            {"share_reported", format_fixed(l.rounded_share, decimals) + "%"}};
}

nlohmann::json line_json(const PotentialLine& l)
{
    return {{"client", l.client},
            {"house_size_m2", l.house_size},
            {"roof_area_m2", l.roof_area_m2},
            {"monthly_kwh", to_kwh(l.monthly)},
            {"yearly_kwh", to_kwh(l.yearly)}};
}

} // namespace

double consumption_share(double consumed, double potential)
{
    if (!(potential > 0.0))
        throw ReportError("consumption share is undefined for a potential of " + format_fixed(potential, 3));
    if (consumed < 0.0)
        throw ReportError("consumption must be >= 0");
    return 100.0 * consumed / potential;
}

double round_to(double value, int decimals)
{
    const double scale = std::pow(10.0, decimals);
    return std::round(value * scale) / scale;
}

std::string format_fixed(double value, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, round_to(value, decimals));
    return buf;
}

std::string format_micro(MicroCurrency amount)
{
    const bool negative = amount < 0;
    const std::uint64_t magnitude = negative ? 0 - static_cast<std::uint64_t>(amount) : static_cast<std::uint64_t>(amount);
    std::string frac = std::to_string(magnitude % 1'000'000);
    frac.insert(0, 6 - frac.size(), '0');
    return (negative ? "-" : "") + std::to_string(magnitude / 1'000'000) + "." + frac;
}

std::int64_t yearly_potential(std::int64_t monthly) { return 12 * monthly; }

ConsumptionShareReport consumption_share_report(std::span<const ShareInput> rows, ShareRounding rounding)
{
    ConsumptionShareReport report;
    report.rounding = rounding;
    report.total.client = "Total";
    for (const auto& r : rows) {
        ShareLine line{r.client, r.house_size, r.consumption, r.potential, 0.0, 0.0};
        line.share = consumption_share(static_cast<double>(r.consumption), static_cast<double>(r.potential));
        line.rounded_share = round_to(line.share, rounding.group_decimals);
        report.total.consumption += r.consumption;
        report.total.potential += r.potential;
        report.groups.push_back(std::move(line));
    }
    report.total.share =
        consumption_share(static_cast<double>(report.total.consumption), static_cast<double>(report.total.potential));
    report.total.rounded_share = round_to(report.total.share, rounding.total_decimals);
    return report;
}

PotentialReport potential_report(std::span<const PotentialInput> rows)
{
    PotentialReport report;
    report.total.client = "Total";
    for (const auto& r : rows) {
        if (r.monthly < 0)
            throw ReportError("monthly potential for client " + r.client + " is negative");
        report.groups.push_back({r.client, r.house_size, r.roof_area_m2, r.monthly, yearly_potential(r.monthly)});
        report.total.roof_area_m2 += r.roof_area_m2;
        report.total.monthly += r.monthly;
        report.total.yearly += yearly_potential(r.monthly);
    }
    return report;
}

WattHours ProfitSeries::total_gain() const noexcept
{
    WattHours sum = 0;
    for (const auto& m : months)
        sum += m.gain;
    return sum;
}

ProfitSeries profit_series(std::span<const MonthTotals> totals, PriceMilli unit_price)
{
    std::array<const MonthTotals*, kMonths> by_month{};
    std::vector<int> repeated;
    for (const auto& t : totals) {
        if (t.month < 1 || t.month > kMonths)
            throw ReportError("month index " + std::to_string(t.month) + " out of range 1..12");
        auto& slot = by_month[static_cast<std::size_t>(t.month - 1)];
        if (slot)
            repeated.push_back(t.month);
        slot = &t;
    }
    std::vector<int> missing;
    for (int m = 1; m <= kMonths; ++m)
        if (!by_month[static_cast<std::size_t>(m - 1)])
            missing.push_back(m);

    auto list = [](const std::vector<int>& v) {
        std::string s;
        for (const int m : v)
            s += (s.empty() ? "" : ", ") + std::to_string(m);
        return s;
    };
    if (!missing.empty())
        throw ReportError("profit series is missing months: " + list(missing));
    if (!repeated.empty())
        throw ReportError("profit series has repeated months: " + list(repeated));

    ProfitSeries series;
    series.unit_price = unit_price;
    for (int m = 1; m <= kMonths; ++m) {
        const MonthTotals& t = *by_month[static_cast<std::size_t>(m - 1)];
        const WattHours gain = t.produced - t.consumed;
        series.months.push_back({m, t.produced, t.consumed, gain, gain * unit_price});
    }
    return series;
}

std::string profit_csv(const ProfitSeries& series)
{
    std::string out = "month,production_kwh,consumption_kwh,gain_kwh,profit\n";
    for (const auto& m : series.months) {
        out += std::to_string(m.month) + "," + format_kwh(m.production) + "," + format_kwh(m.consumption) + "," +
               format_kwh(m.gain) + "," + format_micro(m.profit) + "\n";
    }
    return out;
}

double co2_reduction(double energy_kwh, double factor_tonnes_per_kwh) { return energy_kwh * factor_tonnes_per_kwh; }

CO2Report co2_report(double energy_kwh, double factor_tonnes_per_kwh)
{
    return {energy_kwh, factor_tonnes_per_kwh, co2_reduction(energy_kwh, factor_tonnes_per_kwh),
            reference::kCo2PrintedTonnes,
            reference::kCo2PrintedTonnes / static_cast<double>(reference::kShareTotalPotentialKwh)};
}

nlohmann::json to_json(const ConsumptionShareReport& report)
{
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : report.groups)
        groups.push_back(line_json(g, report.rounding.group_decimals));
    return {{"groups", groups},
            {"total", line_json(report.total, report.rounding.total_decimals)},
            {"rounding", {{"group_decimals", report.rounding.group_decimals},
                          {"total_decimals", report.rounding.total_decimals}}}};
}

nlohmann::json to_json(const PotentialReport& report)
{
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : report.groups)
        groups.push_back(line_json(g));
    return {{"groups", groups}, {"total", line_json(report.total)}};
}

nlohmann::json to_json(const ProfitSeries& series)
{
    nlohmann::json months = nlohmann::json::array();
    for (const auto& m : series.months) {
        months.push_back({{"month", m.month},
                          {"production_kwh", to_kwh(m.production)},
                          {"consumption_kwh", to_kwh(m.consumption)},
                          {"gain_kwh", to_kwh(m.gain)},
                          {"profit", format_micro(m.profit)}});
    }
    return {{"unit_price", static_cast<double>(series.unit_price) / 1000.0},
            {"months", months},
            {"total_gain_kwh", to_kwh(series.total_gain())}};
}

nlohmann::json to_json(const CO2Report& report)
{
    return {{"energy_kwh", report.energy_kwh},
            {"factor_t_per_kwh", report.factor},
            {"reduction_t", report.reduction_tonnes},
            {"published_reduction_t", report.published_tonnes},
            {"published_implied_factor_t_per_kwh", report.published_implied_factor},
            {"note", "published reduction for 3,867,502 kWh is 2,320.5012 t, which implies 6.0e-4 t/kWh; "
                     "this report applies the stated 6.9e-4 t/kWh"}};
}

nlohmann::json to_json(const RegionReport& report)
{
    nlohmann::json alerts = nlohmann::json::array();
    for (const auto& a : report.alerts)
        alerts.push_back({{"period", a.period}, {"surplus_kwh", to_kwh(a.surplus)}});
    nlohmann::json forecast = nlohmann::json::array();
    for (const auto& f : report.forecast) {
        forecast.push_back(
            {{"month", f.month}, {"demand_kwh", to_kwh(f.demand)}, {"production_kwh", to_kwh(f.production)}});
    }
    nlohmann::json out = {{"potentials", to_json(report.potentials)},
                          {"consumption_shares", to_json(report.shares)},
                          {"co2", to_json(report.co2)},
                          {"alerts", alerts},
                          {"forecast", forecast}};
    out["profit"] = report.profit ? to_json(*report.profit) : nlohmann::json(nullptr);
    return out;
}

std::string to_text(const ConsumptionShareReport& report)
{
    std::ostringstream os;
    os << "Consumption share\n";
    os << std::left << std::setw(8) << "Client" << std::setw(12) << "Size(m2)" << std::right << std::setw(18)
       << "Consumption kWh" << std::setw(18) << "Potential kWh" << std::setw(12) << "% consumed" << "\n";
    auto row = [&](const ShareLine& l, int decimals) {
        os << std::left << std::setw(8) << l.client << std::setw(12) << l.house_size << std::right << std::setw(18)
           << format_kwh(l.consumption) << std::setw(18) << format_kwh(l.potential) << std::setw(11)
           << format_fixed(l.rounded_share, decimals) << "%\n";
    };
    for (const auto& g : report.groups)
        row(g, report.rounding.group_decimals);
    row(report.total, report.rounding.total_decimals);
    return os.str();
}

std::string to_text(const PotentialReport& report)
{
    std::ostringstream os;
    os << "Solar production potential\n";
    os << std::left << std::setw(8) << "Client" << std::setw(12) << "Size(m2)" << std::right << std::setw(12)
       << "Roof m2" << std::setw(18) << "Monthly kWh" << std::setw(20) << "Yearly kWh" << "\n";
    auto row = [&](const PotentialLine& l) {
        os << std::left << std::setw(8) << l.client << std::setw(12) << l.house_size << std::right << std::setw(12)
           << format_fixed(l.roof_area_m2, 0) << std::setw(18) << format_kwh(l.monthly) << std::setw(20)
           << format_kwh(l.yearly) << "\n";
    };
    for (const auto& g : report.groups)
        row(g);
    row(report.total);
    return os.str();
}

std::string to_text(const ProfitSeries& series)
{
    std::ostringstream os;
    os << "Production vs consumption (unit price " << format_fixed(static_cast<double>(series.unit_price) / 1000.0, 3)
       << ")\n";
    os << std::setw(6) << "Month" << std::setw(18) << "Production kWh" << std::setw(18) << "Consumption kWh"
       << std::setw(18) << "Gain kWh" << std::setw(20) << "Profit" << "\n";
    for (const auto& m : series.months) {
        os << std::setw(6) << m.month << std::setw(18) << format_kwh(m.production) << std::setw(18)
           << format_kwh(m.consumption) << std::setw(18) << format_kwh(m.gain) << std::setw(20)
           << format_micro(m.profit) << "\n";
    }
    return os.str();
}

std::string to_text(const CO2Report& report)
{
    std::ostringstream os;
    os << "CO2 reduction\n"
       << "  energy            " << format_fixed(report.energy_kwh, 3) << " kWh\n"
       << "  factor            " << report.factor << " t/kWh\n"
       << "  reduction         " << format_fixed(report.reduction_tonnes, 4) << " t\n"
       << "  note: the published reduction for 3,867,502 kWh is " << format_fixed(report.published_tonnes, 4)
       << " t,\n"
       << "        which implies " << report.published_implied_factor
       << " t/kWh rather than the stated factor; the stated factor is applied here.\n";
    return os.str();
}

std::string to_text(const RegionReport& report)
{
    std::ostringstream os;
    os << to_text(report.potentials) << "\n" << to_text(report.shares) << "\n";
    if (report.profit)
        os << to_text(*report.profit) << "\n";
    else
        os << "Production vs consumption: needs 12 simulated months\n\n";
    os << to_text(report.co2) << "\n";
    os << "Surplus alerts\n";
    for (const auto& a : report.alerts)
        os << "  period " << std::setw(3) << a.period << "  surplus " << format_kwh(a.surplus) << " kWh\n";
    if (!report.forecast.empty()) {
        os << "\nNext-year forecast\n" << std::setw(6) << "Month" << std::setw(18) << "Demand kWh" << std::setw(18)
           << "Production kWh" << "\n";
        for (const auto& f : report.forecast)
            os << std::setw(6) << f.month << std::setw(18) << format_kwh(f.demand) << std::setw(18)
               << format_kwh(f.production) << "\n";
    }
    return os.str();
}

bool SurveyCheck::reproduced() const noexcept
{
    for (const auto& l : lines)
        if (!l.match && l.note.empty())
            return false;
    return true;
}

PotentialReport bundled_potential_report()
{
    std::vector<PotentialInput> rows;
    for (const auto& r : reference::kPotentialTable)
        rows.push_back({std::string(r.client), std::string(r.house_size), static_cast<double>(r.roof_area_m2),
                        r.monthly_kwh * 1000});
    return potential_report(rows);
}

ConsumptionShareReport bundled_share_report(ShareRounding rounding)
{
    std::vector<ShareInput> rows;
    for (const auto& r : reference::kShareTable)
        rows.push_back({std::string(r.client), std::string(r.house_size), r.consumption_kwh * 1000,
                        r.potential_kwh * 1000});
    return consumption_share_report(rows, rounding);
}

SurveyCheck check_potential_table()
{
    SurveyCheck check{"table4", {}};
    const auto report = bundled_potential_report();
    auto add = [&](std::string item, std::int64_t expected, std::int64_t computed) {
        check.lines.push_back({std::move(item), with_thousands(expected), with_thousands(computed), expected == computed, ""});
    };
    for (std::size_t i = 0; i < report.groups.size(); ++i) {
        const auto& row = reference::kPotentialTable[i];
        add("yearly " + report.groups[i].client, row.yearly_kwh, report.groups[i].yearly / 1000);
    }
    add("total roof area m2", reference::kPotentialTotalRoofM2, std::llround(report.total.roof_area_m2));
    add("total monthly kWh", reference::kPotentialTotalMonthlyKwh, report.total.monthly / 1000);
    add("total yearly kWh", reference::kPotentialTotalYearlyKwh, report.total.yearly / 1000);
    return check;
}

SurveyCheck check_share_table()
{
    SurveyCheck check{"table6", {}};
    const ShareRounding rounding{};
    const auto report = bundled_share_report(rounding);
    for (std::size_t i = 0; i < report.groups.size(); ++i) {
        const auto& g = report.groups[i];
        const std::string computed = format_fixed(g.rounded_share, rounding.group_decimals) + "%";
        const std::string expected(reference::kShareTable[i].printed_share);
        check.lines.push_back({"share " + g.client, expected, computed, computed == expected, ""});
    }
    const std::string total = format_fixed(report.total.rounded_share, rounding.total_decimals) + "%";
    check.lines.push_back(
        {"share Total", std::string(reference::kShareTotalPrinted), total, total == reference::kShareTotalPrinted, ""});

    const auto potential = report.total.potential / 1000;
    check.lines.push_back({"total potential kWh", with_thousands(reference::kShareTotalPotentialKwh),
                           with_thousands(potential), potential == reference::kShareTotalPotentialKwh, ""});
    const auto consumption = report.total.consumption / 1000;
    const bool consumption_match = consumption == reference::kShareTotalConsumptionKwh;
    check.lines.push_back({"total consumption kWh", with_thousands(reference::kShareTotalConsumptionKwh),
                           with_thousands(consumption), consumption_match,
                           consumption_match ? "" : "published total differs from the column sum; column sum used"});
    return check;
}

std::string to_text(const SurveyCheck& check)
{
    std::ostringstream os;
    os << "check " << check.table << "\n";
    for (const auto& l : check.lines) {
        os << "  " << (l.match ? "match   " : "MISMATCH") << "  " << std::left << std::setw(24) << l.item
           << std::right << " expected " << std::setw(14) << l.expected << "  computed " << std::setw(14)
           << l.computed;
        if (!l.note.empty())
            os << "  (" << l.note << ")";
        os << "\n";
    }
    os << "  " << (check.reproduced() ? "reproduced" : "NOT reproduced") << "\n";
    return os.str();
}

nlohmann::json to_json(const SurveyCheck& check)
{
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& l : check.lines) {
        nlohmann::json j = {{"item", l.item}, {"expected", l.expected}, {"computed", l.computed}, {"match", l.match}};
        if (!l.note.empty())
            j["note"] = l.note;
        lines.push_back(std::move(j));
    }
    return {{"table", check.table}, {"lines", lines}, {"reproduced", check.reproduced()}};
}

} // namespace fedgrid
