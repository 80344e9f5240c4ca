#include <charconv>
#include <sstream>

#include "fedgrid/errors.hpp"
#include "fedgrid/grid_model.hpp"

namespace fedgrid {

namespace {

constexpr const char* kHeader = "house_id,month,consumed_kwh,produced_kwh";

std::uint64_t parse_unsigned(std::string_view text, const std::string& what)
{
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw ParseError("invalid " + what + " '" + std::string(text) + "'");
    return value;
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(line.substr(start));
            return parts;
        }
        parts.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

std::string format_kwh(WattHours wh)
{
    const bool negative = wh < 0;
    const std::uint64_t magnitude = negative ? 0 - static_cast<std::uint64_t>(wh) : static_cast<std::uint64_t>(wh);
    std::string frac = std::to_string(magnitude % 1000);
    frac.insert(0, 3 - frac.size(), '0');
    return (negative ? "-" : "") + std::to_string(magnitude / 1000) + "." + frac;
}

// Exact decimal parse: no floating point on the way to watt-hours.
WattHours parse_kwh(const std::string& text)
{
    const std::string_view sv = text;
    const auto dot = sv.find('.');
    const std::string_view whole = sv.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : sv.substr(dot + 1);
    if (frac.size() > 3)
        throw ParseError("energy '" + text + "' has more than 3 fractional digits");
    const std::uint64_t kwh = parse_unsigned(whole, "energy");
    std::uint64_t wh = 0;
    if (!frac.empty()) {
        wh = parse_unsigned(frac, "energy");
        for (std::size_t i = frac.size(); i < 3; ++i)
            wh *= 10;
    } else if (dot != std::string_view::npos) {
        throw ParseError("invalid energy '" + text + "'");
    }
    return static_cast<WattHours>(kwh * 1000 + wh);
}

std::string readings_to_csv(const std::vector<MeterReading>& readings)
{
    std::string out = kHeader;
    out += '\n';
    for (const auto& r : readings) {
        out += std::to_string(r.house_id);
        out += ',';
        out += std::to_string(r.period);
        out += ',';
        out += format_kwh(r.consumed);
        out += ',';
        out += format_kwh(r.produced);
        out += '\n';
    }
    return out;
}

std::vector<MeterReading> readings_from_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("readings CSV is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kHeader)
        throw ParseError("readings CSV header must be '" + std::string(kHeader) + "'");

    std::vector<MeterReading> readings;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto cols = split(line, ',');
        if (cols.size() != 4)
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 columns");
        try {
            MeterReading r;
            r.house_id = parse_unsigned(cols[0], "house_id");
            const auto period = parse_unsigned(cols[1], "month");
            if (period < 1 || period > 255)
                throw ParseError("month out of range");
            r.period = static_cast<int>(period);
            r.consumed = parse_kwh(std::string(cols[2]));
            r.produced = parse_kwh(std::string(cols[3]));
            readings.push_back(r);
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return readings;
}

} // namespace fedgrid
