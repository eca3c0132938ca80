#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <compare>
#include <cstdio>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hurricast/common.hpp"

namespace hurricast {

/// Storm identifier, e.g. AL092011 = Atlantic cyclone 9 of season 2011.
struct StormId {
    std::string basin;   // 2-letter basin code
    int cyclone_number;  // 1-99
    int year;            // 4-digit season

    auto operator<=>(const StormId&) const = default;

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%s%02d%04d", basin.c_str(), cyclone_number, year);
        return buf;
    }

    static StormId parse(std::string_view text, std::size_t line_no) {
        if (text.size() != 8 || !std::isalpha(static_cast<unsigned char>(text[0])) ||
            !std::isalpha(static_cast<unsigned char>(text[1])))
            throw ParseError("bad storm id '" + std::string(text) + "'", line_no);
        StormId id;
        id.basin = {static_cast<char>(std::toupper(text[0])), static_cast<char>(std::toupper(text[1]))};
        int num = 0, year = 0;
        auto r1 = std::from_chars(text.data() + 2, text.data() + 4, num);
        auto r2 = std::from_chars(text.data() + 4, text.data() + 8, year);
        if (r1.ec != std::errc{} || r2.ec != std::errc{} || num < 1 || num > 99 ||
            year < 1851 || year > 2100)
            throw ParseError("bad storm id '" + std::string(text) + "'", line_no);
        id.cyclone_number = num;
        id.year = year;
        return id;
    }
};

/// UTC observation time; minutes are nonzero only for special records
/// such as landfalls.
struct Timestamp {
    int year = 0;
    int month = 0;
    int day = 0;
    int hour = 0;
    int minute = 0;

    auto operator<=>(const Timestamp&) const = default;
};

/// One best-track observation.
struct TrackPoint {
    Timestamp time;
    std::string record_identifier;       // "" or 1-char code (L = landfall, ...)
    std::string status;                  // 2-char system status (HU, TS, TD, EX, ...)
    double latitude = 0.0;               // degrees north
    double longitude = 0.0;              // degrees east (west negative)
    std::optional<int> max_wind;         // knots; -99 sentinel mapped to nullopt
    std::optional<int> min_pressure;     // millibars; -999 sentinel mapped to nullopt
    std::vector<std::string> extras;     // wind radii (and optional RMW), opaque pass-through

    bool operator==(const TrackPoint&) const = default;
};

struct Storm {
    StormId id;
    std::string name; // uppercase or UNNAMED
    std::vector<TrackPoint> points;

    bool operator==(const Storm&) const = default;
};

namespace detail {

inline bool looks_like_header(const std::vector<std::string_view>& fields) {
    if (fields.empty()) return false;
    const auto first = trim(fields[0]);
    return first.size() == 8 && std::isalpha(static_cast<unsigned char>(first[0])) &&
           std::isalpha(static_cast<unsigned char>(first[1]));
}

inline int parse_int_field(std::string_view field, std::string_view what,
                           std::size_t line_no, std::size_t column) {
    const auto t = trim(field);
    int value = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), value);
    if (r.ec != std::errc{} || r.ptr != t.data() + t.size())
        throw ParseError("unparseable " + std::string(what) + " '" + std::string(t) + "'",
                         line_no, column);
    return value;
}

/// Parse "28.0N" / " 94.8W" style coordinates into signed degrees.
inline double parse_coordinate(std::string_view field, bool is_latitude,
                               std::size_t line_no, std::size_t column) {
    const auto t = trim(field);
    if (t.size() < 2)
        throw ParseError("unparseable coordinate '" + std::string(t) + "'", line_no, column);
    const char hemi = static_cast<char>(std::toupper(t.back()));
    double value = 0.0;
    const auto body = t.substr(0, t.size() - 1);
    const auto r = std::from_chars(body.data(), body.data() + body.size(), value);
    if (r.ec != std::errc{} || r.ptr != body.data() + body.size())
        throw ParseError("unparseable coordinate '" + std::string(t) + "'", line_no, column);
    double signed_value;
    if (is_latitude) {
        if (hemi == 'N') signed_value = value;
        else if (hemi == 'S') signed_value = -value;
        else throw ParseError("bad latitude hemisphere in '" + std::string(t) + "'", line_no, column);
        if (signed_value < -90.0 || signed_value > 90.0)
            throw ParseError("latitude out of range in '" + std::string(t) + "'", line_no, column);
    } else {
        if (hemi == 'E') signed_value = value;
        else if (hemi == 'W') signed_value = -value;
        else throw ParseError("bad longitude hemisphere in '" + std::string(t) + "'", line_no, column);
        if (signed_value < -180.0 || signed_value > 180.0)
            throw ParseError("longitude out of range in '" + std::string(t) + "'", line_no, column);
    }
    return signed_value;
}

inline std::size_t field_column(std::string_view line, const std::vector<std::string_view>& fields,
                                std::size_t index) {
    return static_cast<std::size_t>(fields[index].data() - line.data()) + 1;
}

} // namespace detail

/// Parse one HURDAT2 data line (without the header context).
inline TrackPoint parse_track_point(std::string_view line, std::size_t line_no) {
    using namespace detail;
    auto fields = split(line, ',');
    while (!fields.empty() && trim(fields.back()).empty()) fields.pop_back();
    // 8 core fields + 12 wind radii, plus the optional RMW column in
    // post-2021 archive revisions.
    if (fields.size() != 20 && fields.size() != 21)
        throw ParseError("data line has " + std::to_string(fields.size()) +
                             " fields, expected 20 or 21", line_no);

    TrackPoint pt;
    const auto date = trim(fields[0]);
    const auto time = trim(fields[1]);
    if (date.size() != 8)
        throw ParseError("bad date '" + std::string(date) + "'", line_no, field_column(line, fields, 0));
    if (time.size() != 4)
        throw ParseError("bad time '" + std::string(time) + "'", line_no, field_column(line, fields, 1));
    const auto digits = [&](std::string_view s, int from, int count) {
        int v = 0;
        auto sub = s.substr(from, count);
        const auto r = std::from_chars(sub.data(), sub.data() + sub.size(), v);
        if (r.ec != std::errc{} || r.ptr != sub.data() + sub.size())
            throw ParseError("bad date/time digits '" + std::string(s) + "'", line_no);
        return v;
    };
    pt.time.year = digits(date, 0, 4);
    pt.time.month = digits(date, 4, 2);
    pt.time.day = digits(date, 6, 2);
    pt.time.hour = digits(time, 0, 2);
    pt.time.minute = digits(time, 2, 2);
    if (pt.time.month < 1 || pt.time.month > 12 || pt.time.day < 1 || pt.time.day > 31 ||
        pt.time.hour > 23 || pt.time.minute > 59)
        throw ParseError("date/time out of range '" + std::string(date) + " " + std::string(time) + "'",
                         line_no);

    pt.record_identifier = std::string(trim(fields[2]));
    pt.status = std::string(trim(fields[3]));
    pt.latitude = parse_coordinate(fields[4], true, line_no, field_column(line, fields, 4));
    pt.longitude = parse_coordinate(fields[5], false, line_no, field_column(line, fields, 5));

    const int wind = parse_int_field(fields[6], "wind", line_no, field_column(line, fields, 6));
    if (wind != -99 && wind != -999) pt.max_wind = wind;
    const int pressure = parse_int_field(fields[7], "pressure", line_no, field_column(line, fields, 7));
    if (pressure != -999 && pressure != -99) pt.min_pressure = pressure;

    for (std::size_t i = 8; i < fields.size(); ++i)
        pt.extras.emplace_back(detail::trim(fields[i]));
    return pt;
}

/// Parse a full HURDAT2 archive from a stream. Storms are returned in file
/// order; hemisphere suffixes become signed degrees and -99/-999 sentinels
/// become missing values.
inline std::vector<Storm> parse_archive(std::istream& in) {
    using namespace detail;
    std::vector<Storm> storms;
    std::string raw;
    std::size_t line_no = 0;

    Storm current;
    std::size_t expected = 0;   // declared data lines still owed to `current`
    bool in_storm = false;

    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string_view line(raw);
        if (trim(line).empty()) continue;

        auto fields = split(line, ',');
        while (!fields.empty() && trim(fields.back()).empty()) fields.pop_back();

        if (!in_storm) {
            if (!looks_like_header(fields))
                throw ParseError("expected storm header, got " + std::to_string(fields.size()) +
                                     " fields", line_no);
            if (fields.size() != 3)
                throw ParseError("malformed header: " + std::to_string(fields.size()) +
                                     " fields, expected 3", line_no);
            current = Storm{};
            current.id = StormId::parse(trim(fields[0]), line_no);
            current.name = std::string(trim(fields[1]));
            const int declared = parse_int_field(fields[2], "entry count", line_no,
                                                 field_column(line, fields, 2));
            if (declared <= 0)
                throw ParseError("header declares " + std::to_string(declared) + " entries", line_no);
            expected = static_cast<std::size_t>(declared);
            in_storm = true;
            continue;
        }

        if (looks_like_header(fields))
            throw DataError("storm " + current.id.to_string() + ": expected " +
                            std::to_string(expected + current.points.size()) +
                            " data lines, found " + std::to_string(current.points.size()) +
                            " (line " + std::to_string(line_no) + ")");

        TrackPoint pt = parse_track_point(line, line_no);
        if (!current.points.empty() && !(current.points.back().time < pt.time))
            throw DataError("storm " + current.id.to_string() +
                            ": timestamps not strictly increasing (line " +
                            std::to_string(line_no) + ")");
        current.points.push_back(std::move(pt));
        if (current.points.size() == expected) {
            storms.push_back(std::move(current));
            in_storm = false;
        }
    }
    if (in_storm)
        throw DataError("storm " + current.id.to_string() + ": expected " +
                        std::to_string(expected) + " data lines, found " +
                        std::to_string(current.points.size()) + " (end of input)");
    return storms;
}

inline std::vector<Storm> parse_archive_file(const std::string& path) {
    auto in = open_input(path);
    return parse_archive(in);
}

/// Serialize one storm back to HURDAT2 layout (fixed-width fields, matching
/// the archive's native spacing).
inline void serialize_storm(const Storm& storm, std::ostream& out) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s,%19s,%7zu,", storm.id.to_string().c_str(),
                  storm.name.c_str(), storm.points.size());
    out << buf << '\n';
    for (const auto& pt : storm.points) {
        std::snprintf(buf, sizeof(buf), "%04d%02d%02d, %02d%02d,%2s,%3s,",
                      pt.time.year, pt.time.month, pt.time.day, pt.time.hour, pt.time.minute,
                      pt.record_identifier.c_str(), pt.status.c_str());
        out << buf;
        std::snprintf(buf, sizeof(buf), "%5.1f%c,", std::abs(pt.latitude),
                      pt.latitude >= 0 ? 'N' : 'S');
        out << buf;
        std::snprintf(buf, sizeof(buf), "%6.1f%c,", std::abs(pt.longitude),
                      pt.longitude >= 0 ? 'E' : 'W');
        out << buf;
        std::snprintf(buf, sizeof(buf), "%4d,%5d", pt.max_wind.value_or(-99),
                      pt.min_pressure.value_or(-999));
        out << buf;
        for (const auto& extra : pt.extras) {
            std::snprintf(buf, sizeof(buf), ",%5s", extra.c_str());
            out << buf;
        }
        // The 21-field RMW layout carries no trailing comma; the classic
        // 20-field layout does.
        if (pt.extras.size() <= 12) out << ',';
        out << '\n';
    }
}

inline std::string serialize_archive(const std::vector<Storm>& storms) {
    std::ostringstream os;
    for (const auto& s : storms) serialize_storm(s, os);
    return os.str();
}

/// Storm-selection rule for building a study set.
struct FilterOptions {
    std::set<std::string> statuses = {"HU"}; // match any of these at >=1 point
    std::optional<int> min_peak_wind;        // knots; >=1 point with wind >= this
    std::size_t min_points = 1;

    bool matches(const Storm& storm) const {
        if (storm.points.size() < min_points) return false;
        bool status_ok = statuses.empty();
        if (!status_ok)
            status_ok = std::any_of(storm.points.begin(), storm.points.end(),
                                    [&](const TrackPoint& p) { return statuses.count(p.status) > 0; });
        if (!status_ok) return false;
        if (min_peak_wind) {
            const bool wind_ok =
                std::any_of(storm.points.begin(), storm.points.end(), [&](const TrackPoint& p) {
                    return p.max_wind && *p.max_wind >= *min_peak_wind;
                });
            if (!wind_ok) return false;
        }
        return true;
    }
};

/// Select storms in [year_lo, year_hi] matching the filter (default: any
/// point at hurricane status). Preserves input order; never duplicates.
inline std::vector<Storm> filter_hurricanes(const std::vector<Storm>& storms, int year_lo,
                                            int year_hi, const FilterOptions& options = {}) {
    if (year_lo > year_hi) throw DataError("filter_hurricanes: year_lo > year_hi");
    std::vector<Storm> out;
    for (const auto& s : storms)
        if (s.id.year >= year_lo && s.id.year <= year_hi && options.matches(s))
            out.push_back(s);
    return out;
}

} // namespace hurricast
