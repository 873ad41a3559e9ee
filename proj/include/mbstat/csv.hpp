#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mbstat/errors.hpp"
#include "mbstat/tick.hpp"

namespace mbstat {

// One wire-format event row: time,investor_id,side,price,volume[,adjust].
struct EventRecord {
    double time = 0.0;
    std::string investor_id;
    Side side = Side::Buy;
    double price = 0.0;
    double volume = 0.0;
    double adjust = 1.0;

    bool operator==(const EventRecord&) const = default;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline bool parse_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

// Days since 1970-01-01 for a proleptic Gregorian date (Hinnant's civil
// calendar algorithm).
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// RFC-3339 timestamp to epoch seconds: YYYY-MM-DDThh:mm:ss[.frac](Z|+hh:mm|-hh:mm).
inline bool parse_rfc3339(const std::string& text, double& out) {
    const std::string t = trim(text);
    int y, mo, d, h, mi;
    double sec;
    int consumed = 0;
    if (std::sscanf(t.c_str(), "%4d-%2d-%2d%*1[Tt ]%2d:%2d:%lf%n", &y, &mo, &d, &h, &mi, &sec,
                    &consumed) != 6)
        return false;
    std::string_view rest(t.c_str() + consumed);
    double offset = 0.0;
    if (rest == "Z" || rest == "z") {
        // UTC
    } else if (rest.size() == 6 && (rest[0] == '+' || rest[0] == '-') && rest[3] == ':' &&
               std::isdigit(static_cast<unsigned char>(rest[1])) &&
               std::isdigit(static_cast<unsigned char>(rest[2])) &&
               std::isdigit(static_cast<unsigned char>(rest[4])) &&
               std::isdigit(static_cast<unsigned char>(rest[5]))) {
        const int oh = (rest[1] - '0') * 10 + (rest[2] - '0');
        const int om = (rest[4] - '0') * 10 + (rest[5] - '0');
        offset = (rest[0] == '+' ? 1.0 : -1.0) * (oh * 3600.0 + om * 60.0);
    } else if (!rest.empty()) {
        return false;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec < 0.0 || sec >= 61.0)
        return false;
    out = static_cast<double>(days_from_civil(y, static_cast<unsigned>(mo),
                                              static_cast<unsigned>(d))) *
              86400.0 +
          h * 3600.0 + mi * 60.0 + sec - offset;
    return true;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline const char* kEventHeader = "time,investor_id,side,price,volume";
inline const char* kEventHeaderAdjust = "time,investor_id,side,price,volume,adjust";

// Parses an event-log stream. Rows must be time-ordered; violations and
// malformed fields are reported with their 1-based line number. With
// integer_volumes set, fractional share counts are rejected.
inline std::vector<EventRecord> ingest_events(std::istream& in, bool integer_volumes = false) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError(1, 1, "missing header row");
    ++line_no;
    const std::string header = detail::trim(line);
    bool has_adjust;
    if (header == kEventHeader) {
        has_adjust = false;
    } else if (header == kEventHeaderAdjust) {
        has_adjust = true;
    } else {
        throw ParseError(1, 1, "header must be '" + std::string(kEventHeader) + "[,adjust]'");
    }

    std::vector<EventRecord> records;
    double last_time = -std::numeric_limits<double>::infinity();
    bool have_last = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv(line);
        const std::size_t expected = has_adjust ? 6 : 5;
        if (fields.size() != expected && !(has_adjust && fields.size() == 5))
            throw ParseError(line_no, fields.size() + 1,
                             "expected " + std::to_string(expected) + " fields, got " +
                                 std::to_string(fields.size()));

        EventRecord rec;
        if (!detail::parse_double(fields[0], rec.time) &&
            !detail::parse_rfc3339(fields[0], rec.time))
            throw ParseError(line_no, 1, "time must be a number or RFC-3339 timestamp");

        rec.investor_id = detail::trim(fields[1]);
        if (rec.investor_id.empty()) throw ParseError(line_no, 2, "empty investor_id");

        const std::string side = detail::trim(fields[2]);
        if (side == "B")
            rec.side = Side::Buy;
        else if (side == "S")
            rec.side = Side::Sell;
        else
            throw ParseError(line_no, 3, "side must be 'B' or 'S'");

        if (!detail::parse_double(fields[3], rec.price))
            throw ParseError(line_no, 4, "price must be a number");
        if (!(rec.price > 0.0)) throw ParseError(line_no, 4, "price must be positive");

        if (!detail::parse_double(fields[4], rec.volume))
            throw ParseError(line_no, 5, "volume must be a number");
        if (!(rec.volume > 0.0)) throw ParseError(line_no, 5, "volume must be positive");
        if (integer_volumes && rec.volume != std::floor(rec.volume))
            throw ParseError(line_no, 5, "volume must be an integer (integer-volumes mode)");

        if (fields.size() == 6) {
            if (!detail::parse_double(fields[5], rec.adjust))
                throw ParseError(line_no, 6, "adjust must be a number");
            if (!(rec.adjust > 0.0)) throw ParseError(line_no, 6, "adjust must be positive");
        }

        if (have_last && rec.time < last_time) throw OrderingError(line_no);
        last_time = rec.time;
        have_last = true;
        records.push_back(std::move(rec));
    }
    return records;
}

inline std::vector<EventRecord> ingest_events_file(const std::string& path,
                                                   bool integer_volumes = false) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open input file '" + path + "'");
    try {
        return ingest_events(in, integer_volumes);
    } catch (ParseError& e) {
        throw ParseError(e.line, e.column, e.reason + " [" + path + "]");
    }
}

// Writes an event log in the ingest format. Doubles carry 17 significant
// digits so a round trip is lossless; the adjust column appears only when
// some record needs it.
inline void write_events(std::span<const EventRecord> records, std::ostream& out) {
    bool any_adjust = false;
    for (const auto& r : records) any_adjust = any_adjust || r.adjust != 1.0;
    out << (any_adjust ? kEventHeaderAdjust : kEventHeader) << '\n';
    for (const auto& r : records) {
        out << detail::format_double(r.time) << ',' << r.investor_id << ','
            << (r.side == Side::Buy ? 'B' : 'S') << ',' << detail::format_double(r.price) << ','
            << detail::format_double(r.volume);
        if (any_adjust) out << ',' << detail::format_double(r.adjust);
        out << '\n';
    }
}

inline void write_events_file(std::span<const EventRecord> records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file '" + path + "'");
    write_events(records, out);
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::vector<TradeTick> to_ticks(std::span<const EventRecord> records) {
    std::vector<TradeTick> ticks;
    ticks.reserve(records.size());
    for (const auto& r : records)
        ticks.push_back(make_tick(r.time, r.investor_id, r.side, r.price, r.volume, r.adjust));
    return ticks;
}

}  // namespace mbstat
