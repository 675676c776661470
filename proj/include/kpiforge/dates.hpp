#pragma once

#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "kpiforge/errors.hpp"

namespace kpiforge {

// Proleptic-Gregorian calendar date. All conversions are UTC; the pipeline
// never touches wall-clock time.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;

    bool valid() const {
        static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        if (month < 1 || month > 12 || day < 1) return false;
        int md = kDays[month - 1];
        if (month == 2 && (year % 4 == 0 && (year % 100 != 0 || year % 400 == 0))) md = 29;
        return day <= md;
    }

    // Days since 1970-01-01 (Howard Hinnant's civil-days algorithm).
    std::int64_t days_from_epoch() const {
        int y = year - (month <= 2);
        const int era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy =
            (153u * static_cast<unsigned>(month + (month > 2 ? -3 : 9)) + 2u) / 5u +
            static_cast<unsigned>(day) - 1u;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
    }

    std::int64_t epoch_ms() const { return days_from_epoch() * 86400000; }

    static Date from_days(std::int64_t z) {
        z += 719468;
        const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp < 10 ? mp + 3 : mp - 9;
        return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
    }

    static Date from_epoch_ms(std::int64_t ms) {
        std::int64_t days = ms / 86400000;
        if (ms < 0 && ms % 86400000 != 0) --days;
        return from_days(days);
    }

    std::string iso() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
        return buf;
    }

    // YYYYMMDD, the form EDGAR uses for period-of-report values.
    std::string compact() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d%02d%02d", year, month, day);
        return buf;
    }
};

namespace detail {
inline bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}
inline int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}
}  // namespace detail

// Accepts YYYY-MM-DD (an optional T... time suffix is dropped) and YYYYMMDD.
inline std::optional<Date> parse_date(std::string_view s) {
    if (auto t = s.find('T'); t != std::string_view::npos) s = s.substr(0, t);
    Date d;
    if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
        if (!detail::all_digits(s.substr(0, 4)) || !detail::all_digits(s.substr(5, 2)) ||
            !detail::all_digits(s.substr(8, 2)))
            return std::nullopt;
        d = Date{detail::to_int(s.substr(0, 4)), detail::to_int(s.substr(5, 2)),
                 detail::to_int(s.substr(8, 2))};
    } else if (s.size() == 8 && detail::all_digits(s)) {
        d = Date{detail::to_int(s.substr(0, 4)), detail::to_int(s.substr(4, 2)),
                 detail::to_int(s.substr(6, 2))};
    } else {
        return std::nullopt;
    }
    if (!d.valid()) return std::nullopt;
    return d;
}

inline Date require_date(std::string_view s, const char* what) {
    auto d = parse_date(s);
    if (!d) throw ConfigError(std::string("invalid date for ") + what + ": '" + std::string(s) + "'");
    return *d;
}

}  // namespace kpiforge
