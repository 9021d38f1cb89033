#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace scenekit::timeutil {

// Calendar arithmetic on proleptic Gregorian dates. Days count from
// 1970-01-01; instants are seconds from 1970-01-01T00:00:00Z. No leap
// seconds, no time zones: everything is UTC.

struct CivilDate {
    int year;
    unsigned month;  // 1..12
    unsigned day;    // 1..31
};

std::int64_t days_from_civil(int year, unsigned month, unsigned day);
CivilDate civil_from_days(std::int64_t days);
bool valid_civil(int year, unsigned month, unsigned day);

// "YYYY-MM-DD"; throws BadDate.
std::int64_t parse_date(std::string_view field, std::size_t line = 0);
std::string format_date(std::int64_t days);

// "YYYY-MM-DDTHH:MM:SSZ"; throws BadTimestamp.
std::int64_t parse_instant(std::string_view field, std::size_t line = 0);
std::string format_instant(std::int64_t seconds);

enum class PeriodLength { month, quarter, year };

// Absolute period index: the count of months / quarters / years since
// 1970. Consecutive calendar periods map to consecutive integers.
std::int64_t period_of_instant(std::int64_t seconds, PeriodLength len);
std::int64_t period_of_day(std::int64_t days, PeriodLength len);
std::int64_t period_start_seconds(std::int64_t period, PeriodLength len);
std::string period_label(std::int64_t period, PeriodLength len);
int year_of_instant(std::int64_t seconds);

}  // namespace scenekit::timeutil
