#include "scenekit/timeutil.hpp"

#include <charconv>

#include "scenekit/errors.hpp"

namespace scenekit::timeutil {

namespace {

bool is_leap(int y) {
    return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
}

unsigned last_day_of_month(int y, unsigned m) {
    static const unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[m - 1];
}

// Parses exactly `width` digits at `pos`; returns false on any mismatch.
bool take_digits(std::string_view s, std::size_t pos, std::size_t width, int& out) {
    if (pos + width > s.size()) return false;
    int value = 0;
    for (std::size_t i = 0; i < width; ++i) {
        char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        value = value * 10 + (c - '0');
    }
    out = value;
    return true;
}

std::string pad4(int v) {
    std::string s = std::to_string(v);
    while (s.size() < 4) s.insert(s.begin(), '0');
    return s;
}

std::string pad2(int v) {
    std::string s = std::to_string(v);
    if (s.size() < 2) s.insert(s.begin(), '0');
    return s;
}

constexpr std::int64_t kSecondsPerDay = 86400;

// Floor division for possibly-negative instants.
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

// Howard Hinnant's days_from_civil algorithm.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), m, d};
}

bool valid_civil(int year, unsigned month, unsigned day) {
    if (month < 1 || month > 12) return false;
    if (day < 1 || day > last_day_of_month(year, month)) return false;
    return true;
}

std::int64_t parse_date(std::string_view field, std::size_t line) {
    int y = 0, m = 0, d = 0;
    bool ok = field.size() == 10 && take_digits(field, 0, 4, y) && field[4] == '-' &&
              take_digits(field, 5, 2, m) && field[7] == '-' && take_digits(field, 8, 2, d);
    if (!ok || !valid_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d))) {
        throw Error(errc::bad_date, "expected YYYY-MM-DD, got '" + std::string(field) + "'", line);
    }
    return days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string format_date(std::int64_t days) {
    CivilDate c = civil_from_days(days);
    return pad4(c.year) + "-" + pad2(static_cast<int>(c.month)) + "-" +
           pad2(static_cast<int>(c.day));
}

std::int64_t parse_instant(std::string_view field, std::size_t line) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    bool ok = field.size() == 20 && take_digits(field, 0, 4, y) && field[4] == '-' &&
              take_digits(field, 5, 2, mo) && field[7] == '-' && take_digits(field, 8, 2, d) &&
              field[10] == 'T' && take_digits(field, 11, 2, h) && field[13] == ':' &&
              take_digits(field, 14, 2, mi) && field[16] == ':' && take_digits(field, 17, 2, s) &&
              field[19] == 'Z';
    if (!ok || !valid_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) || h > 23 ||
        mi > 59 || s > 59) {
        throw Error(errc::bad_timestamp,
                    "expected YYYY-MM-DDTHH:MM:SSZ, got '" + std::string(field) + "'", line);
    }
    return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) *
               kSecondsPerDay +
           h * 3600 + mi * 60 + s;
}

std::string format_instant(std::int64_t seconds) {
    std::int64_t days = floor_div(seconds, kSecondsPerDay);
    std::int64_t rem = seconds - days * kSecondsPerDay;
    int h = static_cast<int>(rem / 3600);
    int mi = static_cast<int>((rem % 3600) / 60);
    int s = static_cast<int>(rem % 60);
    return format_date(days) + "T" + pad2(h) + ":" + pad2(mi) + ":" + pad2(s) + "Z";
}

std::int64_t period_of_day(std::int64_t days, PeriodLength len) {
    CivilDate c = civil_from_days(days);
    std::int64_t months = static_cast<std::int64_t>(c.year) * 12 +
                          static_cast<std::int64_t>(c.month) - 1 - 1970 * 12;
    switch (len) {
        case PeriodLength::month: return months;
        case PeriodLength::quarter: return floor_div(months, 3);
        case PeriodLength::year: return c.year - 1970;
    }
    return months;
}

std::int64_t period_of_instant(std::int64_t seconds, PeriodLength len) {
    return period_of_day(floor_div(seconds, kSecondsPerDay), len);
}

std::int64_t period_start_seconds(std::int64_t period, PeriodLength len) {
    std::int64_t months = 0;
    switch (len) {
        case PeriodLength::month: months = period; break;
        case PeriodLength::quarter: months = period * 3; break;
        case PeriodLength::year: months = period * 12; break;
    }
    std::int64_t y = 1970 + floor_div(months, 12);
    std::int64_t m = months - floor_div(months, 12) * 12 + 1;
    return days_from_civil(static_cast<int>(y), static_cast<unsigned>(m), 1) * kSecondsPerDay;
}

std::string period_label(std::int64_t period, PeriodLength len) {
    std::int64_t start = period_start_seconds(period, len);
    CivilDate c = civil_from_days(floor_div(start, kSecondsPerDay));
    switch (len) {
        case PeriodLength::month: return pad4(c.year) + "-" + pad2(static_cast<int>(c.month));
        case PeriodLength::quarter:
            return pad4(c.year) + "Q" + std::to_string((c.month - 1) / 3 + 1);
        case PeriodLength::year: return pad4(c.year);
    }
    return pad4(c.year);
}

int year_of_instant(std::int64_t seconds) {
    return civil_from_days(floor_div(seconds, kSecondsPerDay)).year;
}

}  // namespace scenekit::timeutil
