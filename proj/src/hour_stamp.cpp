#include "chartcast/hour_stamp.hpp"

#include <cstdio>

#include "chartcast/errors.hpp"

namespace chartcast {

namespace {

// Civil <-> day-count conversion (proleptic Gregorian), Hinnant's algorithm.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

bool valid_civil(int year, int month, int day, int hour) {
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour < 0 || hour > 23) return false;
    static const int days_in_month[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = days_in_month[month - 1];
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    if (month == 2 && leap) dim = 29;
    return day <= dim;
}

}  // namespace

HourStamp HourStamp::from_civil(int year, int month, int day, int hour) {
    if (!valid_civil(year, month, day, hour)) {
        throw ParseError("invalid calendar time: " + std::to_string(year) + "-" +
                         std::to_string(month) + "-" + std::to_string(day) + " " +
                         std::to_string(hour) + ":00");
    }
    return HourStamp(days_from_civil(year, month, day) * 24 + hour);
}

HourStamp HourStamp::parse(std::string_view text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char trailing = 0;
    const std::string buf(text);
    const int n = std::sscanf(buf.c_str(), "%4d-%2d-%2d %2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s,
                              &trailing);
    if (n != 6 || mi != 0 || s != 0) {
        throw ParseError("bad timestamp '" + buf + "' (expected YYYY-MM-DD HH:00:00)");
    }
    return from_civil(y, mo, d, h);
}

CivilTime HourStamp::civil() const {
    std::int64_t days = hours_ / 24;
    int hour = static_cast<int>(hours_ % 24);
    if (hour < 0) {
        hour += 24;
        days -= 1;
    }
    CivilTime c;
    civil_from_days(days, c.year, c.month, c.day);
    c.hour = hour;
    return c;
}

std::string HourStamp::to_string() const {
    const CivilTime c = civil();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:00:00", c.year, c.month, c.day, c.hour);
    return buf;
}

std::string HourStamp::file_tag() const {
    const CivilTime c = civil();
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d_%02d", c.year, c.month, c.day, c.hour);
    return buf;
}

}  // namespace chartcast
