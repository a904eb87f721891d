#include "taildep/calendar.hpp"

#include <array>
#include <cstdio>

#include "taildep/common.hpp"

namespace taildep::cal {

namespace {

constexpr int kJalaliMin = 1300;
constexpr int kJalaliMax = 1500;

// 1384-01-01 (Nowruz 2005) anchors the two calendars.
constexpr int kAnchorJalaliYear = 1384;
constexpr Date kAnchorGregorian{2005, 3, 21};

constexpr std::array<int, 12> kJalaliMonthLen = {31, 31, 31, 31, 31, 31,
                                                 30, 30, 30, 30, 30, 29};

int jalali_month_length(int jy, int jm) {
    if (jm == 12 && jalali_is_leap(jy)) return 30;
    return kJalaliMonthLen[jm - 1];
}

int jalali_year_length(int jy) { return jalali_is_leap(jy) ? 366 : 365; }

}  // namespace

long gregorian_to_days(const Date& g) {
    // Fliegel-Van Flandern day-number arithmetic
    const long a = (14 - g.m) / 12;
    const long y = g.y + 4800 - a;
    const long m = g.m + 12 * a - 3;
    return g.d + (153 * m + 2) / 5 + 365 * y + y / 4 - y / 100 + y / 400 - 32045;
}

Date days_to_gregorian(long jdn) {
    const long a = jdn + 32044;
    const long b = (4 * a + 3) / 146097;
    const long c = a - 146097 * b / 4;
    const long d = (4 * c + 3) / 1461;
    const long e = c - 1461 * d / 4;
    const long m = (5 * e + 2) / 153;
    Date g;
    g.d = static_cast<int>(e - (153 * m + 2) / 5 + 1);
    g.m = static_cast<int>(m + 3 - 12 * (m / 10));
    g.y = static_cast<int>(100 * b + d - 4800 + m / 10);
    return g;
}

bool jalali_is_leap(int jy) {
    int r = jy % 33;
    if (r < 0) r += 33;
    return r == 1 || r == 5 || r == 9 || r == 13 || r == 17 || r == 22 || r == 26 || r == 30;
}

Date jalali_to_gregorian(int jy, int jm, int jd) {
    if (jy < kJalaliMin || jy > kJalaliMax)
        throw DomainError("jalali_to_gregorian: year outside supported range 1300..1500");
    if (jm < 1 || jm > 12) throw DomainError("jalali_to_gregorian: invalid month");
    if (jd < 1 || jd > jalali_month_length(jy, jm))
        throw DomainError("jalali_to_gregorian: invalid day for month/year");

    long offset = 0;
    if (jy >= kAnchorJalaliYear) {
        for (int y = kAnchorJalaliYear; y < jy; ++y) offset += jalali_year_length(y);
    } else {
        for (int y = jy; y < kAnchorJalaliYear; ++y) offset -= jalali_year_length(y);
    }
    for (int m = 1; m < jm; ++m) offset += jalali_month_length(jy, m);
    offset += jd - 1;
    return days_to_gregorian(gregorian_to_days(kAnchorGregorian) + offset);
}

void gregorian_to_jalali(const Date& g, int& jy, int& jm, int& jd) {
    long offset = gregorian_to_days(g) - gregorian_to_days(kAnchorGregorian);
    int y = kAnchorJalaliYear;
    while (offset < 0) {
        --y;
        if (y < kJalaliMin) throw DomainError("gregorian_to_jalali: before supported range");
        offset += jalali_year_length(y);
    }
    while (offset >= jalali_year_length(y)) {
        offset -= jalali_year_length(y);
        ++y;
        if (y > kJalaliMax) throw DomainError("gregorian_to_jalali: after supported range");
    }
    int m = 1;
    while (offset >= jalali_month_length(y, m)) {
        offset -= jalali_month_length(y, m);
        ++m;
    }
    jy = y;
    jm = m;
    jd = static_cast<int>(offset) + 1;
}

bool parse_ymd(const std::string& text, int& y, int& m, int& d) {
    char sep1 = 0, sep2 = 0;
    if (std::sscanf(text.c_str(), "%d%c%d%c%d", &y, &sep1, &m, &sep2, &d) != 5) return false;
    if (!((sep1 == '-' && sep2 == '-') || (sep1 == '/' && sep2 == '/'))) return false;
    return true;
}

std::string format_date(const Date& g) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", g.y, g.m, g.d);
    return buf;
}

}  // namespace taildep::cal
