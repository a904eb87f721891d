#pragma once

#include <compare>
#include <string>

namespace taildep::cal {

/// Gregorian calendar date.
struct Date {
    int y = 1970;
    int m = 1;
    int d = 1;
    auto operator<=>(const Date&) const = default;
};

/// Days since the epoch of the proleptic Gregorian calendar (JDN offsetless).
long gregorian_to_days(const Date& g);
Date days_to_gregorian(long days);

/// Arithmetic Jalali calendar on the 33-year leap cycle with leap years at
/// cycle positions {1,5,9,13,17,22,26,30}; supported range 1300..1500.
bool jalali_is_leap(int jy);

/// Convert a Jalali date to Gregorian. Throws DomainError on invalid dates
/// or years outside the supported range.
Date jalali_to_gregorian(int jy, int jm, int jd);

/// Inverse conversion; throws DomainError when the Gregorian date falls
/// outside Jalali years 1300..1500.
void gregorian_to_jalali(const Date& g, int& jy, int& jm, int& jd);

/// Parse "YYYY-MM-DD" (ISO) or "YYYY/MM/DD"; returns the raw fields without
/// calendar interpretation.
bool parse_ymd(const std::string& text, int& y, int& m, int& d);

std::string format_date(const Date& g);

}  // namespace taildep::cal
