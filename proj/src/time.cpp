#include "leodet/time.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace leodet {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y += (m <= 2);
}

}  // namespace

double iso_to_unix(const std::string& iso) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double s = 0.0;
  const int n = std::sscanf(iso.c_str(), "%d-%d-%dT%d:%d:%lf", &y, &mo, &d, &h, &mi, &s);
  if (n != 6 || mo < 1 || mo > 12 || d < 1 || d > 31) {
    throw std::invalid_argument("unparsable ISO-8601 timestamp: " + iso);
  }
  return static_cast<double>(days_from_civil(y, mo, d)) * 86400.0 + h * 3600.0 + mi * 60.0 + s;
}

std::string unix_to_iso(double unix_seconds) {
  // Round to milliseconds first so the printed fields are consistent.
  const double ms = std::round(unix_seconds * 1000.0);
  long total_ms = static_cast<long>(ms);
  long day = total_ms / 86400000;
  long rem = total_ms - day * 86400000;
  if (rem < 0) {
    rem += 86400000;
    day -= 1;
  }
  int y, mo, d;
  civil_from_days(day, y, mo, d);
  const int h = static_cast<int>(rem / 3600000);
  rem -= static_cast<long>(h) * 3600000;
  const int mi = static_cast<int>(rem / 60000);
  rem -= static_cast<long>(mi) * 60000;
  const int s = static_cast<int>(rem / 1000);
  const int milli = static_cast<int>(rem - s * 1000);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", y, mo, d, h, mi, s, milli);
  return buf;
}

TimeScale::TimeScale(const std::string& reference_iso)
    : ref_iso_(reference_iso), ref_unix_(iso_to_unix(reference_iso)) {}

double TimeScale::to_epoch(const std::string& iso) const { return iso_to_unix(iso) - ref_unix_; }

std::string TimeScale::to_iso(double epoch_seconds) const {
  return unix_to_iso(ref_unix_ + epoch_seconds);
}

}  // namespace leodet
