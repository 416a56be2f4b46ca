#pragma once

#include <string>

namespace leodet {

// Calendar time handling for I/O. Internally all epochs are seconds on a
// continuous scale relative to a scenario reference epoch; leap seconds are
// not modelled.

// Parses "YYYY-MM-DDThh:mm:ss[.fff][Z]" into seconds since the Unix epoch.
double iso_to_unix(const std::string& iso);

// Formats seconds since the Unix epoch as ISO-8601 UTC with millisecond
// precision.
std::string unix_to_iso(double unix_seconds);

// Maps scenario-relative seconds to/from ISO strings given a reference epoch.
class TimeScale {
 public:
  TimeScale() = default;
  explicit TimeScale(const std::string& reference_iso);

  double to_epoch(const std::string& iso) const;
  std::string to_iso(double epoch_seconds) const;
  double reference_unix() const { return ref_unix_; }
  const std::string& reference_iso() const { return ref_iso_; }

 private:
  std::string ref_iso_ = "2020-01-01T00:00:00Z";
  double ref_unix_ = 1577836800.0;
};

}  // namespace leodet
